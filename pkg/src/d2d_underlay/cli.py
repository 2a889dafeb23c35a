"""Command line front end.

    d2d-underlay run            one Monte Carlo experiment
    d2d-underlay sweep-radius   D2D cluster radius sweep (20..100 m)
    d2d-underlay sweep-density  D2D pairs as a fraction of CUs (10%..100%)
    d2d-underlay validate-config

Exit codes: 0 success, 2 missing / invalid configuration, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from .config import ConfigError, ScenarioConfig, from_mapping, load_config
from .geometry import write_topology_csv
from .sim import (SCHEMES, default_workers, format_csv, realization_rng, run_monte_carlo,
                  simulate_realization, single_point, sweep)

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3

RADIUS_VALUES = [20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0]
DENSITY_VALUES = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]

# flag dest -> config key (dBm keys are converted by from_mapping)
_FLAG_KEYS = {
    "cell_radius_m": "cell_radius_m",
    "cluster_radius_m": "cluster_radius_m",
    "num_cus": "num_cus",
    "num_d2d_pairs": "num_d2d_pairs",
    "bandwidth_hz": "uplink_bandwidth_hz",
    "noise_dbm": "noise_power_dbm",
    "pathloss_exponent": "pathloss_exponent",
    "pathloss_constant": "pathloss_constant",
    "p_max_cu_dbm": "p_max_cu_dbm",
    "p_max_d2d_dbm": "p_max_d2d_dbm",
    "sinr_range_db": "sinr_target_range_db",
    "shadowing_db": "shadowing_sigma_db",
    "margin_db": "margin_k_db",
    "realizations": "num_realizations",
    "seed": "master_seed",
    "min_link_distance_m": "min_link_distance_m",
    "cu_conditioning": "condition_cu_feasible",
    "baseline_margin_all_cus": "baseline_margin_all_cus",
    "baseline_d2d_power": "baseline_d2d_power",
}


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("-c", "--config", type=Path, help="JSON config file (flags override it)")
    g = p.add_argument_group("scenario")
    g.add_argument("--cell-radius-m", type=float)
    g.add_argument("--cluster-radius-m", type=float)
    g.add_argument("--num-cus", type=int)
    g.add_argument("--num-d2d-pairs", type=int)
    g.add_argument("--bandwidth-hz", type=float)
    g.add_argument("--noise-dbm", type=float)
    g.add_argument("--pathloss-exponent", type=float)
    g.add_argument("--pathloss-constant", type=float)
    g.add_argument("--p-max-cu-dbm", type=float)
    g.add_argument("--p-max-d2d-dbm", type=float)
    g.add_argument("--sinr-range-db", type=float, nargs=2, metavar=("LO", "HI"))
    g.add_argument("--shadowing-db", type=float)
    g.add_argument("--margin-db", type=float, help="baseline SINR margin k")
    g.add_argument("--realizations", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--min-link-distance-m", type=float)
    g.add_argument("--cu-conditioning", action=argparse.BooleanOptionalAction, default=None,
                   help="redraw CUs that cannot reach their target alone")
    g.add_argument("--baseline-margin-all-cus", action=argparse.BooleanOptionalAction, default=None)
    g.add_argument("--baseline-d2d-power", choices=("minimum", "cap"))


def _add_run_flags(p: argparse.ArgumentParser, default_out: str) -> None:
    p.add_argument("-o", "--output", type=Path, default=Path(default_out))
    p.add_argument("-j", "--workers", type=int, default=default_workers(),
                   help="worker processes (default: all available CPUs)")
    p.add_argument("--baseline", action=argparse.BooleanOptionalAction, default=True,
                   help="emit baseline rows")
    p.add_argument("-q", "--quiet", action="store_true", help="no progress on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="d2d-underlay", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="single Monte Carlo experiment")
    _add_scenario_flags(p)
    _add_run_flags(p, "run.csv")
    p.add_argument("--topology-dump", type=Path, help="write realization 0's topology as CSV")

    for name, axis_help, default in (
        ("sweep-radius", "cluster radii in meters", RADIUS_VALUES),
        ("sweep-density", "D2D pair counts as fractions of the CU count", DENSITY_VALUES),
    ):
        p = sub.add_parser(name, help=f"sweep over {axis_help}")
        _add_scenario_flags(p)
        _add_run_flags(p, f"{name}.csv")
        p.add_argument("--values", type=float, nargs="+", default=default, help=axis_help)

    p = sub.add_parser("validate-config", help="check a config and print resolved linear values")
    _add_scenario_flags(p)
    return parser


def resolve_config(args: argparse.Namespace) -> ScenarioConfig:
    base = load_config(args.config) if args.config is not None else ScenarioConfig()
    flags = {key: getattr(args, dest) for dest, key in _FLAG_KEYS.items()
             if getattr(args, dest, None) is not None}
    return from_mapping(flags, base)


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent if str(path.parent) else ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _progress(quiet: bool):
    if quiet:
        return None

    def report(done: int, total: int) -> None:
        print(f"\r  {done}/{total} realizations", end="" if done < total else "\n",
              file=sys.stderr, flush=True)
    return report


def _print_summary(result, schemes) -> None:
    print(f"{'axis':>10} {'scheme':>9} {'access':>8} {'power_inc_mw':>13} {'tput_inc_bps':>13} {'ee_inc':>12}")
    for row in result.rows:
        if row.result is None:
            print(f"{row.axis_value:>10g} {'error':>9} {row.error}")
            continue
        for s in schemes:
            m = row.result.mean(s)
            print(f"{row.axis_value:>10g} {s:>9} {m['access_ratio']:8.4f} {m['power_inc_mw']:13.6g} "
                  f"{m['tput_inc_bps']:13.6g} {m['ee_inc']:12.6g}")


def execute(args: argparse.Namespace) -> int:
    try:
        cfg = resolve_config(args)
    except FileNotFoundError as exc:
        print(f"error: config file not found: {exc.filename}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        print(f"error: config file is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print("error: invalid configuration", file=sys.stderr)
        for e in exc.errors:
            print(f"  {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    if args.command == "validate-config":
        for key, value in cfg.to_dict().items():
            print(f"{key} = {value!r}")
        return EXIT_OK

    progress = _progress(args.quiet)
    if args.command == "run":
        result = single_point(cfg, run_monte_carlo(cfg, workers=args.workers, progress=progress))
    else:
        axis = "cluster_radius" if args.command == "sweep-radius" else "d2d_fraction"
        try:
            result = sweep(cfg, axis, args.values, workers=args.workers, progress=progress)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG

    schemes = SCHEMES if args.baseline else ("proposed",)
    try:
        write_atomic(args.output, format_csv(result, cfg, schemes))
        if args.command == "run" and args.topology_dump is not None:
            sample = simulate_realization(cfg, realization_rng(cfg.master_seed, 0))
            write_topology_csv(sample.topology, args.topology_dump)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    _print_summary(result, schemes)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    return execute(build_parser().parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
