"""Monte Carlo engine: realizations, metrics, aggregation and sweeps.

Each realization draws SINR targets, a topology and a channel once, then
runs the proposed minimum-power allocation and the fixed-margin baseline on
the same draw.  Realization ``k`` always uses the random stream derived from
``(master_seed, k)``, so results do not depend on worker count or execution
order, and every sweep point reuses the same streams (common random numbers).
"""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .baseline import baseline_allocate
from .channel import ChannelRealization, cu_link_gains, realize_channels
from .config import ConfigError, ScenarioConfig, validate
from .geometry import MAX_RESAMPLE_ATTEMPTS, Topology, cu_positions_ok, sample_disk, sample_topology
from .matching import AllocationOutcome, Assignment, allocate
from .power import SinrTargets, build_candidates, min_power_exclusive

SCHEMES = ("proposed", "baseline")
REDRAW_BATCH = 16
AXES = {"cluster_radius": "cluster_radius_m", "d2d_fraction": "num_d2d_pairs"}

METRIC_COLUMNS = (
    "access_ratio", "admissible_ratio", "power_inc_mw", "power_inc_pct",
    "tput_inc_bps", "tput_inc_pct", "ee_inc", "ee_inc_pct",
)
CSV_COLUMNS = ("axis", "scheme", "realizations", *METRIC_COLUMNS,
               *(f"{c}_std" for c in METRIC_COLUMNS))


@dataclass(frozen=True)
class RealizationMetrics:
    access_ratio: float
    admissible_ratio: float
    power_no_d2d: float        # mW
    power_with_d2d: float
    throughput_no_d2d: float   # bit/s
    throughput_with_d2d: float
    ee_no_d2d: float           # bit/s per mW
    ee_with_d2d: float

    def increases(self) -> dict[str, float]:
        """The reported metric columns for this realization."""
        return {
            "access_ratio": self.access_ratio,
            "admissible_ratio": self.admissible_ratio,
            "power_inc_mw": self.power_with_d2d - self.power_no_d2d,
            "power_inc_pct": 100.0 * (self.power_with_d2d - self.power_no_d2d) / self.power_no_d2d,
            "tput_inc_bps": self.throughput_with_d2d - self.throughput_no_d2d,
            "tput_inc_pct": 100.0 * (self.throughput_with_d2d - self.throughput_no_d2d) / self.throughput_no_d2d,
            "ee_inc": self.ee_with_d2d - self.ee_no_d2d,
            "ee_inc_pct": 100.0 * (self.ee_with_d2d - self.ee_no_d2d) / self.ee_no_d2d,
        }


@dataclass(frozen=True)
class RealizationSample:
    """Everything drawn and decided in one realization."""

    targets: SinrTargets
    topology: Topology
    channel: ChannelRealization
    outcomes: dict[str, AllocationOutcome]


def shannon_rate(bandwidth_hz, sinr):
    return bandwidth_hz * np.log2(1.0 + np.asarray(sinr, dtype=float))


def compute_metrics(assignment: Assignment, cu_powers, d2d_powers, ch: ChannelRealization,
                    targets: SinrTargets, cfg: ScenarioConfig) -> RealizationMetrics:
    """Compare one scheme's allocation against the D2D-free reference.

    CUs are credited their target rate on both sides; each matched D2D pair
    adds its rate at the SINR it actually realizes.
    """
    W = cfg.channel_bandwidth_hz
    noise = cfg.noise_power_linear
    xi_c = np.asarray(targets.cu_targets, dtype=float)
    p_min = min_power_exclusive(xi_c, ch.g_cu_bs, noise)
    cu_powers = np.asarray(cu_powers, dtype=float)
    d2d_powers = np.asarray(d2d_powers, dtype=float)

    power_no = float(np.sum(p_min))
    tput_no = float(np.sum(shannon_rate(W, xi_c)))
    power_with = float(np.sum(cu_powers) + np.sum(d2d_powers))
    tput_with = tput_no
    if assignment.matches:
        i, j = np.array(assignment.matches).T
        sinr = d2d_powers[j] * ch.g_d2d[j] / (noise + cu_powers[i] * ch.h_cu_d2d[i, j])
        tput_with += float(np.sum(shannon_rate(W, sinr)))

    m = len(d2d_powers)
    matched = len(assignment.matches)
    admissible = matched + len(assignment.unmatched_d2d)
    return RealizationMetrics(
        access_ratio=matched / m if m else 0.0,
        admissible_ratio=admissible / m if m else 0.0,
        power_no_d2d=power_no,
        power_with_d2d=power_with,
        throughput_no_d2d=tput_no,
        throughput_with_d2d=tput_with,
        ee_no_d2d=tput_no / power_no,
        ee_with_d2d=tput_with / power_with,
    )


def realization_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


def sample_targets(cfg: ScenarioConfig, rng: np.random.Generator, n: int, m: int) -> SinrTargets:
    lo, hi = cfg.sinr_target_range_db
    cu_db = rng.uniform(lo, hi, size=n)
    d2d_db = rng.uniform(lo, hi, size=m)
    return SinrTargets(10.0 ** (cu_db / 10.0), 10.0 ** (d2d_db / 10.0))


def _condition_cus(cfg, rng, targets, topo, ch):
    """Redraw (target, position, links) of every CU that cannot reach its
    target alone within P_max^c, so the D2D-free cell is always feasible.
    Positions violating the link-distance floor count as failed draws."""
    noise, p_max = cfg.noise_power_linear, cfg.p_max_cu_linear
    xi = targets.cu_targets.copy()
    bad = np.flatnonzero(min_power_exclusive(xi, ch.g_cu_bs, noise) > p_max)
    if not bad.size:
        return targets, topo, ch
    cus = topo.cu_positions.copy()
    g = ch.g_cu_bs.copy()
    h = ch.h_cu_d2d.copy()
    lo, hi = cfg.sinr_target_range_db
    # Each round proposes REDRAW_BATCH draws per open CU and keeps the first
    # acceptable one.
    for _ in range(MAX_RESAMPLE_ATTEMPTS // REDRAW_BATCH):
        k = bad.size * REDRAW_BATCH
        xi_new = 10.0 ** (rng.uniform(lo, hi, size=k) / 10.0)
        pos = sample_disk(rng, k, cfg.cell_radius_m)
        g_new, h_new = cu_link_gains(pos, topo, cfg, rng)
        ok = (cu_positions_ok(pos, topo.d2d_rx_positions, cfg.min_link_distance_m)
              & (min_power_exclusive(xi_new, g_new, noise) <= p_max)).reshape(bad.size, REDRAW_BATCH)
        hit = ok.any(axis=1)
        pick = np.flatnonzero(hit) * REDRAW_BATCH + ok[hit].argmax(axis=1)
        acc = bad[hit]
        xi[acc], cus[acc], g[acc], h[acc] = xi_new[pick], pos[pick], g_new[pick], h_new[pick]
        bad = bad[~hit]
        if not bad.size:
            break
    return (SinrTargets(xi, targets.d2d_targets),
            replace(topo, cu_positions=cus),
            replace(ch, g_cu_bs=g, h_cu_d2d=h))


def simulate_realization(cfg: ScenarioConfig, rng: np.random.Generator) -> RealizationSample:
    targets = sample_targets(cfg, rng, cfg.num_cus, cfg.num_d2d_pairs)
    topo = sample_topology(cfg, rng)
    ch = realize_channels(topo, cfg, rng)
    if cfg.condition_cu_feasible:
        targets, topo, ch = _condition_cus(cfg, rng, targets, topo, ch)
    outcomes = {
        "proposed": allocate(build_candidates(ch, targets, cfg)),
        "baseline": baseline_allocate(ch, targets, cfg),
    }
    return RealizationSample(targets, topo, ch, outcomes)


def run_realization(cfg: ScenarioConfig, index: int) -> dict[str, RealizationMetrics]:
    s = simulate_realization(cfg, realization_rng(cfg.master_seed, index))
    return {
        name: compute_metrics(o.assignment, o.cu_powers, o.d2d_powers, s.channel, s.targets, cfg)
        for name, o in s.outcomes.items()
    }


def _run_chunk(cfg: ScenarioConfig, indices: Sequence[int]) -> np.ndarray:
    """Metric table of shape (len(indices), len(SCHEMES), len(METRIC_COLUMNS))."""
    out = np.empty((len(indices), len(SCHEMES), len(METRIC_COLUMNS)))
    for row, k in enumerate(indices):
        res = run_realization(cfg, k)
        for s, name in enumerate(SCHEMES):
            inc = res[name].increases()
            out[row, s] = [inc[c] for c in METRIC_COLUMNS]
    return out


@dataclass(frozen=True)
class MonteCarloResult:
    realizations: int
    master_seed: int
    samples: np.ndarray = field(repr=False)   # (R, schemes, metrics)

    def mean(self, scheme: str) -> dict[str, float]:
        s = SCHEMES.index(scheme)
        return dict(zip(METRIC_COLUMNS, map(float, self.samples[:, s].mean(axis=0))))

    def std(self, scheme: str) -> dict[str, float]:
        s = SCHEMES.index(scheme)
        if self.realizations < 2:
            return dict.fromkeys(METRIC_COLUMNS, 0.0)
        return dict(zip(METRIC_COLUMNS, map(float, self.samples[:, s].std(axis=0, ddof=1))))


def default_workers() -> int:
    return os.cpu_count() or 1


def run_monte_carlo(cfg: ScenarioConfig, overrides: Mapping | None = None, *,
                    workers: int = 1, progress: Callable[[int, int], None] | None = None) -> MonteCarloResult:
    """Average every metric over ``cfg.num_realizations`` realizations."""
    if overrides:
        cfg = cfg.with_overrides(**overrides)
    cfg = validate(cfg)
    n = cfg.num_realizations
    workers = max(1, min(int(workers), n))
    chunk = max(1, min(250, math.ceil(n / workers)))
    starts = range(0, n, chunk)
    idx = [range(a, min(a + chunk, n)) for a in starts]
    parts = []
    if workers == 1:
        for r in idx:
            parts.append(_run_chunk(cfg, r))
            if progress:
                progress(r.stop, n)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for r, part in zip(idx, pool.map(_run_chunk, [cfg] * len(idx), idx)):
                parts.append(part)
                if progress:
                    progress(r.stop, n)
    return MonteCarloResult(n, cfg.master_seed, np.concatenate(parts, axis=0))


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    config: ScenarioConfig | None
    result: MonteCarloResult | None
    error: str | None = None


@dataclass(frozen=True)
class SweepResult:
    axis: str
    rows: list[SweepRow]
    realizations: int
    master_seed: int

    def series(self, scheme: str, column: str) -> np.ndarray:
        """Mean ``column`` per successful axis value, in axis order."""
        return np.array([r.result.mean(scheme)[column] for r in self.rows if r.result is not None])


def axis_config(cfg: ScenarioConfig, axis: str, value: float) -> ScenarioConfig:
    if axis == "cluster_radius":
        return cfg.with_overrides(cluster_radius_m=float(value))
    if axis == "d2d_fraction":
        return cfg.with_overrides(num_d2d_pairs=int(math.floor(value * cfg.num_cus + 0.5)))
    raise ValueError(f"unknown sweep axis {axis!r}; expected one of {sorted(AXES)}")


def sweep(cfg: ScenarioConfig, axis: str, values: Iterable[float], *, workers: int = 1,
          progress: Callable[[int, int], None] | None = None) -> SweepResult:
    values = [float(v) for v in values]
    if axis not in AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {sorted(AXES)}")
    if not values or any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError("sweep values must be non-empty and strictly increasing")
    rows = []
    for v in values:
        try:
            point = axis_config(cfg, axis, v)
        except ConfigError as exc:
            rows.append(SweepRow(v, None, None, str(exc)))
            continue
        rows.append(SweepRow(v, point, run_monte_carlo(point, workers=workers, progress=progress)))
    return SweepResult(axis, rows, cfg.num_realizations, cfg.master_seed)


def single_point(cfg: ScenarioConfig, result: MonteCarloResult) -> SweepResult:
    """Wrap one Monte Carlo run as a one-row result on the cluster-radius axis."""
    return SweepResult("cluster_radius", [SweepRow(cfg.cluster_radius_m, cfg, result)],
                       result.realizations, result.master_seed)


def _num(x: float) -> str:
    return repr(float(x))


def format_csv(result: SweepResult, cfg: ScenarioConfig, schemes: Sequence[str] = SCHEMES) -> str:
    """CSV text: '#' comment lines (axis, resolved config, row errors),
    a header row, then one row per (axis value, scheme) in axis order."""
    buf = io.StringIO()
    buf.write(f"# axis={result.axis}\n")
    buf.write(f"# config: {cfg.resolved_summary()}\n")
    for r in result.rows:
        if r.error:
            buf.write(f"# error at axis={_num(r.axis_value)}: {r.error}\n")
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for r in result.rows:
        if r.result is None:
            continue
        for scheme in schemes:
            mean, std = r.result.mean(scheme), r.result.std(scheme)
            cells = [_num(r.axis_value), scheme, str(r.result.realizations)]
            cells += [_num(mean[c]) for c in METRIC_COLUMNS]
            cells += [_num(std[c]) for c in METRIC_COLUMNS]
            buf.write(",".join(cells) + "\n")
    return buf.getvalue()
