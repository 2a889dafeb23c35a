"""Scenario parameters, unit conversion and validation.

Everything downstream of :func:`validate` works in one linear unit system:
milliwatts for power, meters for distance, Hz for bandwidth and plain
ratios for gains and SINR targets.  Quantities that are genuinely
logarithmic (the SINR target draw range, the shadowing spread and the
baseline margin) keep a ``_db`` suffix and are only turned into linear
factors through the helpers on :class:`ScenarioConfig`.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping, NewType

Db = NewType("Db", float)
Dbm = NewType("Dbm", float)
MilliWatt = NewType("MilliWatt", float)

BASELINE_D2D_POWER_MODES = ("minimum", "cap")


class ConfigError(ValueError):
    """Raised when a scenario violates one or more invariants.

    ``errors`` holds one ``"field: message"`` entry per violation.
    """

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid scenario config: " + "; ".join(self.errors))


def _check_finite(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"expected a finite level, got {x!r}")
    return x


def dbm_to_linear(x: Dbm) -> MilliWatt:
    return MilliWatt(10.0 ** (_check_finite(x) / 10.0))


def db_to_linear(x: Db) -> float:
    return 10.0 ** (_check_finite(x) / 10.0)


def linear_to_dbm(p: MilliWatt) -> Dbm:
    p = _check_finite(p)
    if p <= 0:
        raise ValueError(f"power must be positive to express in dBm, got {p!r}")
    return Dbm(10.0 * math.log10(p))


def linear_to_db(x: float) -> Db:
    x = _check_finite(x)
    if x <= 0:
        raise ValueError(f"ratio must be positive to express in dB, got {x!r}")
    return Db(10.0 * math.log10(x))


@dataclass(frozen=True)
class ScenarioConfig:
    """One simulated cell.  Defaults are the simulation table of the model
    (R = 0.5 km, N = 20, M = 10, -114 dBm noise, 24 dBm power caps)."""

    cell_radius_m: float = 500.0
    cluster_radius_m: float = 60.0
    num_cus: int = 20
    num_d2d_pairs: int = 10
    uplink_bandwidth_hz: float = 5e6
    noise_power_linear: float = 10.0 ** (-114 / 10)
    pathloss_exponent: float = 4.0
    pathloss_constant: float = 1e-2
    p_max_cu_linear: float = 10.0 ** (24 / 10)
    p_max_d2d_linear: float = 10.0 ** (24 / 10)
    sinr_target_range_db: tuple[float, float] = (0.0, 25.0)
    shadowing_sigma_db: float = 8.0
    margin_k_db: float = 1.0
    num_realizations: int = 10_000
    master_seed: int = 20140601
    min_link_distance_m: float = 1.0
    # Redraw any CU that cannot meet its own target alone at P_max^c.
    condition_cu_feasible: bool = True
    # Baseline interpretation switches.
    baseline_margin_all_cus: bool = True
    baseline_d2d_power: str = "minimum"

    @property
    def channel_bandwidth_hz(self) -> float:
        return self.uplink_bandwidth_hz / self.num_cus

    @property
    def margin_k_linear(self) -> float:
        return db_to_linear(Db(self.margin_k_db))

    @property
    def shadowing_sigma_neper(self) -> float:
        """Std of the natural-log shadowing exponent (power-gain dB convention)."""
        return self.shadowing_sigma_db * math.log(10.0) / 10.0

    def with_overrides(self, **changes: Any) -> "ScenarioConfig":
        return validate(replace(self, **changes))

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["sinr_target_range_db"] = list(self.sinr_target_range_db)
        return d

    def resolved_summary(self) -> str:
        """Single line ``key=value`` dump of the resolved linear parameters."""
        return " ".join(f"{k}={_fmt(v)}" for k, v in self.to_dict().items())


def _fmt(v: Any) -> str:
    if isinstance(v, list):
        return "[" + ",".join(_fmt(x) for x in v) + "]"
    if isinstance(v, float):
        return repr(v)
    return str(v)


_POSITIVE = (
    "cell_radius_m", "cluster_radius_m", "num_cus", "uplink_bandwidth_hz",
    "noise_power_linear", "pathloss_exponent", "pathloss_constant",
    "p_max_cu_linear", "p_max_d2d_linear", "shadowing_sigma_db",
    "num_realizations", "min_link_distance_m",
)


def validate(cfg: ScenarioConfig) -> ScenarioConfig:
    """Check every invariant and return ``cfg``; raise :class:`ConfigError`
    naming each offending field otherwise."""
    errors = []
    for name in _POSITIVE:
        v = getattr(cfg, name)
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v) or v <= 0:
            errors.append(f"{name}: must be a finite positive number, got {v!r}")
    for name in ("num_cus", "num_d2d_pairs", "num_realizations"):
        v = getattr(cfg, name)
        if isinstance(v, bool) or not isinstance(v, int):
            errors.append(f"{name}: must be an integer, got {v!r}")
    if isinstance(cfg.num_d2d_pairs, int) and cfg.num_d2d_pairs < 0:
        errors.append(f"num_d2d_pairs: must be >= 0, got {cfg.num_d2d_pairs!r}")
    if not errors and cfg.cluster_radius_m >= cfg.cell_radius_m:
        errors.append(
            f"cluster_radius_m: must be < cell_radius_m ({cfg.cluster_radius_m!r} >= {cfg.cell_radius_m!r})"
        )
    rng = cfg.sinr_target_range_db
    if len(rng) != 2 or not all(math.isfinite(x) for x in rng):
        errors.append(f"sinr_target_range_db: expected two finite dB values, got {rng!r}")
    elif rng[0] > rng[1]:
        errors.append(f"sinr_target_range_db: lo > hi ({rng[0]!r} > {rng[1]!r})")
    if not math.isfinite(cfg.margin_k_db) or cfg.margin_k_db <= 0:
        errors.append(f"margin_k_db: must be > 0 dB, got {cfg.margin_k_db!r}")
    if not isinstance(cfg.master_seed, int) or not 0 <= cfg.master_seed < 2**64:
        errors.append(f"master_seed: must be a 64-bit unsigned integer, got {cfg.master_seed!r}")
    if cfg.baseline_d2d_power not in BASELINE_D2D_POWER_MODES:
        errors.append(
            f"baseline_d2d_power: must be one of {BASELINE_D2D_POWER_MODES}, got {cfg.baseline_d2d_power!r}"
        )
    if errors:
        raise ConfigError(errors)
    return cfg


# Keys accepted in config files besides the field names; converted here, once.
_DBM_ALIASES = {
    "noise_power_dbm": "noise_power_linear",
    "p_max_cu_dbm": "p_max_cu_linear",
    "p_max_d2d_dbm": "p_max_d2d_linear",
}
_FIELD_NAMES = {f.name for f in fields(ScenarioConfig)}


def from_mapping(data: Mapping[str, Any], base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Build a validated config from a flat mapping of field names.

    The ``*_dbm`` aliases are converted to milliwatts at this boundary.
    Unknown keys, or a field given both ways, are reported as errors.
    """
    errors = []
    changes: dict[str, Any] = {}
    for key, value in data.items():
        if key in _DBM_ALIASES:
            target = _DBM_ALIASES[key]
            if target in data:
                errors.append(f"{key}: conflicts with {target}")
                continue
            try:
                changes[target] = dbm_to_linear(Dbm(value))
            except (TypeError, ValueError) as exc:
                errors.append(f"{key}: {exc}")
        elif key in _FIELD_NAMES:
            changes[key] = tuple(value) if key == "sinr_target_range_db" else value
        else:
            errors.append(f"{key}: unknown config key")
    try:
        cfg = validate(replace(base or ScenarioConfig(), **changes))
    except ConfigError as exc:
        errors.extend(exc.errors)
    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(path: str | Path) -> ScenarioConfig:
    """Read a JSON config file (a single flat object)."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError(["<root>: config file must hold a JSON object"])
    return from_mapping(data)


def dump_config(cfg: ScenarioConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2) + "\n"


def save_config(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(dump_config(cfg), encoding="utf-8")
