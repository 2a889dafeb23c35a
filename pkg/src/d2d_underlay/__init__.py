"""Energy-efficient resource allocation for D2D underlay in a fully loaded
single-cell uplink: minimum-power channel sharing, optimal partner
assignment, and the Monte Carlo experiments comparing it with a
fixed-margin baseline."""

from .baseline import baseline_allocate
from .channel import ChannelRealization, realize_channels
from .config import ConfigError, ScenarioConfig, load_config, validate
from .geometry import Topology, sample_topology
from .matching import Assignment, allocate, hungarian, solve_allocation
from .power import CandidateStructure, SinrTargets, build_candidates, shared_min_powers
from .sim import run_monte_carlo, run_realization, sweep

__all__ = [
    "Assignment", "CandidateStructure", "ChannelRealization", "ConfigError",
    "ScenarioConfig", "SinrTargets", "Topology", "allocate", "baseline_allocate",
    "build_candidates", "hungarian", "load_config", "realize_channels",
    "run_monte_carlo", "run_realization", "sample_topology", "shared_min_powers",
    "solve_allocation", "sweep", "validate",
]
