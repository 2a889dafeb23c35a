"""Fixed-margin comparison scheme.

Each CU provisions a fixed SINR margin k up front, i.e. transmits
k * P_min.  That headroom tolerates up to (k - 1) * noise of extra
interference at the BS, so a D2D transmitter may reuse CU i's channel when
the power it needs to reach its own target stays below both its cap and
the interference allowance divided by its gain towards the BS.  Partners
are then picked by the same padded Hungarian assignment, weighted by the
total power increase over the margin-free reference.
"""

from __future__ import annotations

import numpy as np

from .channel import ChannelRealization
from .config import ScenarioConfig
from .matching import AllocationOutcome, solve_allocation
from .power import CandidateStructure, SinrTargets, min_power_exclusive

BaselineOutcome = AllocationOutcome


def interference_allowance(k_linear: float, noise: float) -> float:
    """Largest extra BS interference a CU with margin ``k_linear`` absorbs."""
    return (k_linear - 1.0) * noise


def baseline_candidates(ch: ChannelRealization, targets: SinrTargets, cfg: ScenarioConfig) -> CandidateStructure:
    noise = cfg.noise_power_linear
    k = cfg.margin_k_linear
    xi_c = np.asarray(targets.cu_targets, dtype=float)
    xi_d = np.asarray(targets.d2d_targets, dtype=float)

    p_min = min_power_exclusive(xi_c, ch.g_cu_bs, noise)
    p_margin = k * p_min
    cu_ok = p_margin <= cfg.p_max_cu_linear

    p_req = xi_d[None, :] * (noise + p_margin[:, None] * ch.h_cu_d2d) / ch.g_d2d[None, :]
    d2d_cap = np.minimum(cfg.p_max_d2d_linear, interference_allowance(k, noise) / ch.h_d2d_bs)
    mask = cu_ok[:, None] & (p_req <= d2d_cap[None, :])

    if cfg.baseline_d2d_power == "cap":
        p_d2d = np.broadcast_to(d2d_cap[None, :], mask.shape)
    else:
        p_d2d = p_req
    p_cu = np.broadcast_to(p_margin[:, None], mask.shape)
    return CandidateStructure(
        mask=mask,
        p_cu=np.where(mask, p_cu, np.nan),
        p_d2d=np.where(mask, p_d2d, np.nan),
        p_inc=np.where(mask, (p_cu - p_min[:, None]) + p_d2d, np.nan),
        p_min_exclusive=p_min,
    )


def baseline_allocate(ch: ChannelRealization, targets: SinrTargets, cfg: ScenarioConfig) -> BaselineOutcome:
    cand = baseline_candidates(ch, targets, cfg)
    asg = solve_allocation(cand)
    p_min = cand.p_min_exclusive
    if cfg.baseline_margin_all_cus and cand.num_d2d_pairs > 0:
        # A CU that cannot afford the full margin transmits at its cap and
        # is never offered to D2D pairs.  With no pairs in the cell there is
        # nothing to protect against, so no margin is provisioned.
        cu = np.minimum(cfg.margin_k_linear * p_min, np.maximum(cfg.p_max_cu_linear, p_min))
    else:
        cu = p_min.astype(float).copy()
    d2d = np.zeros(cand.num_d2d_pairs)
    for i, j in asg.matches:
        cu[i] = cand.p_cu[i, j]
        d2d[j] = cand.p_d2d[i, j]
    return BaselineOutcome(asg, cu, d2d, cand)
