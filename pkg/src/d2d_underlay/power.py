"""Minimum-power channel sharing between one CU and one D2D pair.

When D2D pair j reuses CU i's uplink channel, the two SINR constraints

    P_c g_iB / (noise + P_d h_jB) >= xi_c
    P_d g_j  / (noise + P_c h_ij) >= xi_d

have a unique componentwise-minimal solution with both met at equality,
provided D = g_j g_iB - xi_c xi_d h_ij h_jB > 0.  The pair is a sharing
candidate when that solution also respects both power caps (inclusive).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import ChannelRealization
from .config import ScenarioConfig


@dataclass(frozen=True)
class SinrTargets:
    cu_targets: np.ndarray   # (N,) linear
    d2d_targets: np.ndarray  # (M,) linear

    def __post_init__(self):
        if np.any(np.asarray(self.cu_targets) <= 0) or np.any(np.asarray(self.d2d_targets) <= 0):
            raise ValueError("SINR targets must be strictly positive")


class SharingPowers(NamedTuple):
    p_cu: float
    p_d2d: float


class Candidate(NamedTuple):
    powers: SharingPowers
    p_inc: float


def min_power_exclusive(xi_min, g, noise):
    """Power a CU needs to hit ``xi_min`` on an interference-free channel."""
    return xi_min * noise / g


def shared_min_powers_array(g_d2d, g_cu_bs, h_cu_d2d, h_d2d_bs, xi_cu, xi_d2d, noise):
    """Broadcasting form of :func:`shared_min_powers`.

    Returns ``(p_cu, p_d2d, feasible)``; entries where the determinant is
    not positive are NaN in both power arrays.
    """
    det = g_d2d * g_cu_bs - xi_cu * xi_d2d * h_cu_d2d * h_d2d_bs
    feasible = det > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(feasible, noise / np.where(feasible, det, 1.0), np.nan)
        p_cu = (g_d2d * xi_cu + h_d2d_bs * xi_cu * xi_d2d) * inv
        p_d2d = (h_cu_d2d * xi_cu * xi_d2d + g_cu_bs * xi_d2d) * inv
    return p_cu, p_d2d, feasible


def shared_min_powers(g_d2d, g_cu_bs, h_cu_d2d, h_d2d_bs, xi_cu, xi_d2d, noise) -> SharingPowers | None:
    """Minimum (P_c, P_d) meeting both SINR targets with equality, or
    ``None`` when no positive finite pair exists."""
    p_cu, p_d2d, ok = shared_min_powers_array(
        float(g_d2d), float(g_cu_bs), float(h_cu_d2d), float(h_d2d_bs),
        float(xi_cu), float(xi_d2d), float(noise))
    if not ok:
        return None
    return SharingPowers(float(p_cu), float(p_d2d))


def is_admissible(p: SharingPowers | None, p_max_cu: float, p_max_d2d: float) -> bool:
    if p is None:
        return False
    return 0 < p.p_cu <= p_max_cu and 0 < p.p_d2d <= p_max_d2d


def shared_sinrs(p_cu, p_d2d, g_d2d, g_cu_bs, h_cu_d2d, h_d2d_bs, noise):
    """Realized (CU SINR, D2D SINR) when the two share one channel."""
    return (p_cu * g_cu_bs / (noise + p_d2d * h_d2d_bs),
            p_d2d * g_d2d / (noise + p_cu * h_cu_d2d))


@dataclass(frozen=True)
class CandidateStructure:
    """All sharing candidates of one realization, in (N, M) matrix form.

    ``mask[i, j]`` is True when CU i is a candidate reuse partner of pair j;
    the power and weight matrices are NaN elsewhere.
    """

    mask: np.ndarray             # (N, M) bool
    p_cu: np.ndarray             # (N, M) mW
    p_d2d: np.ndarray            # (N, M) mW
    p_inc: np.ndarray            # (N, M) mW, (p_cu + p_d2d) - p_min_exclusive[i]
    p_min_exclusive: np.ndarray  # (N,)   mW

    @property
    def num_cus(self) -> int:
        return self.mask.shape[0]

    @property
    def num_d2d_pairs(self) -> int:
        return self.mask.shape[1]

    @property
    def admissible_set(self) -> list[int]:
        return [int(j) for j in np.flatnonzero(self.mask.any(axis=0))]

    @property
    def cu_union(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.mask.any(axis=1))]

    def candidates(self, j: int) -> dict[int, Candidate]:
        """The candidate set of pair ``j``: CU index -> powers and weight."""
        return {
            int(i): Candidate(SharingPowers(float(self.p_cu[i, j]), float(self.p_d2d[i, j])),
                              float(self.p_inc[i, j]))
            for i in np.flatnonzero(self.mask[:, j])
        }

    @classmethod
    def from_weights(cls, p_inc: np.ndarray, p_min_exclusive=None) -> "CandidateStructure":
        """Structure holding only weights (NaN = not a candidate); powers are
        left NaN.  Used to pose matching problems directly."""
        p_inc = np.asarray(p_inc, dtype=float)
        mask = ~np.isnan(p_inc)
        nan = np.full(p_inc.shape, np.nan)
        if p_min_exclusive is None:
            p_min_exclusive = np.zeros(p_inc.shape[0])
        return cls(mask, nan, nan.copy(), p_inc, np.asarray(p_min_exclusive, dtype=float))


def build_candidates(ch: ChannelRealization, targets: SinrTargets, cfg: ScenarioConfig) -> CandidateStructure:
    noise = cfg.noise_power_linear
    xi_c = np.asarray(targets.cu_targets, dtype=float)[:, None]
    xi_d = np.asarray(targets.d2d_targets, dtype=float)[None, :]
    p_min = min_power_exclusive(np.asarray(targets.cu_targets, dtype=float), ch.g_cu_bs, noise)

    p_cu, p_d2d, feasible = shared_min_powers_array(
        ch.g_d2d[None, :], ch.g_cu_bs[:, None], ch.h_cu_d2d, ch.h_d2d_bs[None, :], xi_c, xi_d, noise)
    with np.errstate(invalid="ignore"):
        mask = (feasible & (p_cu > 0) & (p_cu <= cfg.p_max_cu_linear)
                & (p_d2d > 0) & (p_d2d <= cfg.p_max_d2d_linear))
    p_cu = np.where(mask, p_cu, np.nan)
    p_d2d = np.where(mask, p_d2d, np.nan)
    p_inc = np.where(mask, (p_cu + p_d2d) - p_min[:, None], np.nan)
    return CandidateStructure(mask, p_cu, p_d2d, p_inc, p_min)
