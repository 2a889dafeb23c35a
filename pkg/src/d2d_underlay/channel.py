"""Link gains: path loss K * L^-alpha times i.i.d. fast and slow fading.

Every link gets its own exponential (unit mean) fast-fading draw and its
own log-normal (unit mean) shadowing draw; nothing is shared between links
or realizations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig
from .geometry import Topology, link_distances, pairwise_distances


@dataclass(frozen=True)
class ChannelRealization:
    g_cu_bs: np.ndarray   # (N,)   CU i -> BS
    g_d2d: np.ndarray     # (M,)   D2D Tx j -> Rx j
    h_d2d_bs: np.ndarray  # (M,)   D2D Tx j -> BS (interference)
    h_cu_d2d: np.ndarray  # (N, M) CU i -> D2D Rx j (interference)

    @property
    def shape(self) -> tuple[int, int]:
        return self.h_cu_d2d.shape


def sample_fast_fading(rng: np.random.Generator, size=None):
    return rng.exponential(1.0, size=size)


def sample_slow_fading(sigma_db: float, rng: np.random.Generator, size=None):
    """Log-normal shadowing with unit linear mean.

    ``sigma_db`` is the standard deviation of 10*log10(zeta), the power gain
    in dB.  The natural-log exponent has std s = sigma_db * ln(10) / 10 and
    mean -s^2/2, so that E[zeta] = 1.
    """
    if sigma_db < 0:
        raise ValueError(f"sigma_db must be >= 0, got {sigma_db!r}")
    s = sigma_db * np.log(10.0) / 10.0
    return np.exp(rng.normal(-0.5 * s * s, s, size=size))


def link_gain(K, beta, zeta, L_m, alpha):
    L_m = np.asarray(L_m, dtype=float)
    if np.any(L_m <= 0):
        raise ValueError("link distance must be strictly positive")
    g = K * np.asarray(beta) * np.asarray(zeta) * L_m ** (-alpha)
    return g if g.ndim else float(g)


def _gains(L: np.ndarray, cfg: ScenarioConfig, rng: np.random.Generator, fading: bool) -> np.ndarray:
    if fading:
        beta = sample_fast_fading(rng, L.shape)
        zeta = sample_slow_fading(cfg.shadowing_sigma_db, rng, L.shape)
    else:
        beta = zeta = np.ones(L.shape)
    return link_gain(cfg.pathloss_constant, beta, zeta, L, cfg.pathloss_exponent)


def realize_channels(topo: Topology, cfg: ScenarioConfig, rng: np.random.Generator,
                     *, fading: bool = True) -> ChannelRealization:
    """Draw one realization of all N + 2M + N*M link gains.

    ``fading=False`` forces beta = zeta = 1 (test hook).
    """
    d = link_distances(topo, cfg.min_link_distance_m)
    return ChannelRealization(
        g_cu_bs=np.atleast_1d(_gains(d.cu_bs, cfg, rng, fading)),
        g_d2d=np.atleast_1d(_gains(d.d2d, cfg, rng, fading)),
        h_d2d_bs=np.atleast_1d(_gains(d.d2d_bs, cfg, rng, fading)),
        h_cu_d2d=np.asarray(_gains(d.cu_d2d, cfg, rng, fading)).reshape(d.cu_d2d.shape),
    )


def cu_link_gains(positions: np.ndarray, topo: Topology, cfg: ScenarioConfig,
                  rng: np.random.Generator, *, fading: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Fresh gains for CUs placed at ``positions`` (k, 2): uplink gains to
    the BS, shape (k,), and interference gains to every D2D receiver, (k, M)."""
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    dmin = cfg.min_link_distance_m
    L_bs = np.maximum(np.hypot(*positions.T), dmin)
    L_rx = np.maximum(pairwise_distances(positions, topo.d2d_rx_positions), dmin)
    g = np.asarray(_gains(L_bs, cfg, rng, fading)).reshape(L_bs.shape)
    h = np.asarray(_gains(L_rx, cfg, rng, fading)).reshape(L_rx.shape)
    return g, h
