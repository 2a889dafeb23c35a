"""Single-cell topology: BS at the origin, area-uniform CUs, D2D clusters.

CU positions are uniform over the cell disk.  Cluster centers are uniform
in *distance* from the BS on [0, R] (not over area), and each D2D endpoint
is area-uniform in its cluster disk.  The two radial laws differ on purpose.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ScenarioConfig

MAX_RESAMPLE_ATTEMPTS = 1000


@dataclass(frozen=True)
class Topology:
    cu_positions: np.ndarray      # (N, 2) meters
    cluster_centers: np.ndarray   # (M, 2)
    d2d_tx_positions: np.ndarray  # (M, 2)
    d2d_rx_positions: np.ndarray  # (M, 2)

    @property
    def num_cus(self) -> int:
        return len(self.cu_positions)

    @property
    def num_d2d_pairs(self) -> int:
        return len(self.d2d_tx_positions)


@dataclass(frozen=True)
class LinkDistances:
    """Floored link lengths feeding the four gain families."""

    cu_bs: np.ndarray    # (N,)  L_{i,B}
    d2d: np.ndarray      # (M,)  L_j, Tx_j -> Rx_j
    d2d_bs: np.ndarray   # (M,)  L_{j,B}, Tx_j -> BS
    cu_d2d: np.ndarray   # (N, M) L_{i,j}, CU_i -> Rx_j


def distance(a, b, min_link_distance_m: float | None = None) -> float:
    """Euclidean distance, optionally floored when used as a link length."""
    d = math.hypot(float(a[0]) - float(b[0]), float(a[1]) - float(b[1]))
    if min_link_distance_m is not None:
        d = max(d, min_link_distance_m)
    return d


def pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    diff = a[:, None, :] - b[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def _polar(rng: np.random.Generator, radii: np.ndarray) -> np.ndarray:
    theta = rng.uniform(0.0, 2.0 * np.pi, size=radii.shape)
    return np.column_stack((radii * np.cos(theta), radii * np.sin(theta)))


def sample_disk(rng: np.random.Generator, n: int, radius: float, center=(0.0, 0.0)) -> np.ndarray:
    """``n`` points uniform over the area of a disk."""
    radii = radius * np.sqrt(rng.uniform(0.0, 1.0, size=n))
    return _polar(rng, radii) + np.asarray(center, dtype=float)


def sample_cluster_centers(rng: np.random.Generator, n: int, cell_radius: float) -> np.ndarray:
    """``n`` points whose distance from the origin is Uniform[0, R]."""
    return _polar(rng, rng.uniform(0.0, cell_radius, size=n))


def cu_positions_ok(points: np.ndarray, rx_positions: np.ndarray, dmin: float) -> np.ndarray:
    """Mask of candidate CU positions clear of the BS and every D2D receiver."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    ok = np.hypot(*points.T) >= dmin
    if len(rx_positions):
        ok &= pairwise_distances(points, rx_positions).min(axis=1) >= dmin
    return ok


def sample_topology(cfg: ScenarioConfig, rng: np.random.Generator) -> Topology:
    n, m, dmin = cfg.num_cus, cfg.num_d2d_pairs, cfg.min_link_distance_m
    cus = sample_disk(rng, n, cfg.cell_radius_m)
    centers = sample_cluster_centers(rng, m, cfg.cell_radius_m)
    tx = centers + sample_disk(rng, m, cfg.cluster_radius_m)
    rx = centers + sample_disk(rng, m, cfg.cluster_radius_m)

    for i in range(n):
        for _ in range(MAX_RESAMPLE_ATTEMPTS):
            if math.hypot(*cus[i]) >= dmin:
                break
            cus[i] = sample_disk(rng, 1, cfg.cell_radius_m)[0]

    for j in range(m):
        for _ in range(MAX_RESAMPLE_ATTEMPTS):
            near_rx = np.min(np.hypot(*(cus - rx[j]).T)) if n else np.inf
            if (math.hypot(*(tx[j] - rx[j])) >= dmin
                    and math.hypot(*tx[j]) >= dmin
                    and near_rx >= dmin):
                break
            tx[j] = sample_disk(rng, 1, cfg.cluster_radius_m, centers[j])[0]
            rx[j] = sample_disk(rng, 1, cfg.cluster_radius_m, centers[j])[0]

    return Topology(cus, centers, tx, rx)


def link_distances(topo: Topology, min_link_distance_m: float) -> LinkDistances:
    floor = min_link_distance_m
    return LinkDistances(
        cu_bs=np.maximum(np.hypot(*topo.cu_positions.T), floor),
        d2d=np.maximum(np.hypot(*(topo.d2d_tx_positions - topo.d2d_rx_positions).T), floor),
        d2d_bs=np.maximum(np.hypot(*topo.d2d_tx_positions.T), floor),
        cu_d2d=np.maximum(pairwise_distances(topo.cu_positions, topo.d2d_rx_positions), floor),
    )


def topology_rows(topo: Topology) -> list[tuple[str, int, float, float]]:
    rows = [("bs", 0, 0.0, 0.0)]
    for role, pts in (("cu", topo.cu_positions), ("cluster", topo.cluster_centers),
                      ("d2d_tx", topo.d2d_tx_positions), ("d2d_rx", topo.d2d_rx_positions)):
        rows.extend((role, k, float(x), float(y)) for k, (x, y) in enumerate(pts))
    return rows


def write_topology_csv(topo: Topology, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(("role", "index", "x_m", "y_m"))
        w.writerows(topology_rows(topo))
