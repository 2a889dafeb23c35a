import numpy as np
import pytest

from d2d_underlay.config import ScenarioConfig
from d2d_underlay.geometry import (
    distance, link_distances, sample_cluster_centers, sample_disk, sample_topology, topology_rows,
)


def ks_uniform(x):
    """Kolmogorov-Smirnov statistic of ``x`` against Uniform[0, 1]."""
    x = np.sort(x)
    n = len(x)
    i = np.arange(1, n + 1)
    return max(np.max(i / n - x), np.max(x - (i - 1) / n))


def test_distance():
    assert distance((0, 0), (3, 4)) == 5
    assert distance((1, 1), (1, 1), min_link_distance_m=1.0) == 1.0
    assert distance((0, 0), (0.5, 0), min_link_distance_m=1.0) == 1.0
    assert distance((0, 0), (0.5, 0)) == 0.5


def test_containment():
    cfg = ScenarioConfig(cell_radius_m=500.0, cluster_radius_m=20.0, num_cus=20, num_d2d_pairs=10)
    rng = np.random.default_rng(3)
    for _ in range(50):
        t = sample_topology(cfg, rng)
        assert t.cu_positions.shape == (20, 2)
        assert np.all(np.hypot(*t.cu_positions.T) <= 500.0)
        assert np.all(np.hypot(*t.cluster_centers.T) <= 500.0)
        assert np.all(np.hypot(*(t.d2d_tx_positions - t.cluster_centers).T) <= 20.0)
        assert np.all(np.hypot(*(t.d2d_rx_positions - t.cluster_centers).T) <= 20.0)


def test_cluster_center_mean_distance():
    # mean of Uniform[0, R] is R/2
    c = sample_cluster_centers(np.random.default_rng(0), 100_000, 500.0)
    assert np.hypot(*c.T).mean() == pytest.approx(250.0, abs=2.0)


def test_cu_positions_area_uniform():
    p = sample_disk(np.random.default_rng(1), 100_000, 500.0)
    assert ks_uniform((np.hypot(*p.T) / 500.0) ** 2) < 0.01


def test_cluster_centers_distance_uniform():
    c = sample_cluster_centers(np.random.default_rng(2), 100_000, 500.0)
    r = np.hypot(*c.T) / 500.0
    assert ks_uniform(r) < 0.01
    # and clearly not area-uniform
    assert ks_uniform(r ** 2) > 0.1


def test_determinism():
    cfg = ScenarioConfig()
    a = sample_topology(cfg, np.random.default_rng(11))
    b = sample_topology(cfg, np.random.default_rng(11))
    for f in ("cu_positions", "cluster_centers", "d2d_tx_positions", "d2d_rx_positions"):
        assert np.array_equal(getattr(a, f), getattr(b, f))


def test_link_distances_respect_floor():
    cfg = ScenarioConfig(cell_radius_m=30.0, cluster_radius_m=5.0, num_cus=40, num_d2d_pairs=20,
                         min_link_distance_m=2.0)
    rng = np.random.default_rng(5)
    for _ in range(20):
        d = link_distances(sample_topology(cfg, rng), cfg.min_link_distance_m)
        assert d.cu_d2d.shape == (40, 20)
        for arr in (d.cu_bs, d.d2d, d.d2d_bs, d.cu_d2d):
            assert np.all(arr >= 2.0)


def test_zero_pairs():
    t = sample_topology(ScenarioConfig(num_d2d_pairs=0), np.random.default_rng(0))
    assert t.d2d_tx_positions.shape == (0, 2)
    assert link_distances(t, 1.0).cu_d2d.shape == (20, 0)


def test_topology_rows():
    t = sample_topology(ScenarioConfig(num_cus=3, num_d2d_pairs=2), np.random.default_rng(0))
    rows = topology_rows(t)
    assert len(rows) == 1 + 3 + 3 * 2
    assert rows[0] == ("bs", 0, 0.0, 0.0)
