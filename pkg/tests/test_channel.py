import math

import numpy as np
import pytest

from d2d_underlay.channel import link_gain, realize_channels, sample_fast_fading, sample_slow_fading
from d2d_underlay.config import ScenarioConfig
from d2d_underlay.geometry import Topology, link_distances, sample_topology


def test_fast_fading_moments():
    x = sample_fast_fading(np.random.default_rng(0), 1_000_000)
    assert np.all(x > 0)
    assert x.mean() == pytest.approx(1.0, abs=0.01)
    assert x.var() == pytest.approx(1.0, abs=0.02)


def test_slow_fading_unit_mean_and_median():
    x = sample_slow_fading(8.0, np.random.default_rng(1), 1_000_000)
    assert x.mean() == pytest.approx(1.0, abs=0.02)
    # median of the log-normal is exp(mu), mu = -s^2/2, s = 8 ln10 / 10
    s = 8 * math.log(10) / 10
    assert np.median(x) == pytest.approx(math.exp(-s * s / 2), rel=0.01)
    assert math.exp(-s * s / 2) == pytest.approx(0.18330, abs=1e-5)


def test_slow_fading_dB_spread():
    x = sample_slow_fading(8.0, np.random.default_rng(2), 200_000)
    assert np.std(10 * np.log10(x)) == pytest.approx(8.0, rel=0.01)


def test_slow_fading_degenerate():
    assert np.all(sample_slow_fading(0.0, np.random.default_rng(0), 10) == 1.0)


@pytest.mark.parametrize("beta, zeta, L, expected", [(1, 1, 10, 1e-6), (2, 0.5, 10, 1e-6), (1, 1, 100, 1e-10)])
def test_link_gain(beta, zeta, L, expected):
    assert link_gain(1e-2, beta, zeta, L, 4) == pytest.approx(expected, rel=1e-12)


def test_link_gain_rejects_non_positive_distance():
    with pytest.raises(ValueError):
        link_gain(1e-2, 1, 1, 0.0, 4)


def test_realize_channels_shapes_and_positivity():
    cfg = ScenarioConfig()
    rng = np.random.default_rng(0)
    topo = sample_topology(cfg, rng)
    ch = realize_channels(topo, cfg, rng)
    assert ch.g_cu_bs.shape == (20,)
    assert ch.g_d2d.shape == ch.h_d2d_bs.shape == (10,)
    assert ch.h_cu_d2d.shape == (20, 10) and ch.h_cu_d2d.size == 200
    for g in (ch.g_cu_bs, ch.g_d2d, ch.h_d2d_bs, ch.h_cu_d2d):
        assert np.all(np.isfinite(g)) and np.all(g > 0)


def test_determinism():
    cfg = ScenarioConfig()
    topo = sample_topology(cfg, np.random.default_rng(0))
    a = realize_channels(topo, cfg, np.random.default_rng(9))
    b = realize_channels(topo, cfg, np.random.default_rng(9))
    for f in ("g_cu_bs", "g_d2d", "h_d2d_bs", "h_cu_d2d"):
        assert np.array_equal(getattr(a, f), getattr(b, f))


def test_no_fading_is_pure_path_loss():
    cfg = ScenarioConfig()
    topo = sample_topology(cfg, np.random.default_rng(4))
    ch = realize_channels(topo, cfg, np.random.default_rng(0), fading=False)
    d = link_distances(topo, cfg.min_link_distance_m)
    order = np.argsort(d.cu_bs)
    assert np.all(np.diff(ch.g_cu_bs[order]) < 0)
    # gain ratio is the inverse distance ratio to the alpha
    assert ch.g_cu_bs[0] / ch.g_cu_bs[1] == pytest.approx((d.cu_bs[1] / d.cu_bs[0]) ** 4, rel=1e-12)
    assert np.allclose(ch.h_cu_d2d, 1e-2 * d.cu_d2d ** -4.0, rtol=1e-12)


def test_links_fade_independently():
    # two CUs at the same spot: identical path loss, distinct fading draws
    cfg = ScenarioConfig(num_cus=2, num_d2d_pairs=1)
    topo = Topology(np.array([[100.0, 0.0], [100.0, 0.0]]), np.array([[0.0, 200.0]]),
                    np.array([[0.0, 200.0]]), np.array([[10.0, 200.0]]))
    ch = realize_channels(topo, cfg, np.random.default_rng(0))
    assert ch.g_cu_bs[0] != ch.g_cu_bs[1]
    assert ch.h_cu_d2d[0, 0] != ch.h_cu_d2d[1, 0]


def test_mean_gain_matches_path_loss():
    # many CUs at one spot = many independent fading draws on one geometry
    n = 2_000_000
    cfg = ScenarioConfig(num_cus=n, num_d2d_pairs=1)
    topo = Topology(np.tile([100.0, 0.0], (n, 1)), np.array([[0.0, 200.0]]),
                    np.array([[0.0, 200.0]]), np.array([[10.0, 200.0]]))
    ch = realize_channels(topo, cfg, np.random.default_rng(6))
    assert ch.g_cu_bs.mean() == pytest.approx(1e-2 * 100.0 ** -4, rel=0.02)
