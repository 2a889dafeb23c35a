import math

import numpy as np
import pytest

from d2d_underlay.channel import ChannelRealization
from d2d_underlay.config import ScenarioConfig
from d2d_underlay.matching import Assignment
from d2d_underlay.power import SinrTargets, min_power_exclusive
from d2d_underlay.sim import (
    CSV_COLUMNS, METRIC_COLUMNS, SCHEMES, axis_config, compute_metrics, format_csv, realization_rng,
    run_monte_carlo, run_realization, simulate_realization, single_point, sweep,
)


def small(**kw):
    return ScenarioConfig(num_realizations=kw.pop("num_realizations", 20), **kw)


def test_no_matches_leaves_metrics_unchanged():
    cfg = ScenarioConfig(num_cus=2, num_d2d_pairs=3)
    ch = ChannelRealization(np.array([1e-6, 2e-6]), np.ones(3), np.ones(3), np.ones((2, 3)))
    t = SinrTargets(np.array([2.0, 5.0]), np.ones(3))
    p_min = min_power_exclusive(t.cu_targets, ch.g_cu_bs, cfg.noise_power_linear)
    m = compute_metrics(Assignment(), p_min, np.zeros(3), ch, t, cfg)
    assert m.access_ratio == 0.0
    assert m.power_with_d2d == m.power_no_d2d
    assert m.throughput_with_d2d == m.throughput_no_d2d
    assert m.ee_with_d2d == m.ee_no_d2d
    assert all(v == 0 for v in m.increases().values())


def test_access_ratio_counts_matches():
    cfg = ScenarioConfig(num_cus=10, num_d2d_pairs=10)
    ch = ChannelRealization(np.ones(10), np.ones(10), np.zeros(10), np.zeros((10, 10)))
    t = SinrTargets(np.ones(10), np.ones(10))
    p = min_power_exclusive(1.0, 1.0, cfg.noise_power_linear)
    d2d = np.zeros(10)
    d2d[:7] = p
    asg = Assignment([(k, k) for k in range(7)], 0.0, [7])
    m = compute_metrics(asg, np.full(10, p), d2d, ch, t, cfg)
    assert m.access_ratio == 0.7
    assert m.admissible_ratio == 0.8


def test_single_pair_rate_gain():
    # decoupled links at equality give SINR exactly 3, so the gain is W*log2(4) = 2W
    cfg = ScenarioConfig(num_cus=20, num_d2d_pairs=1, noise_power_linear=1.0)
    assert cfg.channel_bandwidth_hz == 250e3
    ch = ChannelRealization(np.ones(20), np.ones(1), np.zeros(1), np.zeros((20, 1)))
    t = SinrTargets(np.ones(20), np.array([3.0]))
    m = compute_metrics(Assignment([(0, 0)], 3.0, []), np.ones(20), np.array([3.0]), ch, t, cfg)
    assert m.throughput_with_d2d - m.throughput_no_d2d == pytest.approx(500e3, rel=1e-12)


def test_same_seed_same_realization():
    cfg = ScenarioConfig()
    a = run_realization(cfg, 7)
    b = run_realization(cfg, 7)
    assert a == b
    assert a != run_realization(cfg, 8)


def test_no_d2d_pairs():
    cfg = small(num_d2d_pairs=0)
    for name, m in run_realization(cfg, 0).items():
        assert m.access_ratio == 0.0
        assert all(v == 0 for v in m.increases().values())
    res = run_monte_carlo(cfg)
    assert np.all(res.samples == 0)


def test_one_realization_equals_run_realization():
    cfg = small(num_realizations=1)
    res = run_monte_carlo(cfg)
    direct = run_realization(cfg, 0)
    for s in SCHEMES:
        assert res.mean(s) == pytest.approx(direct[s].increases(), rel=0, abs=0)
        assert res.std(s) == dict.fromkeys(METRIC_COLUMNS, 0.0)


def test_realization_invariants():
    cfg = ScenarioConfig()
    for k in range(40):
        s = simulate_realization(cfg, realization_rng(cfg.master_seed, k))
        p_min = min_power_exclusive(s.targets.cu_targets, s.channel.g_cu_bs, cfg.noise_power_linear)
        assert np.all(p_min <= cfg.p_max_cu_linear)   # conditioning keeps the D2D-free cell feasible
        for name, o in s.outcomes.items():
            m = compute_metrics(o.assignment, o.cu_powers, o.d2d_powers, s.channel, s.targets, cfg)
            assert 0 <= m.access_ratio <= m.admissible_ratio <= 1
            assert m.power_with_d2d >= m.power_no_d2d
            assert m.throughput_with_d2d >= m.throughput_no_d2d
            assert all(math.isfinite(v) for v in m.increases().values())
            assert set(o.assignment.matched_d2d).isdisjoint(o.assignment.unmatched_d2d)


def test_monte_carlo_means_bounded():
    res = run_monte_carlo(small(num_realizations=30))
    for s in SCHEMES:
        assert 0 <= res.mean(s)["access_ratio"] <= 1
        assert res.samples.shape == (30, len(SCHEMES), len(METRIC_COLUMNS))


def test_workers_do_not_change_results():
    cfg = small(num_realizations=12)
    a = run_monte_carlo(cfg, workers=1)
    b = run_monte_carlo(cfg, workers=3)
    assert np.array_equal(a.samples, b.samples)


def test_progress_reaches_total():
    seen = []
    run_monte_carlo(small(num_realizations=5), progress=lambda d, t: seen.append((d, t)))
    assert seen[-1] == (5, 5)


def test_overrides():
    res = run_monte_carlo(small(), {"num_d2d_pairs": 0})
    assert np.all(res.samples == 0)


def test_radius_sweep_rows():
    cfg = small(num_realizations=3)
    res = sweep(cfg, "cluster_radius", range(20, 101, 10))
    assert [r.axis_value for r in res.rows] == [20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0]
    assert all(r.result is not None for r in res.rows)
    assert res.rows[0].config.cluster_radius_m == 20.0


def test_density_axis_counts():
    cfg = ScenarioConfig(num_cus=20)
    ms = [axis_config(cfg, "d2d_fraction", f / 10).num_d2d_pairs for f in range(1, 11)]
    assert ms == [2, 4, 6, 8, 10, 12, 14, 16, 18, 20]
    assert axis_config(ScenarioConfig(num_cus=5), "d2d_fraction", 0.5).num_d2d_pairs == 3


def test_single_value_sweep_equals_run():
    cfg = small(num_realizations=4)
    res = sweep(cfg, "cluster_radius", [60])
    assert len(res.rows) == 1
    assert np.array_equal(res.rows[0].result.samples, run_monte_carlo(cfg).samples)


def test_invalid_axis_value_is_a_row_error():
    cfg = small(num_realizations=2)
    res = sweep(cfg, "cluster_radius", [-5, 60])
    assert res.rows[0].result is None and "cluster_radius_m" in res.rows[0].error
    assert res.rows[1].result is not None
    text = format_csv(res, cfg)
    assert "# error at axis=-5.0" in text
    assert len([l for l in text.splitlines() if not l.startswith("#")]) == 1 + len(SCHEMES)


def test_sweep_rejects_bad_values():
    with pytest.raises(ValueError):
        sweep(small(), "cluster_radius", [60, 50])
    with pytest.raises(ValueError):
        sweep(small(), "cluster_radius", [])
    with pytest.raises(ValueError):
        sweep(small(), "speed", [1])


def test_csv_layout():
    cfg = small(num_realizations=3)
    text = format_csv(single_point(cfg, run_monte_carlo(cfg)), cfg)
    lines = text.splitlines()
    assert lines[0] == "# axis=cluster_radius"
    assert lines[1].startswith("# config: ")
    assert lines[2].split(",") == list(CSV_COLUMNS)
    rows = [l.split(",") for l in lines[3:]]
    assert [r[1] for r in rows] == list(SCHEMES)
    assert all(len(r) == len(CSV_COLUMNS) for r in rows)
    assert text == format_csv(single_point(cfg, run_monte_carlo(cfg)), cfg)
