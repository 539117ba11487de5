from __future__ import annotations

import math

import numpy as np
import pytest

from truncvar import closed_forms as cf
from truncvar import montecarlo as mc
from truncvar.errors import ParameterError
from truncvar.paths import ModelParams, SimConfig, generate_bm_path
from truncvar.variation import first_drawdown_time, max_drawup, utv_linear


def test_summarize():
    est = mc.summarize([1.0, 2.0, 3.0, 4.0], n_steps=10, seed=3)
    assert est.mean == 2.5
    assert est.std_error == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    assert (est.n_paths, est.n_steps, est.seed) == (4, 10, 3)
    with pytest.raises(ParameterError):
        mc.summarize([1.0], 1, 0)


def test_empirical_ccdf():
    np.testing.assert_allclose(mc.empirical_ccdf([1, 2, 3], [0, 2, 4]), [1, 2 / 3, 0])
    q = np.linspace(-3, 3, 50)
    vals = mc.empirical_ccdf(np.random.default_rng(0).normal(size=500), q)
    assert np.all(np.diff(vals) <= 0)
    with pytest.raises(ParameterError):
        mc.empirical_ccdf([], [1.0])


def test_estimators_are_deterministic_and_thread_independent():
    params = ModelParams(mu=0.5, c=0.7, horizon_T=1.5)
    sim = SimConfig(n_steps=200, n_paths=3000, seed=9)
    a = mc.estimate_expected_utv(params, sim)
    b = mc.estimate_expected_utv(params, sim, threads=4)
    assert a == b
    mc._sample_until_tc_cached.cache_clear()
    t1 = mc.estimate_expected_tc(params, sim)
    mc._sample_until_tc_cached.cache_clear()
    t4 = mc.estimate_expected_tc(params, sim, threads=3)
    assert t1 == t4


def test_batch_size_does_not_change_result(monkeypatch):
    params = ModelParams(mu=-0.2, c=0.5)
    sim = SimConfig(n_steps=100, n_paths=500, seed=1)
    a = mc.estimate_sup_functional(params, sim, "fixed_T")
    monkeypatch.setattr(mc, "_BATCH_ELEMENTS", 1_000)
    b = mc.estimate_sup_functional(params, sim, "fixed_T")
    assert a.mean == b.mean and a.std_error == b.std_error


def test_utv_estimator_matches_single_paths():
    params = ModelParams(mu=0.3, c=0.4, horizon_T=2.0)
    sim = SimConfig(n_steps=300, n_paths=40, seed=5)
    direct = [utv_linear(generate_bm_path(params, 300, 5, i), 0.4) for i in range(40)]
    assert mc.estimate_expected_utv(params, sim).mean == pytest.approx(math.fsum(direct) / 40, rel=1e-14)


def test_until_tc_samples_match_path_scan():
    params = ModelParams(mu=0.2, c=0.5)
    sim = SimConfig(n_steps=400, n_paths=20, seed=4)
    s = mc.sample_until_tc(params, sim)
    dt = s.dt
    for i in range(20):
        if s.capped[i]:
            continue
        k = int(round(s.tc[i] / dt))
        # regenerate the same stream over k steps
        horizon = k * dt
        w = generate_bm_path(params.replace(horizon_T=horizon), k, 4, i).values
        assert first_drawdown_time(w, 0.5) == k
        assert s.drawup[i] == pytest.approx(max_drawup(w), abs=1e-9)


def test_se_scaling():
    params = ModelParams(mu=0.0, c=0.5, horizon_T=1.0)
    small = mc.estimate_expected_utv(params, SimConfig(100, 1000, 3))
    big = mc.estimate_expected_utv(params, SimConfig(100, 4000, 3))
    assert big.std_error == pytest.approx(small.std_error / 2, rel=0.2)


def test_utv_vanishes_for_large_level():
    est = mc.estimate_expected_utv(ModelParams(c=50.0), SimConfig(100, 200, 0))
    assert est.mean == 0 and est.std_error == 0


def test_fixed_window_shrinks_with_horizon():
    est = mc.estimate_sup_functional(ModelParams(c=1.0, horizon_T=1e-4), SimConfig(50, 200, 0), "fixed_T")
    assert est.mean == 0


def test_tc_and_t_window_approaches_until_tc():
    params = ModelParams(mu=0.5, c=0.5, horizon_T=40.0)
    sim = SimConfig(n_steps=20_000, n_paths=2000, seed=6)
    long_window = mc.estimate_sup_functional(params, sim, "Tc_and_T")
    dt = params.horizon_T / sim.n_steps
    exact = cf.hv_mean(params.mu, params.c)
    assert abs(long_window.mean - exact) < 3 * long_window.std_error + mc.hv_mean_bias_allowance(0.5, 0.5, dt)


def test_cap_flags_unreliable(monkeypatch):
    monkeypatch.setattr(mc, "TC_CAP_CHUNKS", 1)
    mc._sample_until_tc_cached.cache_clear()
    est = mc.estimate_expected_tc(ModelParams(mu=2.0, c=1.0), SimConfig(100, 300, 0))
    mc._sample_until_tc_cached.cache_clear()
    assert est.cap_fraction > mc.UNRELIABLE_CAP_FRACTION
    assert est.unreliable


@pytest.mark.parametrize("mu", [0.0, 1.0])
def test_expected_tc_cross_check(mu):
    params = ModelParams(mu=mu, c=1.0)
    est = mc.estimate_expected_tc(params, SimConfig(n_steps=2000, n_paths=4000, seed=17))
    exact = cf.expected_tc(mu, 1.0)
    assert abs(est.mean - exact) <= 3 * est.std_error + mc.tc_bias_allowance(mu, 1.0, est.extra["dt"])
    assert not est.unreliable


def test_moment_ratio_cross_check():
    params = ModelParams(mu=1.0, c=1.0)
    m1, m2 = mc.estimate_tc_moments(params, SimConfig(n_steps=2000, n_paths=4000, seed=23))
    ratio = m1.mean**2 / m2.mean
    # delta method on (m1, m2), ignoring their positive correlation (conservative)
    se = ratio * math.hypot(2 * m1.std_error / m1.mean, m2.std_error / m2.mean)
    assert abs(ratio - cf.tc_moment_ratio(1.0, 1.0)) < 3 * se + 0.01


def test_hv_tail_cross_check():
    params = ModelParams(mu=0.5, c=1.0)
    s = mc.sample_until_tc(params, SimConfig(n_steps=2000, n_paths=20_000, seed=31))
    freq = float(np.mean(s.drawup >= 1.5))
    assert abs(freq - cf.hv_tail(0.5, 1.0, 1.5)) < 0.01 + 3 * mc.binomial_se(freq, s.drawup.size)


def test_exp_moment_estimator():
    params = ModelParams(mu=0.0, c=1.0)
    sim = SimConfig(200, 2000, 8)
    tiny = mc.estimate_exp_moment(1e-9, params, sim, 20.0)
    assert tiny.at_M.mean == pytest.approx(1.0, abs=1e-7)
    est = mc.estimate_exp_moment(0.5, params, sim, 20.0)
    assert abs(est.at_M.mean - est.at_half_M.mean) <= 3 * est.at_M.std_error
    with pytest.raises(ParameterError):
        mc.estimate_exp_moment(0.0, params, sim, 20.0)


def test_sup_mgf_estimate_matches_quadrature():
    params = ModelParams(mu=0.0, horizon_T=1.0)
    est = mc.estimate_sup_mgf(0.5, params, SimConfig(2000, 10_000, 2))
    exact = cf.sup_bm_mgf(0.5, 0.0, 1.0)
    # grid sup is lower; allow the level shift on the exponent
    shift = exact * (math.exp(0.5 * mc.level_shift(1 / 2000)) - 1)
    assert exact - 3 * est.std_error - 2 * shift <= est.mean <= exact + 3 * est.std_error


def test_unknown_window():
    with pytest.raises(ParameterError):
        mc.estimate_sup_functional(ModelParams(), SimConfig(10, 10, 0), "nope")


def test_allowances_shrink_with_step():
    a = [mc.tc_bias_allowance(0.5, 1.0, dt) for dt in (1e-2, 1e-3, 1e-4)]
    assert a == sorted(a, reverse=True) and a[-1] > 0
    h = [mc.hv_mean_bias_allowance(-1.0, 0.5, dt) for dt in (1e-2, 1e-3, 1e-4)]
    assert h == sorted(h, reverse=True)


def test_grid_refinement_reports_both_grids():
    params = ModelParams(mu=0.0, c=0.5)
    r = mc.grid_refinement(mc.estimate_sup_functional, params, SimConfig(100, 500, 1), "fixed_T")
    assert r.coarse.n_steps == 100 and r.fine.n_steps == 200
    r2 = math.sqrt(2)
    assert r.extrapolated == pytest.approx((r2 * r.fine.mean - r.coarse.mean) / (r2 - 1))
