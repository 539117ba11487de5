from __future__ import annotations

import json
import math

import numpy as np
import pytest

from truncvar import bounds
from truncvar import closed_forms as cf
from truncvar.errors import RegimeError
from truncvar.paths import ModelParams, Path, SimConfig

SMALL = SimConfig(n_steps=200, n_paths=400, seed=3)


def by_id(reports):
    return {r.claim_id: r for r in reports}


def test_regime_classification():
    etc = cf.expected_tc(1.0, 2.0)
    assert bounds.regime_of(ModelParams(mu=1.0, c=2.0, horizon_T=etc)) == "long"
    assert bounds.regime_of(ModelParams(mu=1.0, c=2.0, horizon_T=0.1 * etc)) == "short"
    with pytest.raises(RegimeError):
        bounds.RegimeParams(ModelParams(mu=1.0, c=2.0, horizon_T=0.1 * etc), "long")
    with pytest.raises(RegimeError):
        bounds.RegimeParams(ModelParams(), "medium")


def test_long_regime_rejects_short_params():
    rp = bounds.RegimeParams.of(ModelParams(mu=1.0, c=2.0, horizon_T=0.1))
    with pytest.raises(RegimeError):
        bounds.verify_long_regime(rp, SMALL)


def test_long_regime_reports_echo_constants():
    params = ModelParams(mu=0.0, c=0.5, horizon_T=3 * cf.expected_tc(0.0, 0.5))
    reps = by_id(bounds.verify_long_regime(bounds.RegimeParams.of(params), SMALL))
    assert set(reps) == set(bounds.CLAIM_GROUPS["long"])
    assert reps["THM_3_4_LOWER"].constants == {"lower": 0.3}
    assert reps["THM_3_4_UPPER"].constants == {"upper": 27.0}
    assert reps["COR_3_5_LOWER"].constants["lower"] == 3.0
    for r in reps.values():
        assert r.passed, r.as_dict()
        assert r.config["seed"] == 3 and r.config["regime"] == "long"


def test_short_regime_example():
    etc = cf.expected_tc(1.0, 2.0)
    params = ModelParams(mu=1.0, c=2.0, horizon_T=0.1 * etc)
    reps = by_id(bounds.verify_short_regime(bounds.RegimeParams.of(params), SMALL, refine=True))
    assert set(reps) == set(bounds.CLAIM_GROUPS["short"])
    assert reps["THM_3_7_UPPER_9_2"].constants == {"upper": 4.5}
    assert reps["THM_3_7_UPPER_5"].constants == {"upper": 5.0}
    assert all(r.passed for r in reps.values())
    assert "utv_refinement" in reps["THM_3_7_LOWER"].notes


@pytest.mark.parametrize("mu", [0.0, 2.0])
def test_early_drawdown(mu):
    rep = bounds.verify_early_drawdown(ModelParams(mu=mu, c=1.0), SimConfig(400, 1000, 5))
    assert rep.passed
    assert rep.rhs == pytest.approx(7 / 9)
    assert 0 <= rep.lhs.mean <= 1


def test_moment_ratio_report():
    rep = bounds.verify_moment_ratio(bounds.ratio_grid(100))
    assert rep.kind == "exact" and rep.passed
    assert len(rep.points) == 100
    assert rep.margin >= 0.0


def test_ratio_grid_spread():
    pts = bounds.ratio_grid(100)
    prods = [mu * c for mu, c in pts]
    assert len(pts) == 100 and min(prods) == pytest.approx(-3) and max(prods) == pytest.approx(3)


def test_path_relations_on_fixture(fixture_values):
    reps = bounds.verify_path_relations(Path.from_values(fixture_values), 1.0, [1.5])
    assert [r.claim_id for r in reps] == list(bounds.CLAIM_GROUPS["relations"])
    assert all(r.passed and r.kind == "pathwise" for r in reps)
    gap = by_id(reps)["REL_TV_LE_UTV_PLUS_DTV"]
    assert gap.margin == 0 and gap.notes["max_gap"] == 0


def test_path_relations_split_outside_range(fixture_values):
    with pytest.raises(RegimeError):
        bounds.verify_path_relations(Path.from_values(fixture_values), 1.0, [7.0])


def test_pathwise_batch_and_discounted_bound():
    params = ModelParams(mu=1.0, c=0.5)
    reps = bounds.verify_pathwise_batch(params, SMALL, threads=2)
    assert all(r.passed for r in reps)
    assert all(r.notes["violations"] == 0 for r in reps)
    n10 = by_id(bounds.verify_discounted_sum(params, SimConfig(100, 200, 1)))["LEM_3_2_N10"]
    assert n10.passed and n10.notes["violations"] == 0


def test_discounted_mean_version_holds():
    reps = by_id(bounds.verify_discounted_sum(ModelParams(mu=0.0, c=1.0), SimConfig(200, 1000, 7)))
    assert reps["LEM_3_2_N11_MEAN"].passed
    assert reps["LEM_3_2_N11"].notes["n_points"] > 0


def test_discounted_sum_domination_fails_for_small_values():
    # P(UTV[0,T] > 0) < 1 while the discounted sum is almost surely positive
    reps = by_id(bounds.verify_discounted_sum(ModelParams(mu=0.0, c=1.0), SimConfig(500, 2000, 7)))
    n11 = reps["LEM_3_2_N11"]
    assert not n11.passed
    assert n11.margin < -0.2


def test_shift_invariance():
    rep = bounds.verify_shift_invariance(ModelParams(mu=-1.0, c=0.5), SMALL)
    assert rep.passed and rep.kind == "two_sided"
    assert rep.config["shift"] == pytest.approx(0.5)


def test_closed_form_reports():
    reps = bounds.verify_closed_forms(ModelParams(mu=0.0, c=1.0), SimConfig(1000, 1000, 2))
    assert [r.claim_id for r in reps] == ["CF_EXPECTED_TC", "CF_HV_MEAN"]
    assert all(r.passed for r in reps)


def test_exp_moment_reports():
    reps = by_id(bounds.verify_exp_moment(0.5, ModelParams(mu=0.0, c=1.0), SimConfig(200, 500, 1)))
    assert reps["EXP_MOMENT_BOUND"].passed and reps["EXP_MOMENT_TRUNCATION"].passed
    assert math.isfinite(reps["EXP_MOMENT_BOUND"].rhs)


def test_exp_moment_infeasible_fails():
    reps = bounds.verify_exp_moment(50.0, ModelParams(mu=0.0, c=1.0), SimConfig(10, 10, 1))
    assert len(reps) == 1 and not reps[0].passed and "infeasible" in reps[0].notes


def test_low_power_is_advisory():
    rep = bounds.statistical_report("X", 2.0, 1.0, ModelParams(), SimConfig(10, 10, 0), {})
    assert not rep.passed and rep.low_power and not rep.counts_as_failure
    path = bounds.BoundReport("Y", 1.0, 0.0, -1.0, False, kind="pathwise", low_power=True)
    assert path.counts_as_failure


def test_report_serializes():
    rep = bounds.verify_early_drawdown(ModelParams(), SimConfig(50, 50, 0))
    d = json.loads(json.dumps(rep.as_dict()))
    assert d["claim_id"] == "LEM_3_3" and d["low_power"] is True
    assert isinstance(d["passed"], bool)
    bounds.BoundReport("Z", 1, 2, np.float64(1.0), np.bool_(True)).as_dict()


def test_claim_filter():
    assert bounds.claim_selected("THM_3_4_LOWER", ["thm_3_4"])
    assert not bounds.claim_selected("THM_3_7_LOWER", ["THM_3_4"])
    assert bounds.claim_selected("ANY", [])
    cfg = bounds.VerifyConfig(sim=SimConfig(50, 60, 1), grid=((0.0, 1.0),), claims=("LEM_3_3",))
    ids = [r.claim_id for r in bounds.run_verification(cfg)]
    assert ids == ["LEM_3_3_RATIO", "LEM_3_3"]


def test_run_verification_is_deterministic():
    cfg = bounds.VerifyConfig(sim=SimConfig(50, 120, 4), grid=((1.0, 0.5),), claims=("THM", "SHIFT"))
    a = [r.as_dict() for r in bounds.run_verification(cfg)]
    b = [r.as_dict() for r in bounds.run_verification(bounds.VerifyConfig(**{**cfg.__dict__, "threads": 3}))]
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
