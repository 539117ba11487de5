from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from truncvar.errors import ParameterError
from truncvar.paths import ModelParams, generate_gbm_price_path
from truncvar.trading import (
    TradePlan,
    commission_threshold,
    max_return_bound,
    optimal_trades,
    realized_return,
)

prices = arrays(np.float64, st.integers(0, 40), elements=st.floats(0.01, 100))
gammas = st.floats(0, 0.5)


def random_plan(rng, n, gamma):
    k = int(rng.integers(0, n // 2 + 1)) * 2
    idx = np.sort(rng.choice(n, size=k, replace=False))
    return TradePlan(tuple(zip(idx[::2].tolist(), idx[1::2].tolist())), gamma)


def test_commission_threshold():
    assert commission_threshold(0.0) == 0.0
    assert commission_threshold(0.01) == pytest.approx(math.log(1.01 / 0.99), rel=1e-15)
    for bad in (-0.1, 1.0, 2.0):
        with pytest.raises(ParameterError):
            commission_threshold(bad)


def test_two_price_example():
    plan = optimal_trades([1.0, 2.0], 0.01)
    assert plan.trades == ((0, 1),)
    r = realized_return([1.0, 2.0], plan)
    assert r == pytest.approx(2 * 0.99 / 1.01 - 1, abs=1e-12)
    assert r == pytest.approx(0.96040, abs=1e-5)
    assert max_return_bound([1.0, 2.0], 0.01) == pytest.approx(r, abs=1e-12)


def test_fixture_trades():
    p = np.exp([0.0, 3.0, 1.0, 4.0])
    plan = optimal_trades(p, commission_threshold_inverse(1.0))
    assert plan.trades == ((0, 1), (2, 3))
    assert realized_return(p, plan) == pytest.approx(math.expm1(4.0), rel=1e-12)


def commission_threshold_inverse(c):
    return math.tanh(c / 2)


def test_flat_series_has_no_trades():
    plan = optimal_trades(np.full(10, 5.0), 0.9)
    assert plan.trades == () and realized_return(np.full(10, 5.0), plan) == 0.0
    assert max_return_bound(np.full(10, 5.0), 0.9) == 0.0


def test_rejects_bad_prices():
    with pytest.raises(ParameterError):
        optimal_trades([1.0, -2.0], 0.01)
    with pytest.raises(ParameterError):
        max_return_bound([1.0, 0.0], 0.01)
    with pytest.raises(ParameterError):
        realized_return([1.0, 2.0], TradePlan(((0, 5),), 0.01))
    with pytest.raises(ParameterError):
        TradePlan(((0, 2), (1, 3)), 0.01)


@given(prices, gammas)
def test_identity(p, gamma):
    plan = optimal_trades(p, gamma)
    assert realized_return(p, plan) == pytest.approx(max_return_bound(p, gamma), rel=1e-9, abs=1e-9)


@given(prices, gammas, st.integers(0, 2**32 - 1))
def test_dominates_random_plans(p, gamma, seed):
    rng = np.random.default_rng(seed)
    best = max_return_bound(p, gamma)
    for _ in range(5):
        assert realized_return(p, random_plan(rng, p.size, gamma)) <= best + 1e-9 * (1 + abs(best))


@given(prices, gammas, gammas)
def test_bound_decreases_with_commission(p, g1, g2):
    lo, hi = sorted((g1, g2))
    assert max_return_bound(p, lo) >= max_return_bound(p, hi) - 1e-9 * (1 + abs(max_return_bound(p, lo)))


def test_gbm_identity():
    params = ModelParams(mu=0.05, sigma=0.3, horizon_T=1.0)
    for i in range(50):
        p = generate_gbm_price_path(params, 250, 11, i)
        for gamma in (0.001, 0.01):
            plan = optimal_trades(p, gamma)
            assert realized_return(p, plan) == pytest.approx(max_return_bound(p, gamma), rel=1e-9)
