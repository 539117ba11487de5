from __future__ import annotations

import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from truncvar.errors import ParameterError
from truncvar.paths import (
    CsvFormatError,
    ModelParams,
    Path,
    SimConfig,
    generate_bm_path,
    generate_gbm_price_path,
    negate_path,
    read_path_csv,
    simulate_bm_batch,
    slice_path,
    write_path_csv,
)


@pytest.mark.parametrize(
    "kwargs",
    [dict(c=0.0), dict(c=-1.0), dict(sigma=0.0), dict(horizon_T=0.0), dict(mu=math.nan)],
)
def test_model_params_rejects_invalid(kwargs):
    with pytest.raises(ParameterError):
        ModelParams(**kwargs)


def test_sim_config_validation():
    with pytest.raises(ParameterError):
        SimConfig(n_steps=0)
    with pytest.raises(ParameterError):
        SimConfig(n_paths=0)
    with pytest.raises(ParameterError):
        SimConfig(seed=-1)
    SimConfig(seed=2**64 - 1)


def test_bm_path_starts_at_zero_and_is_deterministic():
    params = ModelParams(mu=0.7, horizon_T=2.0)
    a = generate_bm_path(params, 50, seed=3, path_index=9)
    b = generate_bm_path(params, 50, seed=3, path_index=9)
    assert a.values[0] == 0.0
    assert len(a) == 51
    assert a.times[-1] == 2.0
    assert np.all(np.diff(a.times) > 0)
    assert a == b
    assert not np.array_equal(a.values, generate_bm_path(params, 50, 3, 10).values)
    assert not np.array_equal(a.values, generate_bm_path(params, 50, 4, 9).values)


def test_batch_rows_match_single_paths():
    params = ModelParams(mu=-0.4, horizon_T=1.5)
    idx = [7, 0, 3]
    batch = simulate_bm_batch(params.mu, params.horizon_T, 40, 11, idx)
    for row, i in zip(batch, idx):
        np.testing.assert_array_equal(row, generate_bm_path(params, 40, 11, i).values)


def test_increment_moments():
    # 1000 paths x 1000 steps = 10^6 increments
    mu, dt = 1.0, 1e-3
    w = simulate_bm_batch(mu, 1.0, 1000, 0, range(1000))
    inc = np.diff(w, axis=1).ravel()
    se = math.sqrt(dt / inc.size)
    assert abs(inc.mean() - mu * dt) < 5 * se
    assert abs(inc.var() / dt - 1.0) < 5 * math.sqrt(2.0 / inc.size)


def test_terminal_mean_matches_drift():
    w = simulate_bm_batch(1.0, 1.0, 100, 5, range(10_000))
    terminal = w[:, -1]
    se = terminal.std(ddof=1) / math.sqrt(terminal.size)
    assert abs(terminal.mean() - 1.0) < 3 * se


def test_gbm_shares_stream_with_bm():
    params = ModelParams(mu=0.3, sigma=1.7, horizon_T=1.0)
    bm = generate_bm_path(params.replace(mu=0.0), 200, 1, 4)
    price = generate_gbm_price_path(params, 200, 1, 4)
    assert price.values[0] == 1.0
    np.testing.assert_allclose(np.log(price.values), params.mu * bm.times + params.sigma * bm.values, atol=1e-12)


def test_gbm_log_terminal_mean_zero():
    params = ModelParams(mu=0.0, sigma=1.0)
    logs = np.array([math.log(generate_gbm_price_path(params, 20, 2, i).values[-1]) for i in range(4000)])
    assert abs(logs.mean()) < 3 * logs.std(ddof=1) / math.sqrt(logs.size)


def test_negate_and_slice(fixture_values):
    p = Path.from_values(fixture_values)
    np.testing.assert_array_equal(negate_path(p).values, [0, -3, -1, -4])
    assert negate_path(negate_path(p)) == p
    assert slice_path(p, 0, 3) == p
    assert len(slice_path(p, 2, 2)) == 1
    assert len(slice_path(p, 2, 1)) == 0
    np.testing.assert_array_equal(slice_path(p, 0.5, 2.5).values, [3, 1])


def test_path_validation():
    with pytest.raises(ParameterError):
        Path(np.array([0.0, 1.0]), np.array([0.0]))
    with pytest.raises(ParameterError):
        Path(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    with pytest.raises(ParameterError):
        Path(np.array([0.0]), np.array([np.inf]))


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=30))
def test_csv_round_trip(values):
    p = Path.from_values(values, dt=0.1)
    buf = io.StringIO()
    write_path_csv(p, buf)
    text = buf.getvalue()
    assert text.startswith("time,value\n")
    assert "\r" not in text
    assert read_path_csv(io.StringIO(text)) == p


@pytest.mark.parametrize(
    "text,row",
    [
        ("t,v\n0,1\n", 1),
        ("time,value\n0,1\n1,x\n", 3),
        ("time,value\n0,1\n1,2,3\n", 3),
        ("time,value\n1,1\n0,2\n", 3),
        ("time,value\n0,nan\n", 2),
    ],
)
def test_csv_errors_carry_row(text, row):
    with pytest.raises(CsvFormatError) as info:
        read_path_csv(io.StringIO(text))
    assert info.value.row == row


def test_csv_file_round_trip(tmp_path):
    p = generate_bm_path(ModelParams(), 10, 0, 0)
    target = tmp_path / "p.csv"
    write_path_csv(p, target)
    assert target.read_bytes().count(b"\n") == 12
    assert read_path_csv(target) == p
