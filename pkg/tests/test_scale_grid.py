import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zetalab.scale_grid import (
    CheckpointGrid, GridError, GridParams, barrier_bounds, build_grid,
    key_condition_exponents, truncation_index, union_count_ok,
)


def brute_force_L(log_t, theta):
    ells = [ell for ell in range(1, 200) if math.exp(ell - 1) / math.sqrt(log_t) <= math.exp(-theta)]
    return 1 + max(ells)


def test_reference_grid():
    g = build_grid(GridParams(1e4, cutoff=2.0))
    assert g.capital_l == 4
    assert g.beta(1) == pytest.approx(0.01, rel=1e-15)
    assert g.beta(4) == pytest.approx(math.exp(3) / 100, rel=1e-15)
    assert g.c(1) == pytest.approx(1.2023, abs=1e-4)
    assert g.gamma == 1 / 25


def test_capital_l_straddles_cutoff():
    g = build_grid(GridParams(1e4, cutoff=2.0))
    assert g.beta(g.capital_l - 1) <= math.exp(-2.0) < g.beta(g.capital_l)


@pytest.mark.parametrize("log_t", [1e3, 1e4, 1e5])
@pytest.mark.parametrize("theta", [1.0, 2.0, 3.0])
def test_capital_l_matches_scan(log_t, theta):
    g = build_grid(GridParams(log_t, cutoff=theta))
    assert g.capital_l == brute_force_L(log_t, theta)
    assert all(g.t(ell) - g.t(ell - 1) == 1.0 for ell in range(2, g.capital_l + 1))


def test_errors():
    with pytest.raises(GridError, match="degenerate T"):
        GridParams(2.0)
    with pytest.raises(GridError, match="cutoff too large"):
        build_grid(GridParams(100.0, cutoff=3.0))
    with pytest.raises(GridError):
        GridParams(1e4, k=1.0, v=100.0)
    with pytest.raises(GridError):
        GridParams(1e4, gamma=0.05)


def test_barrier_midpoint_example():
    g = build_grid(GridParams(1e4, k=2.0, v=2 * math.log(1e4)))
    assert g.kappa == pytest.approx(2.0)
    b = barrier_bounds(g)
    assert g.t(1) == pytest.approx(math.log(100), abs=1e-12)
    assert 0.5 * (b.lower[0] + b.upper[0]) == pytest.approx(9.21, abs=1e-3)


def test_zero_gradient_barriers_symmetric():
    g = build_grid(GridParams(1e4))
    g = CheckpointGrid(**{**g.__dict__, "kappa": 0.0})
    b = barrier_bounds(g)
    np.testing.assert_allclose(b.lower, -np.asarray(g.cls))
    np.testing.assert_allclose(b.upper, np.asarray(g.cls))


def test_truncation():
    g = build_grid(GridParams(1e4))
    tr = truncation_index(g, 1)
    threshold = 0.01 ** 0.04
    assert threshold == pytest.approx(0.8318, abs=1e-4)
    # no beta on this grid exceeds 0.83, so the index clamps
    assert tr.clamped and tr.index == g.capital_l
    long_grid = build_grid(GridParams(1e4, cutoff=0.1))
    tr = truncation_index(long_grid, 1)
    assert not tr.clamped
    assert long_grid.beta(tr.index) > threshold >= long_grid.beta(tr.index - 1)
    with pytest.raises(IndexError):
        truncation_index(g, 0)


def test_json_round_trip():
    g = build_grid(GridParams(1e5, k=1.5, cutoff=1.0))
    d = json.loads(g.to_json())
    assert set(d) == {"log_t", "k", "v", "gamma", "cutoff", "betas", "tls", "cls", "capital_l"}
    assert CheckpointGrid.from_json(g.to_json()) == g


def test_key_condition_feasible():
    for log_t in (1e3, 1e4, 1e6, 1e10):
        g = build_grid(GridParams(log_t, cutoff=1.0))
        assert all(e < 1 for e in key_condition_exponents(g))


grid_params = st.builds(
    GridParams,
    log_t=st.floats(20.0, 1e12),
    k=st.floats(0.1, 5.0),
    gamma=st.floats(0.001, 0.0499),
    cutoff=st.floats(1.0, 4.0),
)


@settings(max_examples=200, deadline=None)
@given(grid_params)
def test_grid_properties(params):
    try:
        g = build_grid(params)
    except GridError as exc:
        assert "cutoff too large" in str(exc)
        assert 1 / math.sqrt(params.log_t) > math.exp(-params.cutoff)
        return
    L = g.capital_l
    assert L >= 2
    assert g.beta(1) == pytest.approx(1 / math.sqrt(params.log_t), rel=1e-14)
    for ell in range(2, L + 1):
        assert g.beta(ell) == pytest.approx(math.e * g.beta(ell - 1), rel=1e-14)
        assert g.t(ell) - g.t(ell - 1) == 1.0
        assert g.c(ell) < g.c(ell - 1)
    assert g.t(1) == pytest.approx(0.5 * math.log(params.log_t), abs=1e-12)
    assert g.t(1) == pytest.approx(math.log(g.beta(1) * params.log_t), abs=1e-12)
    assert union_count_ok(g)
    b = barrier_bounds(g)
    np.testing.assert_allclose(b.upper - b.lower, 2 * np.asarray(g.cls), rtol=1e-12)
    np.testing.assert_allclose(b.upper_prime - b.upper, 3 * np.asarray(g.cls), rtol=1e-12)
    np.testing.assert_allclose(b.lower - b.lower_prime, 3 * np.asarray(g.cls), rtol=1e-12)
    np.testing.assert_allclose(b.upper_prime - b.lower_prime, 8 * np.asarray(g.cls), rtol=1e-12)
    for ell in range(1, L + 1):
        tr = truncation_index(g, ell)
        assert 1 <= tr.index <= L
        if not tr.clamped:
            assert g.beta(tr.index) > g.beta(ell) ** g.gamma
    # lower barrier monotone on instances where the drift beats the width change
    for ell in range(2, L + 1):
        if g.kappa * 1.0 > g.c(ell - 1) - g.c(ell):
            assert b.lower[ell - 1] > b.lower[ell - 2]
