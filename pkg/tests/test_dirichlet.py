import csv
import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zetalab.dirichlet import (
    LAMBDA0,
    MajorantParams,
    batch_csv,
    dominance_experiment,
    higher_power_mass,
    increment,
    make_spec,
    partial_sum,
    partial_sums,
    poly_spec,
    solve_lambda0,
    sound_majorant,
    trajectory_matrix,
)
from zetalab.primes import PrimeTableError
from zetalab.scale_grid import GridParams, build_grid


def test_lambda0_value_and_residual():
    lam = solve_lambda0()
    assert round(lam, 4) == 0.4912
    assert abs(math.exp(-lam) - lam - lam * lam / 2) < 1e-12
    assert 0.45 < lam < 0.5


def test_lambda0_bracket_signs():
    assert math.exp(-0.5) < 0.5 + 0.125
    assert math.exp(-0.45) > 0.45 + 0.10125


def test_lambda0_is_fast():
    start = time.perf_counter()
    for _ in range(100):
        solve_lambda0()
    assert (time.perf_counter() - start) / 100 < 1e-3


def test_three_term_hand_sum(table_small):
    spec = make_spec(10.0, math.log(4), sigma=0.6)
    a2, a3, a4 = 1 - math.log(2) / 10, 1 - math.log(3) / 10, 1 - math.log(4) / 10
    hand = a2 * 2 ** -0.6 + a3 * 3 ** -0.6 + 0.5 * a4 * 2 ** -1.2
    assert partial_sum(spec, table_small, 0.0) == pytest.approx(hand, abs=1e-15)
    terms = [a2 * 2 ** -0.6, a3 * 3 ** -0.6, 0.5 * a4 * 2 ** -1.2]
    assert [round(x, 4) for x in terms] == [0.6140, 0.4605, 0.1875]
    assert hand == pytest.approx(1.2619, abs=1e-4)


def test_empty_cutoff(table_small):
    assert partial_sum(make_spec(10.0, 0.5), table_small, 3.0) == 0.0


@settings(max_examples=50, deadline=None)
@given(st.floats(-1e6, 1e6))
def test_parity(t):
    from zetalab.primes import sieve_primes

    table = sieve_primes(2000)
    spec = make_spec(20.0, math.log(1500))
    assert partial_sum(spec, table, -t) == pytest.approx(partial_sum(spec, table, t), abs=1e-12)


def test_table_too_short(table_small):
    with pytest.raises(PrimeTableError, match="table too short"):
        partial_sum(make_spec(20.0, math.log(1e5)), table_small, 0.0)


def test_linear_term_at_t_squared():
    p = MajorantParams(log_x=2 * 10.0, lam=LAMBDA0, log_t=10.0)
    assert p.linear_term == pytest.approx((1 + LAMBDA0) / 4)
    assert round(p.linear_term, 4) == 0.3728


def test_majorant_hand_sum(table_small):
    lx = math.log(4)
    p = MajorantParams(log_x=lx, lam=0.5, log_t=lx)
    s = 0.5 + 0.5 / lx
    # Lambda(n) / log n = 1 for primes, 1/2 for n = 4 (whose smoothing weight vanishes)
    hand = (1 - math.log(2) / lx) * 2 ** -s + (1 - math.log(3) / lx) * 3 ** -s + 0.5 * 0.0 + 0.75
    assert sound_majorant(p, table_small, 0.0) == pytest.approx(hand, abs=1e-15)


def test_majorant_range_errors():
    with pytest.raises(ValueError, match="x out of range"):
        MajorantParams(log_x=5.0, lam=0.4, log_t=10.0)
    with pytest.raises(ValueError, match="x out of range"):
        MajorantParams(log_x=25.0, lam=0.5, log_t=10.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(2.0, 9.0), st.floats(0.05, 0.95), st.floats(0.0, 1e4))
def test_decomposition(log_tell, frac, t):
    from zetalab.primes import sieve_primes

    table = sieve_primes(10**4)
    log_lower = frac * log_tell
    hi = make_spec(3 * log_tell, log_tell)
    lo = make_spec(3 * log_tell, log_lower)
    diff = partial_sum(hi, table, t) - partial_sum(lo, table, t)
    assert increment(hi, table, [t], log_lower)[0] == pytest.approx(diff, abs=1e-12)


def test_smoothing_limit(table_small):
    lt = math.log(5000)
    sigma = 0.55
    sm = make_spec(1e6 * lt, lt, sigma=sigma)
    p = table_small.primes[table_small.primes <= 5000].astype(float)
    t = 17.3
    direct = np.sum(p ** -sigma * np.cos(t * np.log(p)))
    q = p[p * p <= 5000]
    direct += 0.5 * np.sum(q ** (-2 * sigma) * np.cos(2 * t * np.log(q)))
    assert partial_sum(sm, table_small, t) == pytest.approx(direct, rel=1e-4)


def test_trajectory_matrix_layout(table_small):
    g = build_grid(GridParams(8.0, k=0.5, cutoff=1.0))
    ts = np.array([100.0, 2500.5, 4000.25])
    m = trajectory_matrix(g, table_small, ts)
    L = g.capital_l
    for ell in range(1, L + 1):
        for j in range(1, L + 1):
            if j < ell:
                assert np.all(np.isnan(m[:, ell - 1, j - 1]))
            else:
                np.testing.assert_allclose(m[:, ell - 1, j - 1], partial_sums(poly_spec(g, j, ell), table_small, ts),
                                           atol=1e-12)


def test_batch_csv(tmp_path, table_small):
    g = build_grid(GridParams(8.0, k=0.5, cutoff=1.0))
    src, dst = tmp_path / "t.csv", tmp_path / "s.csv"
    src.write_text("t\n1.5\n20.25\n")
    batch_csv(src, dst, g, table_small, [(1, 1), (2, 2)])
    rows = list(csv.reader(dst.open()))
    body = [r for r in rows if r and r[0] != "t"]
    assert len(body) == 2 and float(body[1][0]) == 20.25
    assert float(body[1][2]) == pytest.approx(partial_sum(poly_spec(g, 2, 2), table_small, 20.25), abs=1e-12)


def test_dominance_is_reported_not_asserted():
    r = dominance_experiment(20.0, 5.0, 300, 2)
    assert 0.0 <= r["failure_fraction"] <= 1.0 and r["n"] == 300
    assert math.isfinite(r["max_excess"]) and r["slack_higher_powers"] > 0


def test_higher_power_mass_decreasing():
    a, b = higher_power_mass(0.5, 10**5), higher_power_mass(0.7, 10**5)
    assert 0 < b < a < 1
