import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zetalab.models import exact_moments
from zetalab.torus import (
    TorusDimensionError,
    exact_trig_moment,
    monomial_table,
    steinhaus_inner_product,
    torus_expectation,
    torus_probability,
)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(-6.0, 6.0))
def test_single_prime_arcsine_law(w, x):
    # P(w cos th <= x) = 1 - arccos(x/w)/pi, clipped
    got = torus_probability([w], [(-math.inf, x)]).value
    c = min(max(x / w, -1.0), 1.0)
    assert got == pytest.approx(1 - math.acos(c) / math.pi, abs=1e-12)


def test_two_primes_against_monte_carlo():
    w = np.array([0.7, 0.4])
    res = torus_probability(w, [(0.1, 0.6)])
    rng = np.random.default_rng(11)
    th = rng.uniform(0, 2 * np.pi, size=(400_000, 2))
    hit = (np.cos(th) @ w >= 0.1) & (np.cos(th) @ w <= 0.6)
    se = math.sqrt(res.value * (1 - res.value) / hit.size)
    assert abs(hit.mean() - res.value) < 4 * se
    assert res.error < 1e-5


def test_square_terms_against_monte_carlo():
    w = np.array([0.6, 0.5, 0.3])
    v = np.array([0.2, 0.1, 0.0])
    res = torus_probability(w, [(-0.2, math.inf)], v=v, nodes=256)
    rng = np.random.default_rng(5)
    th = rng.uniform(0, 2 * np.pi, size=(400_000, 3))
    stat = np.cos(th) @ w + np.cos(2 * th) @ v
    p = (stat >= -0.2).mean()
    assert abs(p - res.value) < 4 * math.sqrt(p * (1 - p) / th.shape[0])


def test_probability_monotone_in_box():
    w = [0.5, 0.3, 0.2]
    vals = [torus_probability(w, [(-math.inf, x)], nodes=128).value for x in (-1.0, -0.5, 0.0, 0.3, 0.9, 1.0)]
    assert all(a <= b + 1e-9 for a, b in zip(vals, vals[1:]))
    assert vals[0] == pytest.approx(0.0, abs=1e-12) and vals[-1] == pytest.approx(1.0, abs=1e-12)
    assert vals[2] == pytest.approx(0.5, abs=1e-9)  # symmetry of the statistic


def test_trig_moment_matches_cumulant_route():
    w = np.array([0.9, 0.5, 0.3, 0.2])
    v = np.array([0.1, 0.05, 0.0, 0.0])
    mom = exact_moments(w, v, 6)
    for r in (2, 4, 6):
        assert exact_trig_moment(w, v, r) == pytest.approx(mom[r], rel=1e-12)


def test_second_moment_closed_form():
    w = np.array([0.3, 0.8])
    v = np.array([0.4, 0.1])
    assert exact_trig_moment(w, v, 2) == pytest.approx(0.5 * np.sum(w ** 2 + v ** 2), rel=1e-13)


def test_inner_product_is_diagonal_sum():
    primes = [2, 3, 5]
    table = monomial_table(primes, 2)
    rng = np.random.default_rng(2)
    b = rng.normal(size=len(table)) + 1j * rng.normal(size=len(table))
    got = steinhaus_inner_product(primes, b, b, [e for _, e in table])
    assert got.real == pytest.approx(np.sum(np.abs(b) ** 2), rel=1e-10)
    assert abs(got.imag) < 1e-10


def test_expectation_of_smooth_function():
    assert torus_expectation(lambda a: np.exp(np.cos(a[:, 0]) + np.cos(a[:, 1])), 2) == pytest.approx(
        np.i0(1.0) ** 2, rel=1e-13)


def test_dimension_too_high():
    with pytest.raises(TorusDimensionError, match="dimension too high"):
        torus_probability(np.ones(6), [(0, 1)])
