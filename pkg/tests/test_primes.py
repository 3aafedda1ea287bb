import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zetalab import kernels
from zetalab.primes import (
    PrimeTableError, load_prime_cache, mertens_log_sum, save_prime_cache,
    sieve_primes, weighted_prime_sum,
)


def trial_division_primes(n):
    out = []
    for m in range(2, n + 1):
        if all(m % d for d in range(2, math.isqrt(m) + 1)):
            out.append(m)
    return out


def odd_only_sieve(n):
    """Second sieve: bit array over odd numbers only."""
    half = np.ones((n - 1) // 2, dtype=bool)  # represents 3, 5, 7, ...
    for i in range(math.isqrt(n) // 2):
        if half[i]:
            p = 2 * i + 3
            half[(p * p - 3) // 2::p] = False
    return np.concatenate([[2], 2 * np.flatnonzero(half) + 3])


def test_limit_ten():
    t = sieve_primes(10)
    assert t.primes.tolist() == [2, 3, 5, 7]
    assert t.prime_squares.tolist() == [4, 9]


def test_limit_too_small():
    with pytest.raises(PrimeTableError, match="limit too small"):
        sieve_primes(1)


def test_count_1e4_trial_division():
    assert len(sieve_primes(10**4)) == len(trial_division_primes(10**4)) == 1229


def test_second_sieve_1e6(table_1e6):
    np.testing.assert_array_equal(table_1e6.primes, odd_only_sieve(10**6))


@pytest.mark.parametrize("limit", [2, 3, 4, 97, 1000, 4096, 65537, 10**5])
@pytest.mark.parametrize("segment", [7, 1000, 1 << 20])
def test_segmented_matches_trial_division(limit, segment):
    ref = trial_division_primes(limit) if limit <= 10**4 else odd_only_sieve(limit).tolist()
    assert sieve_primes(limit, segment=segment).primes.tolist() == ref


@pytest.mark.parametrize("name", kernels.BACKENDS)
def test_backends_agree(name):
    with kernels.using(name):
        assert np.array_equal(sieve_primes(300_000, segment=65_536).primes, odd_only_sieve(300_000))


def test_weighted_sum_example():
    t = sieve_primes(10)
    s = weighted_prime_sum(t, 0.5)
    assert s.value == pytest.approx(2.1097, abs=1e-4)
    assert s.terms == 4
    empty = weighted_prime_sum(t, 0.5, upto=1.5)
    assert empty.value == 0.0 and empty.terms == 0


def test_smoothing_shorter_than_range():
    t = sieve_primes(100)
    with pytest.raises(ValueError, match="smoothing shorter than range"):
        weighted_prime_sum(t, 0.5, smoothing_log_x=math.log(50))


def test_table_too_short():
    with pytest.raises(PrimeTableError, match="table too short"):
        weighted_prime_sum(sieve_primes(100), 0.5, upto=1000)


def test_mertens_second_theorem(table_1e6):
    errs = []
    for x in (10**3, 10**4, 10**5, 10**6):
        s = weighted_prime_sum(table_1e6, 0.5, sigma_multiple=2, upto=x).value
        errs.append(abs(s - math.log(math.log(x)) - 0.2614972128))
    assert errs[-1] < 0.05
    assert errs == sorted(errs, reverse=True)


def test_mertens_first_theorem(table_1e6):
    assert mertens_log_sum(sieve_primes(10), 10).value == pytest.approx(1.3127, abs=1e-4)
    assert mertens_log_sum(table_1e6, 1.5).value == 0.0
    ratio = mertens_log_sum(table_1e6, 1e6).value / math.log(1e6)
    assert 0.9 <= ratio <= 1.01


def test_smoothed_variance_slack(table_1e8):
    for e in range(3, 9):
        x = 10.0**e
        s = weighted_prime_sum(table_1e8, 0.5, smoothing_log_x=math.log(x), weight_power=2,
                               sigma_multiple=2, upto=x)
        assert 0.5 * s.value <= 0.5 * math.log(math.log(x)) + 1


@settings(max_examples=60, deadline=None)
@given(st.floats(2, 10**4), st.floats(2, 10**4), st.floats(0.5, 1.0), st.booleans())
def test_additivity(x, y, sigma, squared):
    t = sieve_primes(10**4)
    lo, hi = min(x, y), max(x, y)
    whole = weighted_prime_sum(t, sigma, squared=squared, upto=hi)
    left = weighted_prime_sum(t, sigma, squared=squared, upto=lo)
    right = weighted_prime_sum(t, sigma, squared=squared, upto=hi, lower=lo)
    assert whole.terms == left.terms + right.terms
    assert whole.value == pytest.approx(left.value + right.value, rel=1e-13, abs=1e-15)


def test_cache_round_trip(tmp_path, table_1e6):
    path = tmp_path / "primes.bin"
    save_prime_cache(table_1e6, path)
    back = load_prime_cache(path)
    assert back.limit == table_1e6.limit
    np.testing.assert_array_equal(back.primes, table_1e6.primes)
    assert path.read_bytes()[:4] == b"ZLPT"
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"nope" + bytes(20))
    with pytest.raises(PrimeTableError):
        load_prime_cache(bad)
