import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zetalab.rng import CounterStream, box_muller, derive_key


def test_columns_independent_of_width():
    s = CounterStream(5, "a")
    np.testing.assert_array_equal(s.uniforms(3, 4, 10)[:, :6], s.uniforms(3, 4, 6))


def test_rows_independent_of_start():
    s = CounterStream(5, "a")
    np.testing.assert_array_equal(s.uniforms(0, 10, 7)[4:], s.uniforms(4, 6, 7))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9), st.integers(0, 500))
def test_uniform_at(row, col):
    s = CounterStream(11, "x", "y")
    assert s.uniform_at(row, col) == s.uniforms(row, 1, col + 1)[0, col]


def test_streams_differ():
    a = CounterStream(1, "m").uniforms(0, 1, 8)
    assert not np.array_equal(a, CounterStream(2, "m").uniforms(0, 1, 8))
    assert not np.array_equal(a, CounterStream(1, "n").uniforms(0, 1, 8))
    assert not np.array_equal(a, CounterStream(1, "m").child("c").uniforms(0, 1, 8))


def test_key_deterministic():
    k = derive_key(7, "a", "b")
    assert k.shape == (2,) and np.array_equal(k, derive_key(7, "a", "b"))


def test_sequence_reproducible_and_in_range():
    s = CounterStream(3, "seq")
    x = s.sequence(0, 1000)
    assert np.all((x >= 0) & (x < 1))
    np.testing.assert_array_equal(x[100:], s.sequence(100, 900))


def test_uniform_moments():
    x = CounterStream(9, "m").sequence(0, 200_000)
    assert abs(x.mean() - 0.5) < 4 * (1 / 12) ** 0.5 / 200_000 ** 0.5


def test_box_muller_moments():
    s = CounterStream(4, "g")
    z = box_muller(s.child("1").sequence(0, 200_000), s.child("2").sequence(0, 200_000))
    n = z.size
    assert abs(np.mean(np.abs(z) ** 2) - 1) < 4 * 1 / n ** 0.5
    assert abs(np.mean(z.real ** 2) - 0.5) < 4 * (0.5 * 2 ** 0.5) / n ** 0.5
    assert abs(np.mean(z.real * z.imag)) < 4 * 0.5 / n ** 0.5


def test_width_limit():
    with pytest.raises(ValueError, match="row stride"):
        CounterStream(0).uniforms(0, 1, (1 << 32) + 1)
