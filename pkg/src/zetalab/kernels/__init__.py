"""Hot inner loops with a compiled core and a numpy fallback.

The compiled extension ``_core`` is used when it was built; otherwise the
numpy implementations in ``_fallback`` are selected at import.  Both expose
the same four functions and are required to agree to rounding error.
"""

from contextlib import contextmanager

import numpy as np

from . import _fallback

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

EULER_R_MAX = 2 ** -0.5 * (1 + 1e-15)

BACKENDS = ("compiled", "python") if _core is not None else ("python",)
_active = _core if _core is not None else _fallback


def backend():
    """Name of the backend currently in use."""
    return "compiled" if _active is _core and _core is not None else "python"


def set_backend(name):
    global _active
    if name == "compiled":
        if _core is None:
            raise RuntimeError("compiled kernels are not available in this build")
        _active = _core
    elif name == "python":
        _active = _fallback
    else:
        raise ValueError(f"unknown backend {name!r}")


@contextmanager
def using(name):
    previous = backend()
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def _c(a, dtype=np.float64):
    return np.ascontiguousarray(a, dtype=dtype)


def cos_matvec(ts, phases, freqs, weights):
    """``out[i, c] = sum_k weights[k, c] * cos(phases[i] - ts[i] * freqs[k])``."""
    weights = _c(weights)
    if weights.ndim == 1:
        weights = weights[:, None]
    return _active.cos_matvec(_c(ts), _c(phases), _c(freqs), weights)


def cos_sum_ragged(ts, phases, counts, freqs, weights):
    """Like :func:`cos_matvec` with one column, summing only ``k < counts[i]``."""
    counts = _c(counts, np.int64)
    if counts.size and counts.max() > len(freqs):
        raise ValueError("counts exceed the frequency table")
    return _active.cos_sum_ragged(_c(ts), _c(phases), counts.astype(np.int_), _c(freqs), _c(weights))


def steinhaus_sums(u, w1, w2, euler_r=None):
    """Weighted sums of ``cos(2 pi u)`` and ``cos(4 pi u)`` plus an optional Euler-product log.

    Euler radii must lie in [0, 2^-1/2] (that is, r_p = p^-1/2 with p >= 2).
    """
    r = _c(euler_r) if euler_r is not None else np.zeros(0)
    if r.size and not (r.min() >= 0 and r.max() <= EULER_R_MAX):
        raise ValueError("euler radii must lie in [0, 2^-1/2]")
    return _active.steinhaus_sums(_c(u), _c(w1), _c(w2), r)


def sieve_segment(lo, hi, base):
    """uint8 primality flags for ``lo <= n < hi``."""
    return _active.sieve_segment(int(lo), int(hi), _c(base, np.int64))
