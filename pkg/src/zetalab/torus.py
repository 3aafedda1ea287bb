"""Quadrature over the phase torus of a few primes.

Statistics have the form ``sum_p w_p cos(theta_p) + v_p cos(2 theta_p)``
(a prime plus its square, with X(p^2) = X(p)^2).  Expectations of smooth
functions use tensor Gauss-Legendre rules on [0, 2 pi]^d.  Box probabilities
integrate the last angle exactly: with c = cos(theta) the statistic is a
quadratic in c, so the admissible set is a union of c-intervals whose
theta-measure is a difference of arccos values.  The remaining angles use
composite Gauss-Legendre rules on [0, pi] (all integrands are even in each
angle), with a Richardson error estimate from halving the panel count.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

MAX_PRIMES = 5
MIN_NODES = 64
POINT_BUDGET = 4 * 10**6


class TorusDimensionError(ValueError):
    pass


@dataclass(frozen=True)
class TorusResult:
    value: float
    error: float
    nodes_per_dim: int


def _check_dim(d):
    if d > MAX_PRIMES:
        raise TorusDimensionError(f"dimension too high: {d} primes > {MAX_PRIMES}")


def composite_gl(a, b, panels, order=16):
    """Nodes and weights of composite Gauss-Legendre on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    nodes = ((edges[:-1] + half)[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _tensor_iter(nodes, weights, d, chunk=1 << 18):
    """Yield (angles[m, d], weights[m]) blocks of the d-fold tensor rule."""
    n = nodes.shape[0]
    total = n ** d
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        cols = []
        wt = np.ones(idx.shape[0])
        rem = idx
        for _ in range(d):
            rem, k = np.divmod(rem, n)
            cols.append(nodes[k])
            wt = wt * weights[k]
        yield np.stack(cols, axis=1), wt


def torus_expectation(fn, d, nodes=MIN_NODES):
    """E f(theta) for theta uniform on [0, 2 pi)^d, ``fn`` vectorized over rows.

    ``fn`` receives an ``(m, d)`` array of angles and returns ``m`` values
    (real or complex).
    """
    _check_dim(d)
    if nodes < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} nodes per dimension")
    if d == 0:
        return fn(np.zeros((1, 0)))[0]
    x, w = composite_gl(0.0, 2 * np.pi, max(1, nodes // 16), 16)
    total = 0.0
    for ang, wt in _tensor_iter(x, w, d):
        total = total + np.sum(wt * fn(ang))
    return total / (2 * np.pi) ** d


# ------------------------------------------------------- box probabilities

def _roots_in_c(a2, a1, a0):
    """Both roots of a2 c^2 + a1 c + a0 (NaN where absent), vectorized."""
    with np.errstate(invalid="ignore", divide="ignore"):
        disc = a1 * a1 - 4 * a2 * a0
        r = np.sqrt(np.where(disc >= 0, disc, np.nan))
        q = -0.5 * (a1 + np.copysign(r, a1))
        quad = a2 != 0
        r1 = np.where(quad, q / a2, np.where(a1 != 0, -a0 / a1, np.nan))
        r2 = np.where(quad, a0 / q, np.nan)
    return r1, r2


def _inner_measure(bases, ws, vs, boxes):
    """theta-measure / pi of {theta in [0, pi]: every statistic in its box}.

    ``bases`` has shape ``(m, S)``: offsets of the S statistics at m outer
    points; ``ws[s]``, ``vs[s]`` are the cos / cos2 coefficients of the last
    angle.  With c = cos(theta) each statistic is a quadratic in c, so the
    admissible c-set is bounded by at most four roots per statistic.
    """
    bases = np.atleast_2d(bases)
    m = bases.shape[0]
    cols = [np.full(m, -1.0), np.full(m, 1.0)]
    for s, (lo, hi) in enumerate(boxes):
        for level in (lo, hi):
            if math.isfinite(level):
                a2 = np.full(m, 2.0 * vs[s])
                a1 = np.full(m, float(ws[s]))
                a0 = bases[:, s] - vs[s] - level
                cols.extend(_roots_in_c(a2, a1, a0))
    pts = np.stack(cols, axis=1)
    pts = np.where(np.isnan(pts), 1.0, np.clip(pts, -1.0, 1.0))
    pts.sort(axis=1)
    mids = 0.5 * (pts[:, :-1] + pts[:, 1:])
    ok = np.ones(mids.shape, dtype=bool)
    for s, (lo, hi) in enumerate(boxes):
        val = bases[:, s:s + 1] + ws[s] * mids + vs[s] * (2 * mids * mids - 1)
        ok &= (val >= lo) & (val <= hi)
    acos = np.arccos(pts)
    return np.sum(np.where(ok, acos[:, :-1] - acos[:, 1:], 0.0), axis=1) / math.pi


def _box_integral(W, Vq, boxes, panels, order):
    S, d = W.shape
    if d == 1:
        return float(_inner_measure(np.zeros((1, S)), W[:, 0], Vq[:, 0], boxes)[0])
    x, w = composite_gl(0.0, math.pi, panels, order)
    total = 0.0
    for ang, wt in _tensor_iter(x, w, d - 1):
        base = np.cos(ang) @ W[:, :-1].T + np.cos(2 * ang) @ Vq[:, :-1].T  # (m, S)
        total += float(np.sum(wt * _inner_measure(base, W[:, -1], Vq[:, -1], boxes)))
    return total / math.pi ** (d - 1)


def torus_probability(w, boxes, v=None, nodes=None, order=16):
    """P(statistic_s in box_s for every s) under independent uniform phases.

    Parameters
    ----------
    w : array_like, shape (S, d) or (d,)
        Coefficient of ``cos(theta_p)`` in each statistic (S <= 2).
    boxes : sequence of (lo, hi)
        One closed interval per statistic.
    v : array_like, optional
        Coefficient of ``cos(2 theta_p)`` (the prime-square term).
    nodes : int, optional
        Gauss-Legendre nodes per outer dimension (>= 64); by default the
        largest power-of-two multiple of 64 (at most 8192) within the
        point budget.
    """
    W = np.atleast_2d(np.asarray(w, dtype=np.float64))
    Vq = np.zeros_like(W) if v is None else np.atleast_2d(np.asarray(v, dtype=np.float64))
    S, d = W.shape
    _check_dim(d)
    if S != len(boxes) or S > 2:
        raise ValueError("one box per statistic, at most two statistics")
    if nodes is None:
        nodes = MIN_NODES
        while (2 * nodes) ** max(d - 1, 1) <= POINT_BUDGET and nodes < 8192:
            nodes *= 2
    if nodes < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} nodes per dimension")
    boxes = [(float(lo), float(hi)) for lo, hi in boxes]
    if d == 1:
        val = _box_integral(W, Vq, boxes, 1, order)
        return TorusResult(val, 1e-15, 0)
    panels = max(2, nodes // order)
    fine = _box_integral(W, Vq, boxes, panels, order)
    coarse = _box_integral(W, Vq, boxes, panels // 2, order)
    # boundary kinks of sqrt type: the composite rule converges like h^1.5
    extrap = fine + (fine - coarse) / (2 ** 1.5 - 1)
    return TorusResult(extrap, abs(fine - coarse), panels * order)


# ------------------------------------------------------------- moments

def exact_trig_moment(w, v, power):
    """E[(sum_p w_p cos theta_p + v_p cos 2 theta_p)^power] by quadrature on the torus."""
    w = np.asarray(w, dtype=np.float64)
    v = np.zeros_like(w) if v is None else np.asarray(v, dtype=np.float64)

    def f(ang):
        return (np.cos(ang) @ w + np.cos(2 * ang) @ v) ** power

    return float(np.real(torus_expectation(f, w.shape[0])))


def monomial_table(primes, max_exp):
    """All n = prod p^e with 0 <= e <= max_exp, as (n, exponent tuple)."""
    out = []
    for exps in itertools.product(range(max_exp + 1), repeat=len(primes)):
        n = 1
        for p, e in zip(primes, exps):
            n *= p ** e
        out.append((n, exps))
    return sorted(out)


def steinhaus_inner_product(primes, b, c, exps):
    """E[(sum b_n X(n)) conj(sum c_n X(n))] over the torus of ``primes``.

    ``exps[k]`` is the exponent vector of the k-th integer n.
    """
    E = np.asarray(exps, dtype=np.float64)
    b = np.asarray(b, dtype=complex)
    c = np.asarray(c, dtype=complex)

    def f(ang):
        phase = np.exp(1j * ang @ E.T)  # X(n) = exp(i <e, theta>)
        return (phase @ b) * np.conj(phase @ c)

    return complex(torus_expectation(f, len(primes)))
