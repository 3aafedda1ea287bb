"""zeta(1/2 + it) at desk heights, level sets, moments and short-interval maxima.

Below ``RS_SWITCH`` the value comes from Euler-Maclaurin summation; above it
from the Riemann-Siegel formula with the corrections C0..C4.
"""

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import bernoulli, loggamma

from . import kernels
from .rng import CounterStream

T_MAX = 1e10
RS_SWITCH = 200.0
EM_BERNOULLI_TERMS = 20
RS_TOLERANCE = 1e-7  # absolute error target before falling back to EM
EM_FALLBACK_LIMIT = 1e7
_EPS = np.finfo(float).eps


class ZetaRangeError(ValueError):
    pass


@dataclass(frozen=True)
class ZetaPoint:
    t: float
    value: complex
    log_abs: float
    method: str
    est_error: float


# ---------------------------------------------------------------- theta phase

_THETA_ASYMPTOTIC = (1 / 48, 7 / 5760, 31 / 80640, 127 / 430080, 511 / 1216512)


def theta(t):
    """Riemann-Siegel theta; asymptotic series for |t| >= 50, log-gamma below."""
    t = np.asarray(t, dtype=np.float64)
    a = np.abs(t)
    out = np.empty_like(a)
    big = a >= 50
    tb = a[big]
    inv = 1.0 / tb
    corr = np.zeros_like(tb)
    for c in reversed(_THETA_ASYMPTOTIC):
        corr = corr * inv * inv + c
    out[big] = 0.5 * tb * np.log(tb / (2 * np.pi)) - 0.5 * tb - np.pi / 8 + corr * inv
    ts = a[~big]
    out[~big] = np.imag(loggamma(0.25 + 0.5j * ts)) - 0.5 * ts * np.log(np.pi)
    out = np.sign(t) * out
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------- Euler-Maclaurin

@functools.lru_cache(maxsize=None)
def _bernoulli_factor(m):
    b = bernoulli(2 * m)
    return np.array([b[2 * k] / math.factorial(2 * k) for k in range(1, m + 1)])


def em_terms(t):
    return int(abs(t) / 3) + 20


def euler_maclaurin(t, n_terms=None, m=EM_BERNOULLI_TERMS):
    """zeta(1/2 + it) with ``N`` direct terms and ``m`` Bernoulli corrections.

    Returns ``(value, est_error)`` where the error is the size of the last
    correction kept.
    """
    s = complex(0.5, t)
    N = em_terms(t) if n_terms is None else int(n_terms)
    n = np.arange(1, N, dtype=np.float64)
    logn = np.log(n)
    head = np.sum(np.exp(-0.5 * logn) * np.exp(-1j * t * logn)) if N > 1 else 0.0
    logN = math.log(N)
    nps = np.exp(-s * logN)  # N^-s
    total = head + N * nps / (s - 1) + 0.5 * nps
    factors = _bernoulli_factor(m)
    poch = s
    power = nps / N  # N^(-s-1)
    last = 0.0
    for k in range(1, m + 1):
        if k > 1:
            poch *= (s + 2 * k - 3) * (s + 2 * k - 2)
            power /= N * N
        term = factors[k - 1] * poch * power
        total += term
        last = abs(term)
    rounding = 2 * _EPS * (abs(t) * logN + 1) * math.sqrt(logN + 1)
    return complex(total), last + rounding


# ------------------------------------------------------------ Riemann-Siegel

@functools.lru_cache(maxsize=1)
def _psi_taylor(degree=120, dps=150):
    """Taylor coefficients in x = p - 1/2 of
    Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p) = -cos(2 pi x^2 - 5 pi/8) / cos(2 pi x).
    """
    import mpmath as mp

    with mp.workdps(dps):
        pi = mp.pi
        c58, s58 = mp.cos(5 * pi / 8), mp.sin(5 * pi / 8)
        num = [mp.mpf(0)] * degree
        den = [mp.mpf(0)] * degree
        for k in range(degree):
            if 4 * k < degree:
                num[4 * k] -= (-1) ** k * (2 * pi) ** (2 * k) / mp.factorial(2 * k) * c58
            if 4 * k + 2 < degree:
                num[4 * k + 2] -= (-1) ** k * (2 * pi) ** (2 * k + 1) / mp.factorial(2 * k + 1) * s58
            if 2 * k < degree:
                den[2 * k] = (-1) ** k * (2 * pi) ** (2 * k) / mp.factorial(2 * k)
        q = []
        for i in range(degree):
            q.append(num[i] - mp.fsum(q[r] * den[i - r] for r in range(i)))
        return np.array([float(c) for c in q])


@functools.lru_cache(maxsize=None)
def _psi_derivative_poly(k):
    c = _psi_taylor()
    n = np.arange(k, c.shape[0])
    ff = np.ones_like(n, dtype=np.float64)
    for r in range(k):
        ff *= n - r
    return (c[k:] * ff)[::-1]  # highest degree first, for np.polyval


def psi_derivative(p, k):
    """k-th derivative of Psi at p (0 <= p < 1)."""
    return np.polyval(_psi_derivative_poly(k), np.asarray(p, dtype=np.float64) - 0.5)


def rs_corrections(p):
    """C0..C4 of the Riemann-Siegel remainder, shape ``(5,) + p.shape``."""
    d = {k: psi_derivative(p, k) for k in (0, 1, 2, 3, 4, 5, 6, 8, 9, 12)}
    pi2 = np.pi ** 2
    c0 = d[0]
    c1 = -d[3] / (96 * pi2)
    c2 = d[2] / (64 * pi2) + d[6] / (18432 * pi2 ** 2)
    c3 = -d[1] / (64 * pi2) - d[5] / (3840 * pi2 ** 2) - d[9] / (5308416 * pi2 ** 3)
    c4 = (d[0] / (128 * pi2) + 19 * d[4] / (24576 * pi2 ** 2)
          + 11 * d[8] / (5898240 * pi2 ** 3) + d[12] / (2038431744 * pi2 ** 4))
    return np.stack([c0, c1, c2, c3, c4])


def _rs_main(ts, th):
    """Main sum 2 sum_{n<=N} n^-1/2 cos(theta - t log n), with N = floor(sqrt(t/2pi))."""
    a = np.sqrt(ts / (2 * np.pi))
    counts = np.floor(a).astype(np.int64)
    nmax = int(counts.max())
    n = np.arange(1, nmax + 1, dtype=np.float64)
    main = 2.0 * kernels.cos_sum_ragged(ts, th, counts, np.log(n), n ** -0.5)
    return main, a, counts


def riemann_siegel_z(ts):
    """Hardy Z(t) for t >= 2 pi (array).

    Returns ``(Z, truncation, rounding)``: the size of the last correction
    kept and a floating-point error estimate for the main sum.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    th = theta(ts)
    th = np.atleast_1d(th)
    main, a, counts = _rs_main(ts, th)
    p = a - counts
    C = rs_corrections(p)
    h = 1.0 / a  # (t/2pi)^(-1/2)
    series = C[4]
    for k in (3, 2, 1, 0):
        series = series * h + C[k]
    sign = np.where(counts % 2 == 1, 1.0, -1.0)  # (-1)^(N-1)
    rem = sign * np.sqrt(h) * series
    last = np.sqrt(h) * np.abs(C[4]) * h ** 4
    # phase errors of size eps * |argument| add up like a random walk
    rounding = 2 * _EPS * (np.abs(th) + ts * np.log(np.maximum(counts, 1))) * np.sqrt(np.log(counts) + 1)
    return main + rem, last, rounding


# ------------------------------------------------------------------ public

def _check_range(t):
    if not np.all(np.isfinite(t)) or np.any(np.abs(t) > T_MAX):
        raise ZetaRangeError(f"height out of range: |t| must be <= {T_MAX:g}")


def zeta_half_line(t, method=None):
    """zeta(1/2 + it) as a :class:`ZetaPoint`.

    ``method`` forces ``"euler_maclaurin"`` or ``"riemann_siegel"``; by default
    RS is used above ``RS_SWITCH`` unless its error estimate exceeds
    ``RS_TOLERANCE`` and EM is affordable.
    """
    t = float(t)
    _check_range(t)
    a = abs(t)
    use_rs = method == "riemann_siegel" or (method is None and a >= RS_SWITCH)
    if use_rs and a < 2 * np.pi:
        raise ZetaRangeError("Riemann-Siegel needs t >= 2 pi")
    if use_rs:
        z, trunc, rnd = riemann_siegel_z([a])
        z, trunc, err = float(z[0]), float(trunc[0]), float(trunc[0] + rnd[0])
        if method is None and trunc > RS_TOLERANCE and a <= EM_FALLBACK_LIMIT:
            use_rs = False
        else:
            value = z * complex(math.cos(theta(a)), -math.sin(theta(a)))
            tag = "riemann_siegel"
    if not use_rs:
        value, err = euler_maclaurin(a)
        tag = "euler_maclaurin"
    if t < 0:
        value = value.conjugate()
    mag = abs(value)
    return ZetaPoint(t, value, math.log(mag) if mag > 0 else -math.inf, tag, float(err))


def hardy_z(t, method=None):
    """Z(t) = exp(i theta(t)) zeta(1/2 + it) (complex; real up to error)."""
    pt = zeta_half_line(t, method)
    return pt.value * complex(math.cos(theta(t)), math.sin(theta(t)))


def log_abs_zeta_many(ts):
    """log|zeta(1/2 + it)| for an array of heights (RS vectorized above the switch)."""
    ts = np.asarray(ts, dtype=np.float64)
    _check_range(ts)
    a = np.abs(ts).ravel()
    out = np.empty_like(a)
    hi = a >= RS_SWITCH
    if np.any(hi):
        z, trunc, _ = riemann_siegel_z(a[hi])
        with np.errstate(divide="ignore"):
            out[hi] = np.log(np.abs(z))
        bad = np.flatnonzero(hi)[(trunc > RS_TOLERANCE) & (a[hi] <= EM_FALLBACK_LIMIT)]
        for i in bad:
            out[i] = zeta_half_line(a[i], "euler_maclaurin").log_abs
    for i in np.flatnonzero(~hi):
        out[i] = zeta_half_line(a[i]).log_abs
    return out.reshape(ts.shape)


def sample_heights(T, n_samples, seed, stream="levelset"):
    """``n_samples`` uniform heights in [T, 2T] from the counter-based stream."""
    u = CounterStream(seed, "zeta_engine", stream).sequence(0, n_samples)
    return T + T * u


# ---------------------------------------------------------------- level sets

@dataclass(frozen=True)
class LevelSetEstimate:
    T: float
    V: float
    fraction: float
    n_samples: int
    std_err: float
    seed: int = 0


def level_set_from_samples(log_values, T, V, seed=0):
    log_values = np.asarray(log_values)
    n = log_values.shape[0]
    frac = float(np.count_nonzero(log_values > V)) / n
    return LevelSetEstimate(T, V, frac, n, math.sqrt(frac * (1 - frac) / n), seed)


def level_set_measure(T, V, n_samples, seed):
    """Monte-Carlo (1/T) meas{t in [T, 2T] : log|zeta(1/2+it)| > V}."""
    if n_samples < 1000:
        raise ValueError("n_samples must be >= 1000")
    values = log_abs_zeta_many(sample_heights(T, n_samples, seed))
    return level_set_from_samples(values, T, V, seed)


def gaussian_tail(v, panels=30, span=15.0):
    """P(N(0,1) > v) by composite Gauss-Legendre quadrature of the density on [v, v + span]."""
    if v < 0:
        return 1.0 - gaussian_tail(-v, panels, span)
    x, w = np.polynomial.legendre.leggauss(20)
    edges = np.linspace(v, v + span, panels + 1)
    half = 0.5 * np.diff(edges)
    pts = (edges[:-1] + half)[:, None] + half[:, None] * x[None, :]
    f = np.exp(-0.5 * pts * pts) / math.sqrt(2 * math.pi)
    return float(np.sum(half[:, None] * w[None, :] * f))


def levelset_experiment(log_t, v_multipliers, n_samples, seed):
    """Fractions at V = v sqrt(loglog T / 2) against the Gaussian tail P(N > v)."""
    T = math.exp(log_t)
    values = log_abs_zeta_many(sample_heights(T, n_samples, seed))
    scale = math.sqrt(0.5 * math.log(log_t))
    rows = []
    for v in v_multipliers:
        est = level_set_from_samples(values, T, v * scale, seed)
        rows.append({"v": v, "V": v * scale, "fraction": est.fraction, "std_err": est.std_err,
                     "gaussian_tail": gaussian_tail(v)})
    fr = [r["fraction"] for r in rows]
    return {"log_t": log_t, "n": n_samples, "seed": seed, "rows": rows,
            "monotone": all(a >= b for a, b in zip(fr, fr[1:]))}


# ------------------------------------------------------------------- moments

def ibp_moment(log_values, k, levels):
    """Right side of E e^{2kX} = int 2k e^{2kv} P(X > v) dv from a sample.

    On each level cell the sampled tail P(X > v) is taken at the left
    endpoint, so the integral of the step function is exact; below the first
    level the closed form E[e^{2k min(X, v_0)}] is used.
    """
    x = np.sort(np.asarray(log_values, dtype=np.float64))
    levels = np.asarray(levels, dtype=np.float64)
    if np.any(np.diff(levels) <= 0):
        raise ValueError("levels must be strictly ascending")
    if x[-1] > levels[-1]:
        raise ValueError("levels span too narrow: sample exceeds the top level")
    n = x.shape[0]
    tail = 1.0 - np.searchsorted(x, levels, side="right") / n  # P(X > v_i)
    ex = np.exp(2 * k * levels)
    body = math.fsum((tail[:-1] * np.diff(ex)).tolist())
    lower = math.fsum(np.exp(2 * k * np.minimum(x, levels[0])).tolist()) / n
    return body + lower


def moment_via_levelsets(T, k, levels, n_samples, seed):
    """(direct mean of |zeta|^{2k}, level-set integral), from one sample set."""
    values = log_abs_zeta_many(sample_heights(T, n_samples, seed, "moments"))
    values = values[np.isfinite(values)]
    direct = math.fsum(np.exp(2 * k * values).tolist()) / values.shape[0]
    return direct, ibp_moment(values, k, levels)


def default_levels(lo=-12.0, hi=12.0, n=4801):
    return np.linspace(lo, hi, n)


# ------------------------------------------------------ short-interval maxima

def max_benchmark(log_t, gamma_exp):
    r = math.sqrt(1 + gamma_exp)
    return log_t ** r / math.log(log_t) ** (1 / (4 * r))


def short_interval_max(t_center, gamma_exp, log_t, grid_step=0.05):
    """Max of |zeta(1/2 + i(t + h))| over a grid on |h| <= (log T)^gamma_exp.

    Returns ``(max, benchmark)``.
    """
    if grid_step > 0.05:
        raise ValueError("grid_step must be <= 0.05")
    width = log_t ** gamma_exp
    m = int(math.ceil(width / grid_step))
    h = np.linspace(-width, width, 2 * m + 1)
    vals = log_abs_zeta_many(t_center + h)
    return float(np.exp(vals.max())), max_benchmark(log_t, gamma_exp)


def short_max_experiment(log_t, gamma_exp, n_centers, seed, ys=(0, 1, 2), grid_step=0.05):
    T = math.exp(log_t)
    centers = sample_heights(T, n_centers, seed, "short_max")
    maxima = np.array([short_interval_max(c, gamma_exp, log_t, grid_step)[0] for c in centers])
    bench = max_benchmark(log_t, gamma_exp)
    r = math.sqrt(1 + gamma_exp)
    rows = [{"y": y, "fraction": float(np.mean(maxima > math.exp(y) * bench)),
             "shape": math.exp(-2 * y * r)} for y in ys]
    return {"log_t": log_t, "gamma": gamma_exp, "centers": n_centers, "seed": seed,
            "benchmark": bench, "max_of_maxima": float(maxima.max()), "rows": rows}
