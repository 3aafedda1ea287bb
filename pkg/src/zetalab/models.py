"""Steinhaus and Gaussian surrogates for the prime partial sums.

In the Steinhaus model ``p^{-i tau}`` is replaced by independent uniform
unit-circle variables X(p), extended multiplicatively (so X(p^2) = X(p)^2).
In the Gaussian model the prime term uses Re Z(p) with Z standard complex
normal and the square term an independent Re Z'(p); the model sum is then
exactly Gaussian with the same variance as the Steinhaus sum.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from . import kernels
from .dirichlet import integer_cutoff, weight_arrays
from .primes import PrimeTableError
from .rng import CounterStream

MODELS = ("steinhaus", "gaussian")
ROW_CHUNK = 4096
BLOCK_ELEMENTS = 1 << 21  # uniforms held per block (16 MiB)


@dataclass(frozen=True)
class PhaseAssignment:
    """One sample omega: a phase per prime (and Gaussian values when gaussian)."""

    primes: np.ndarray
    phases: np.ndarray
    model: str = "steinhaus"
    gaussian_values: np.ndarray = None  # Z(p)
    gaussian_square_values: np.ndarray = None  # Z'(p), used for the p^2 terms

    def real_parts(self):
        """(Re X(p), Re X(p^2)) arrays aligned with ``primes``."""
        if self.model == "steinhaus":
            return np.cos(self.phases), np.cos(2 * self.phases)
        return self.gaussian_values.real, self.gaussian_square_values.real


@dataclass(frozen=True)
class SecondOrderStats:
    variance: float
    covariance: float
    predicted: float
    slack: float
    variance_upper_form: float  # with 1/4 on the square terms

    @property
    def within_slack(self):
        return abs(self.variance - self.predicted) <= self.slack


# ------------------------------------------------------------ weight layout

def aligned_weights(columns, table):
    """Weights of several sums on a common prime axis.

    Parameters
    ----------
    columns : sequence of (DirichletPolySpec, log_lower or None)
        Each column is the sum restricted to ``T_lower < n <= T_ell``.

    Returns
    -------
    primes : ndarray, shape (P,)
    W1, W2 : ndarray, shape (P, C)
        Coefficients of Re X(p) and Re X(p)^2.
    """
    hi = max(integer_cutoff(spec.log_Tell) for spec, _ in columns)
    if hi > table.limit:
        raise PrimeTableError(f"table too short: need primes up to {hi}")
    primes = table.primes[: table.count_upto(hi)]
    W1 = np.zeros((primes.shape[0], len(columns)))
    W2 = np.zeros_like(W1)
    for c, (spec, lower) in enumerate(columns):
        p1, w1, p2, w2 = weight_arrays(spec, table, lower)
        W1[np.searchsorted(primes, p1), c] = w1
        W2[np.searchsorted(primes, p2), c] = w2
    return primes, W1, W2


# ----------------------------------------------------------------- sampling

def _stream(seed, model):
    return CounterStream(seed, "random_models", model)


def draw_assignment(primes, model, seed, trial=0):
    """The phase assignment of one trial (row) of the model stream."""
    P = len(primes)
    st = _stream(seed, model)
    if model == "steinhaus":
        u = st.uniforms(trial, 1, P)[0]
        return PhaseAssignment(np.asarray(primes), 2 * np.pi * u, model)
    if model == "gaussian":
        z, zz = _gaussian_rows(st, trial, 1, P)
        return PhaseAssignment(np.asarray(primes), np.angle(z[0]) % (2 * np.pi), model, z[0], zz[0])
    raise ValueError(f"unknown model {model!r}")


def _gaussian_rows(st, row, n, P):
    from .rng import box_muller

    z = box_muller(st.child("z1").uniforms(row, n, P), st.child("z2").uniforms(row, n, P))
    zz = box_muller(st.child("s1").uniforms(row, n, P), st.child("s2").uniforms(row, n, P))
    return z, zz


def _block(model, seed, W1, W2, row, n, euler_r):
    st = _stream(seed, model)
    P = W1.shape[0]
    if model == "steinhaus":
        u = st.uniforms(row, n, P)
        return kernels.steinhaus_sums(u, W1, W2, euler_r)
    z, zz = _gaussian_rows(st, row, n, P)
    return z.real @ W1 + zz.real @ W2, np.zeros(0)


def model_sums(W1, W2, model, seed, n_rows, row_start=0, euler_r=None, threads=1, chunk=None):
    """Batch of model sums, one row per trial, one column per weight column.

    Row ``i`` is trial ``row_start + i`` of the counter-based stream, so the
    output does not depend on ``threads`` or on the block size.

    Returns
    -------
    sums : ndarray, shape (n_rows, C)
    euler : ndarray, shape (n_rows,) or (0,)
        ``-1/2 sum_p log|1 - r_p X(p)|^2`` when ``euler_r`` is given.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    W1 = np.ascontiguousarray(W1, dtype=np.float64)
    W2 = np.ascontiguousarray(W2, dtype=np.float64)
    if W1.ndim == 1:
        W1, W2 = W1[:, None], W2[:, None]
    if chunk is None:
        chunk = max(1, min(ROW_CHUNK, BLOCK_ELEMENTS // max(W1.shape[0], 1)))
    if euler_r is not None:
        euler_r = np.ascontiguousarray(euler_r, dtype=np.float64)
    starts = list(range(row_start, row_start + n_rows, chunk))

    def work(r0):
        n = min(chunk, row_start + n_rows - r0)
        return _block(model, seed, W1, W2, r0, n, euler_r)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(work, starts))
    else:
        parts = [work(r0) for r0 in starts]
    sums = np.concatenate([p[0] for p in parts]) if parts else np.zeros((0, W1.shape[1]))
    euler = np.concatenate([p[1] for p in parts]) if euler_r is not None and parts else np.zeros(0)
    return sums, euler


def model_partial_sum(spec, table, assignment):
    """S_ell^(j) with cos(t log p) replaced by Re X(p) and cos(2t log p) by Re X(p)^2."""
    p1, w1, p2, w2 = weight_arrays(spec, table)
    idx1 = np.searchsorted(assignment.primes, p1)
    idx2 = np.searchsorted(assignment.primes, p2)
    if (idx1.size and (idx1.max() >= len(assignment.primes) or np.any(assignment.primes[idx1] != p1))):
        raise ValueError("coverage mismatch: assignment lacks primes of the sum")
    re1, re2 = assignment.real_parts()
    return math.fsum((w1 * re1[idx1]).tolist()) + math.fsum((w2 * re2[idx2]).tolist())


def sample_model_partial_sums(spec, table, model, n_trials, seed, log_lower=None, threads=1):
    primes, W1, W2 = aligned_weights([(spec, log_lower)], table)
    return model_sums(W1, W2, model, seed, n_trials, threads=threads)[0][:, 0]


# ------------------------------------------------------- second-order stats

def analytic_second_order(spec_a, spec_b, table, include_squares=True, slack=1.0, log_lower=None):
    """Exact variance of the model sum A and covariance of A with B.

    var = 1/2 sum a^2 p^(-2 sigma) + 1/8 sum a(p^2)^2 p^(-4 sigma); the
    ``variance_upper_form`` uses 1/4 on the square terms (an upper bound).
    """
    if abs(spec_a.log_Tell - spec_b.log_Tell) > 1e-12 * max(1.0, spec_a.log_Tell):
        raise ValueError("both specs must share the cutoff")
    _, W1, W2 = aligned_weights([(spec_a, log_lower), (spec_b, log_lower)], table)
    if not include_squares:
        W2 = np.zeros_like(W2)
    var = 0.5 * math.fsum((W1[:, 0] ** 2).tolist()) + 0.5 * math.fsum((W2[:, 0] ** 2).tolist())
    cov = 0.5 * math.fsum((W1[:, 0] * W1[:, 1]).tolist()) + 0.5 * math.fsum((W2[:, 0] * W2[:, 1]).tolist())
    upper = 0.5 * math.fsum((W1[:, 0] ** 2).tolist()) + math.fsum((W2[:, 0] ** 2).tolist())
    log_log = math.log(spec_a.log_Tell) if spec_a.log_Tell > 0 else -math.inf
    return SecondOrderStats(var, cov, 0.5 * log_log, slack, upper)


# ------------------------------------------------------------ exact moments

def _moments_to_cumulants(m):
    n = m.shape[0] - 1
    k = np.zeros_like(m)
    for r in range(1, n + 1):
        k[r] = m[r] - sum(math.comb(r - 1, i - 1) * k[i] * m[r - i] for i in range(1, r))
    return k


def _cumulants_to_moments(k):
    n = k.shape[0] - 1
    m = np.zeros_like(k)
    m[0] = 1.0
    for r in range(1, n + 1):
        m[r] = sum(math.comb(r - 1, i - 1) * k[i] * m[r - i] for i in range(1, r + 1))
    return m


def exact_moments(w1, w2, max_order):
    """E[Y^r], r = 0..max_order, for Y = sum_p w1_p cos(th_p) + w2_p cos(2 th_p).

    Per-prime moments come from the trapezoid rule with more nodes than the
    trigonometric degree (hence exact), are turned into cumulants, summed over
    the independent primes, and turned back into moments.
    """
    w1 = np.asarray(w1, dtype=np.float64)
    w2 = np.asarray(w2, dtype=np.float64)
    K = 4 * max_order + 8
    th = 2 * np.pi * np.arange(K) / K
    z = np.cos(th)[:, None] * w1[None, :] + np.cos(2 * th)[:, None] * w2[None, :]  # (K, P)
    per_prime = np.empty((max_order + 1, w1.shape[0]))
    power = np.ones_like(z)
    for r in range(max_order + 1):
        per_prime[r] = power.mean(axis=0)
        power = power * z
    total = np.zeros(max_order + 1)
    for p in range(w1.shape[0]):
        total += _moments_to_cumulants(per_prime[:, p])
    return _cumulants_to_moments(total)


def double_factorial_odd(q):
    """(2q)! / (2^q q!) = (2q - 1)!!"""
    return math.factorial(2 * q) // (2 ** q * math.factorial(q))


def moment_bound_check(spec, log_lower, q, table, mode="exact", trials=0, seed=0,
                       ceiling=math.e, log_t=None, model="steinhaus"):
    """Compare E[(S_ell - S_k)^(2q)] with (2q-1)!! (log(beta_ell/beta_k)/2)^q.

    ``mode`` is ``"exact"`` (cumulants), ``"torus"`` (quadrature, <= 5 primes)
    or ``"mc"`` (model samples).  The length condition T_ell^(2q) <= T^(1/4)
    is enforced when ``log_t`` is supplied.
    """
    if log_t is not None and 2 * q * spec.log_Tell > log_t / 4:
        raise ValueError("length condition violated: T_ell^(2q) > T^(1/4)")
    if mode == "torus" and q > 6:
        raise ValueError("torus mode supports q <= 6")
    _, W1, W2 = aligned_weights([(spec, log_lower)], table)
    keep = (W1[:, 0] != 0) | (W2[:, 0] != 0)
    w1, w2 = W1[keep, 0], W2[keep, 0]
    se = 0.0
    if mode == "exact":
        emp = float(exact_moments(w1, w2, 2 * q)[2 * q])
    elif mode == "torus":
        from .torus import exact_trig_moment

        emp = exact_trig_moment(w1, w2, 2 * q)
    elif mode == "mc":
        x = model_sums(W1, W2, model, seed, trials)[0][:, 0] ** (2 * q)
        emp, se = float(x.mean()), float(x.std(ddof=1) / math.sqrt(trials))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if log_lower is None or log_lower <= 0:
        bound = math.inf
    else:
        bound = double_factorial_odd(q) * (0.5 * math.log(spec.log_Tell / log_lower)) ** q
    ratio = emp / bound if bound > 0 else math.inf
    return {
        "target_eq": "moment_bound",
        "q": q,
        "mode": mode,
        "empirical": emp,
        "std_err": se,
        "bound": bound,
        "ratio": ratio,
        "trials": trials,
        "seed": seed,
        "pass": ratio <= ceiling,
    }


def sqrt_moment_constant(spec, table, qs):
    """Smallest C with E[S_1^(2q)] <= sqrt(q) (2q-1)!! (t_1/2 + C)^q over ``qs``."""
    _, W1, W2 = aligned_weights([(spec, None)], table)
    mom = exact_moments(W1[:, 0], W2[:, 0], 2 * max(qs))
    t1 = math.log(spec.log_Tell)
    cs = {q: (mom[2 * q] / (math.sqrt(q) * double_factorial_odd(q))) ** (1 / q) - 0.5 * t1 for q in qs}
    return max(cs.values()), cs


# --------------------------------------------------------------------- MGF

def bessel_i0(x, tol=1e-17):
    """Modified Bessel I0 by its power series sum (x/2)^(2m) / (m!)^2."""
    x = np.asarray(x, dtype=np.float64)
    y = 0.25 * x * x
    term = np.ones_like(y)
    total = np.ones_like(y)
    m = 0
    while True:
        m += 1
        term = term * y / (m * m)
        total = total + term
        if np.all(term <= tol * total) or m > 500:
            break
    return float(total) if total.ndim == 0 else total


def _joint_log_factor(a, b, nodes=64):
    """log E exp(a cos th + b cos 2th), trapezoid rule (spectrally exact here)."""
    th = 2 * np.pi * np.arange(nodes) / nodes
    vals = np.exp(np.cos(th)[:, None] * a[None, :] + np.cos(2 * th)[:, None] * b[None, :])
    return np.log(vals.mean(axis=0))


def log_mgf(w1, w2, lam):
    """log E exp(lam Y) for the Steinhaus sum with coefficient arrays w1, w2."""
    w1 = np.asarray(w1, dtype=np.float64)
    w2 = np.asarray(w2, dtype=np.float64)
    both = (w1 != 0) & (w2 != 0)
    only1 = (w1 != 0) & ~both
    only2 = (w2 != 0) & ~both
    parts = [np.log(bessel_i0(lam * w1[only1])), np.log(bessel_i0(lam * w2[only2]))]
    if np.any(both):
        parts.append(_joint_log_factor(lam * w1[both], lam * w2[both]))
    return math.fsum(np.concatenate(parts).tolist())


def _pnt_tail(spec, lam, log_from, log_to):
    """sum over primes beyond the table of log I0(lam w(p)), via the prime
    density 1/log u; w is tiny there so log I0(x) = x^2/4 - x^4/64."""
    if log_to <= log_from:
        return 0.0
    x, w = np.polynomial.legendre.leggauss(64)
    edges = np.linspace(log_from, log_to, 65)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        v = 0.5 * (a + b) + 0.5 * (b - a) * x
        amp = lam * (1 - v / spec.log_Tj)
        sg = spec.sigma_j
        f = (amp ** 2 / 4 * np.exp((1 - 2 * sg) * v) - amp ** 4 / 64 * np.exp((1 - 4 * sg) * v)) / v
        total += 0.5 * (b - a) * float(np.sum(w * f))
    return total


def mgf_bound_check(k_idx, ell_idx, lam, grid, table, j=None):
    """Exact Steinhaus MGF of S_ell^(j) - S_k^(j) against (log T_ell / log T_k)^(lam^2/4).

    Primes beyond the table (grids at large T) are handled by a prime-density
    integral and the report is marked ``exact = False``.
    """
    from .dirichlet import poly_spec

    if not 0 <= k_idx < ell_idx <= grid.capital_l:
        raise ValueError("need 0 <= k_idx < ell_idx <= L")
    j = ell_idx if j is None else j
    spec = poly_spec(grid, j, ell_idx)
    log_lower = grid.log_T(k_idx) if k_idx > 0 else None
    covered = spec.log_Tell < math.log(table.limit + 1) and integer_cutoff(spec.log_Tell) <= table.limit
    if covered:
        _, W1, W2 = aligned_weights([(spec, log_lower)], table)
        lm = log_mgf(W1[:, 0], W2[:, 0], lam)
        exact = True
    else:
        from .dirichlet import make_spec

        lim_log = math.log(table.limit)
        lo_log = log_lower if log_lower is not None else 0.0
        lm = 0.0
        if lo_log < lim_log:
            part = make_spec(spec.log_Tj, lim_log, sigma=spec.sigma_j)
            _, W1, W2 = aligned_weights([(part, log_lower)], table)
            lm = log_mgf(W1[:, 0], W2[:, 0], lam)
        lm += _pnt_tail(spec, lam, max(lo_log, lim_log), spec.log_Tell)
        exact = False
    if k_idx == 0:
        log_bound = math.inf
    else:
        log_bound = lam * lam / 4 * (grid.t(ell_idx) - grid.t(k_idx))
    ratio = math.exp(lm - log_bound) if math.isfinite(log_bound) else 0.0
    return {
        "target_eq": "mgf_steinhaus",
        "k": k_idx,
        "ell": ell_idx,
        "j": j,
        "lambda": lam,
        "mgf": math.exp(lm),
        "bound": math.exp(log_bound) if math.isfinite(log_bound) else math.inf,
        "ratio": ratio,
        "exact": exact,
    }


# ---------------------------------------------------------------- CLT / KS

def ks_normal(x):
    """Kolmogorov-Smirnov distance between the sample and N(0, 1)."""
    x = np.sort(np.asarray(x, dtype=np.float64))
    n = x.shape[0]
    cdf = ndtr(x)
    up = np.arange(1, n + 1) / n - cdf
    down = cdf - np.arange(0, n) / n
    return float(max(up.max(), down.max()))


def surrogate_clt(spec, table, n_samples, seed, model="steinhaus", threads=1):
    """KS distance of S / sqrt(var) against N(0, 1) for model samples."""
    from scipy.stats import kstwobign

    _, W1, W2 = aligned_weights([(spec, None)], table)
    var = 0.5 * (np.sum(W1 ** 2) + np.sum(W2 ** 2))
    x = model_sums(W1, W2, model, seed, n_samples, threads=threads)[0][:, 0]
    d = ks_normal(x / math.sqrt(var))
    return {
        "target_eq": "selberg_clt",
        "model": model,
        "n": n_samples,
        "seed": seed,
        "variance": float(var),
        "sample_variance": float(x.var(ddof=1)),
        "ks": d,
        "p_value": float(kstwobign.sf(d * math.sqrt(n_samples))),
    }


def steinhaus_cdf(w1, w2, xs, step=0.01, u_max=12.0, nodes=512, chunk=100):
    """Exact CDF of (sum_p w1 cos th_p + w2 cos 2 th_p) / sd at ``xs``.

    Gil-Pelaez inversion of the characteristic function, which factors over
    primes: J0(u w1) when w2 = 0, else a trapezoid rule in th (exact for the
    band-limited integrand up to ``nodes``).  ``u`` runs over the normalized
    scale; the trapezoid in ``u`` aliases at period 2 pi / step and is cut
    where |phi| is negligible (reported as ``phi_tail``).
    """
    from scipy.special import j0

    w1 = np.asarray(w1, dtype=np.float64)
    w2 = np.asarray(w2, dtype=np.float64)
    keep = (w1 != 0) | (w2 != 0)
    w1, w2 = w1[keep], w2[keep]
    sd = math.sqrt(0.5 * (np.sum(w1 ** 2) + np.sum(w2 ** 2)))
    sq = w2 != 0
    th = 2 * np.pi * np.arange(nodes) / nodes
    c1, c2 = np.cos(th), np.cos(2 * th)
    us = np.arange(1, int(round(u_max / step)) + 1) * step
    log_phi = np.empty(us.shape[0], dtype=complex)
    for i in range(0, us.shape[0], chunk):
        u = us[i:i + chunk, None] / sd
        lp = np.sum(np.log(j0(u * w1[None, ~sq]).astype(complex)), axis=1)
        arg = u[:, :, None] * (w1[sq][None, :, None] * c1 + w2[sq][None, :, None] * c2)
        lp += np.sum(np.log(np.exp(1j * arg).mean(axis=2)), axis=1)
        log_phi[i:i + chunk] = lp
    phi = np.exp(log_phi)
    xs = np.asarray(xs, dtype=np.float64)
    # integrand Im(e^{-iux} phi(u)) / u tends to -x at u = 0 (mean zero)
    body = np.imag(np.exp(-1j * np.outer(xs, us)) * phi[None, :]) @ (1.0 / us)
    F = 0.5 - step / np.pi * (body - 0.5 * xs)
    return F, float(abs(phi[-1]))


def exact_ks_distance(spec, table, xs=None):
    """sup_x |F(x) - Phi(x)| for the normalized Steinhaus sum (population value)."""
    _, W1, W2 = aligned_weights([(spec, None)], table)
    xs = np.linspace(-5, 5, 2001) if xs is None else xs
    F, tail = steinhaus_cdf(W1[:, 0], W2[:, 0], xs)
    d = np.abs(F - ndtr(xs))
    i = int(d.argmax())
    return {"distance": float(d[i]), "at": float(xs[i]), "phi_tail": tail}


# ------------------------------------------------------- mean-value checks

def mean_value_tau(b, T, n_samples, seed):
    """Stratified Monte Carlo of E_tau |sum_{n<=N} b_n n^(-i tau)|^2, tau uniform on [T, 2T].

    Returns the estimate, its standard error, sum |b_n|^2, and the exact
    tau-average computed from the closed-form integral of each cross term.
    """
    b = np.asarray(b, dtype=np.float64)
    N = b.shape[0]
    logn = np.log(np.arange(1, N + 1, dtype=np.float64))
    u = CounterStream(seed, "random_models", "mean_value_tau").sequence(0, n_samples)
    tau = T + T * (np.arange(n_samples) + u) / n_samples
    re = kernels.cos_matvec(tau, np.zeros_like(tau), logn, b)[:, 0]
    im = kernels.cos_matvec(tau, np.full_like(tau, np.pi / 2), logn, b)[:, 0]
    vals = re * re + im * im
    # stratified estimator: pair neighbouring strata for the variance
    m = n_samples // 2 * 2
    diffs = vals[:m:2] - vals[1:m:2]
    se = math.sqrt(np.sum(diffs ** 2) / 4) / n_samples * 2 if m else math.nan
    diag = math.fsum((b * b).tolist())
    x = logn[:, None] - logn[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        # (1/T) int_T^{2T} cos(tau x) d tau
        avg = np.where(x == 0, 1.0, (np.sin(2 * T * x) - np.sin(T * x)) / (T * x))
    exact = float(np.sum(np.outer(b, b) * avg))
    return {"estimate": float(vals.mean()), "std_err": se, "diagonal": diag, "exact_average": exact,
            "N": N, "T": T, "n": n_samples, "seed": seed}


DESK_LOG_T = (8.0, 10.0, 12.0, 16.0, 20.0, 25.0, 30.0, 40.0, 60.0, 80.0, 100.0)
DESK_CUTOFFS = (1.0, 1.5, 2.0)


def desk_grids(max_log_TL, log_ts=DESK_LOG_T, cutoffs=DESK_CUTOFFS, k=0.5):
    """Every valid grid from ``log_ts x cutoffs`` whose top checkpoint
    satisfies ``log T_L <= max_log_TL`` (so a sieve can cover it)."""
    from .scale_grid import GridError, GridParams, build_grid

    out = []
    for lt in log_ts:
        for th in cutoffs:
            try:
                g = build_grid(GridParams(lt, k=k, cutoff=th))
            except GridError:
                continue
            if g.log_T(g.capital_l) <= max_log_TL:
                out.append(g)
    return out


def mgf_ratio_table(grids, table, lams=(0.5, 1.0, 2.0)):
    """MGF/bound ratios for all 1 <= k < ell <= j <= L on every grid."""
    rows = []
    for g in grids:
        L = g.capital_l
        for lam in lams:
            for ell in range(2, L + 1):
                for k_idx in range(1, ell):
                    for j in range(ell, L + 1):
                        r = mgf_bound_check(k_idx, ell, lam, g, table, j)
                        r.update(log_t=g.log_t, cutoff=g.cutoff)
                        rows.append(r)
    return rows
