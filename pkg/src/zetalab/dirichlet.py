"""Smoothed prime partial sums and the pointwise majorant for log|zeta|.

A partial sum is stored as a frequency/weight table

    S(t) = sum_k w_k cos(t f_k),

with one entry per prime (f = log p) and one per prime square
(f = 2 log p, weight halved), so every evaluation path reduces to the
``cos_matvec`` kernel.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .primes import PrimeTable, PrimeTableError

LAMBDA_DEFAULT = 0.5


@dataclass(frozen=True)
class DirichletPolySpec:
    """Abscissa index ``j`` and cutoff index ``ell`` of S_ell^(j).

    The smoothing weight is ``a_j(n) = 1 - log n / log_Tj`` and the sum runs
    over ``p <= T_ell`` and ``p**2 <= T_ell``.
    """

    j: int
    ell: int
    sigma_j: float
    log_Tj: float
    log_Tell: float

    def __post_init__(self):
        if not 0.5 < self.sigma_j <= 1.0:
            raise ValueError("sigma_j must lie in (1/2, 1]")
        if self.log_Tj <= 0:
            raise ValueError("log T_j must be positive")
        if self.log_Tell > self.log_Tj * (1 + 1e-12):
            raise ValueError("cutoff beyond the smoothing length (need T_ell <= T_j)")


def make_spec(log_Tj, log_Tell, j=0, ell=0, lam=LAMBDA_DEFAULT, sigma=None):
    """Spec from raw scales; ``sigma`` overrides ``1/2 + lam / log_Tj``."""
    if sigma is None:
        sigma = 0.5 + lam / log_Tj
    return DirichletPolySpec(j, ell, float(sigma), float(log_Tj), float(log_Tell))


def poly_spec(grid, j, ell, lam=LAMBDA_DEFAULT):
    """S_ell^(j) on a checkpoint grid (``ell = 0`` is the empty sum)."""
    if not 1 <= j <= grid.capital_l or not 0 <= ell <= grid.capital_l:
        raise IndexError("checkpoint index outside the grid")
    return make_spec(grid.log_T(j), grid.log_T(ell), j, ell, lam)


def integer_cutoff(log_x):
    """Largest integer n with log n <= log_x (robust to the last ulp)."""
    if log_x < math.log(2):
        return 1
    n = math.floor(math.exp(log_x) * (1 + 4e-16))
    while math.log(n) > log_x + 1e-15 * max(1.0, log_x):
        n -= 1
    return n


def _check_cover(table, n_max):
    if n_max > table.limit:
        raise PrimeTableError(f"table too short: need primes up to {n_max}, table stops at {table.limit}")


def weight_arrays(spec, table, log_lower=None):
    """Primes and weights of S restricted to ``T_lower < n <= T_ell``.

    Returns
    -------
    p1, w1 : ndarray
        Primes ``p`` in range and ``a_j(p) p^-sigma_j``.
    p2, w2 : ndarray
        Primes with ``p**2`` in range and ``a_j(p^2) p^(-2 sigma_j) / 2``.
    """
    hi = integer_cutoff(spec.log_Tell)
    lo = integer_cutoff(log_lower) if log_lower is not None else 1
    _check_cover(table, hi)
    p = table.primes[: table.count_upto(hi)]
    p1 = p[p > lo]
    p2 = p[p <= math.isqrt(hi)]
    p2 = p2[p2 * p2 > lo]
    lp1, lp2 = np.log(p1.astype(np.float64)), np.log(p2.astype(np.float64))
    w1 = (1.0 - lp1 / spec.log_Tj) * np.exp(-spec.sigma_j * lp1)
    w2 = 0.5 * (1.0 - 2.0 * lp2 / spec.log_Tj) * np.exp(-2.0 * spec.sigma_j * lp2)
    return p1, w1, p2, w2


def prime_terms(spec, table, log_lower=None):
    """Frequencies and weights of S restricted to ``T_lower < n <= T_ell``:
    ``log p`` entries for primes, then ``2 log p`` entries for squares."""
    p1, w1, p2, w2 = weight_arrays(spec, table, log_lower)
    f1, f2 = np.log(p1.astype(np.float64)), 2.0 * np.log(p2.astype(np.float64))
    return np.concatenate([f1, f2]), np.concatenate([w1, w2])


def partial_sums(spec, table, ts):
    """Vectorized S_ell^(j)(t) over an array of heights."""
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    freqs, weights = prime_terms(spec, table)
    return kernels.cos_matvec(ts, np.zeros_like(ts), freqs, weights)[:, 0]


def partial_sum(spec, table, t):
    """S_ell^(j)(t) = Re sum a_j(p) p^(-sigma_j - it) + (1/2) Re sum a_j(p^2) p^(-2 sigma_j - 2it)."""
    return float(partial_sums(spec, table, [t])[0])


def increment(spec, table, ts, log_lower):
    """The same sum restricted to ``T_lower < n <= T_ell`` (the increment Y)."""
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    freqs, weights = prime_terms(spec, table, log_lower)
    return kernels.cos_matvec(ts, np.zeros_like(ts), freqs, weights)[:, 0]


def trajectory_matrix(grid, table, ts, lam=LAMBDA_DEFAULT):
    """All S_ell^(j)(t) for ``1 <= ell <= j <= L``.

    Returns an array of shape ``(len(ts), L, L)`` indexed ``[i, ell-1, j-1]``;
    entries with ``ell > j`` are NaN.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    L = grid.capital_l
    out = np.full((ts.shape[0], L, L), np.nan)
    running = np.zeros((ts.shape[0], L))
    for ell in range(1, L + 1):
        cols = []
        for j in range(ell, L + 1):
            spec = poly_spec(grid, j, ell, lam)
            f, w = prime_terms(spec, table, grid.log_T(ell - 1) if ell > 1 else None)
            cols.append(w)
        block = kernels.cos_matvec(ts, np.zeros_like(ts), f, np.stack(cols, axis=1))
        running[:, ell - 1:] += block
        out[:, ell - 1, ell - 1:] = running[:, ell - 1:]
    return out


# ------------------------------------------------------------------ majorant

def _lambda_equation(lam):
    return math.exp(-lam) - lam - 0.5 * lam * lam


def solve_lambda0(tol=1e-15):
    """Unique positive root of ``exp(-lam) = lam + lam**2 / 2``.

    Bisection on (0, 1) down to a short bracket, then Newton steps.
    """
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if _lambda_equation(mid) > 0:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    for _ in range(20):
        step = _lambda_equation(lam) / (-math.exp(-lam) - 1.0 - lam)
        lam -= step
        if abs(step) < tol:
            break
    return lam


LAMBDA0 = solve_lambda0()


@dataclass(frozen=True)
class MajorantParams:
    log_x: float
    lam: float
    log_t: float

    def __post_init__(self):
        if not math.log(2) - 1e-15 <= self.log_x <= 2 * self.log_t:
            raise ValueError("x out of range: need 2 <= x <= T^2")
        if self.lam < LAMBDA0 - 1e-15:
            raise ValueError(f"x out of range: lambda must be >= lambda_0 = {LAMBDA0:.6f}")

    @property
    def sigma(self):
        return 0.5 + self.lam / self.log_x

    @property
    def linear_term(self):
        return 0.5 * (1.0 + self.lam) * self.log_t / self.log_x


def majorant_spec(params):
    """The majorant's prime sum as a DirichletPolySpec with smoothing length x.

    Lambda(p^m) / log(p^m) = 1/m, so the prime-square weight is the 1/2 already
    built into the partial-sum layout.
    """
    return DirichletPolySpec(0, 0, params.sigma, params.log_x, params.log_x)


def sound_majorant(params, table, t):
    """Prime sum of the majorant plus ``(1 + lam)/2 * log T / log x`` (scalar or array ``t``)."""
    values = partial_sums(majorant_spec(params), table, t) + params.linear_term
    return float(values[0]) if np.ndim(t) == 0 else values


def higher_power_mass(sigma=0.5, prime_limit=10**6):
    """Upper bound on sum_p sum_{m>=3} p^(-m sigma) / m, the part of the
    majorant dropped with the prime powers of exponent >= 3."""
    from .primes import sieve_primes

    p = sieve_primes(prime_limit).primes.astype(np.float64)
    total = 0.0
    for m in range(3, 200):
        terms = p ** (-m * sigma) / m
        total += math.fsum(terms.tolist())
        if terms[0] < 1e-18:
            break
    # primes beyond the table: sum_{p > P} p^(-3 sigma)/3 * (1 + small)
    tail = 2.0 * prime_limit ** (1 - 3 * sigma) / ((3 * sigma - 1) * math.log(prime_limit)) / 3
    return total + tail


@dataclass(frozen=True)
class SlackBudget:
    error_term: float  # C / log x
    higher_powers: float

    @property
    def total(self):
        return self.error_term + self.higher_powers


def slack_budget(params, c_const=2.0):
    return SlackBudget(c_const / params.log_x, higher_power_mass(params.sigma))


def dominance_experiment(log_t, log_x, n_samples, seed, lam=None, c_const=2.0, table=None):
    """Fraction of t in [T, 2T] with log|zeta| above majorant + slack.

    The failure fraction is data: the bound carries an unspecified O-constant.
    """
    from .primes import sieve_primes
    from .rng import CounterStream
    from .zeta import log_abs_zeta_many

    params = MajorantParams(log_x, LAMBDA0 if lam is None else lam, log_t)
    if table is None:
        table = sieve_primes(max(integer_cutoff(log_x), 2))
    T = math.exp(log_t)
    u = CounterStream(seed, "dirichlet", "dominance").sequence(0, n_samples)
    ts = T + T * u
    log_z = log_abs_zeta_many(ts)
    bound = sound_majorant(params, table, ts)
    slack = slack_budget(params, c_const)
    fails = int(np.count_nonzero(log_z > bound + slack.total))
    return {
        "log_t": log_t,
        "log_x": log_x,
        "lambda": params.lam,
        "n": n_samples,
        "seed": seed,
        "slack_error_term": slack.error_term,
        "slack_higher_powers": slack.higher_powers,
        "failures": fails,
        "failure_fraction": fails / n_samples,
        "max_excess": float(np.max(log_z - bound)),
    }


# ------------------------------------------------------------------ CSV batch

def batch_rows(grid, table, ts, pairs, lam=LAMBDA_DEFAULT):
    """Rows ``(t, S_ell^(j)(t) for (j, ell) in pairs)``."""
    ts = np.asarray(ts, dtype=np.float64)
    cols = [partial_sums(poly_spec(grid, j, ell, lam), table, ts) for j, ell in pairs]
    return [[float(t)] + [float(c[i]) for c in cols] for i, t in enumerate(ts)]


def batch_csv(in_path, out_path, grid, table, pairs, lam=LAMBDA_DEFAULT):
    """Read a CSV whose first column is t (header optional); write the S-values."""
    ts = []
    with open(in_path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                ts.append(float(row[0]))
            except ValueError:
                if ts:
                    raise
    rows = batch_rows(grid, table, ts, pairs, lam)
    with open(out_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"S_{ell}^{j}" for j, ell in pairs])
        for r in rows:
            w.writerow([repr(v) for v in r])
    return len(rows)
