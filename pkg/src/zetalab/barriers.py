"""Barrier events of the recursive scheme on trajectories of partial sums.

A trajectory batch holds ``S[i, ell-1, j-1] = S_ell^(j)`` for one sample
``i`` (a height tau, or one draw of a surrogate model).  On it we evaluate

* ``H = {log|zeta| > V}`` (for the Steinhaus model ``log|zeta|`` is the
  random Euler product ``-1/2 sum_p log|1 - X(p) p^-1/2|^2`` over p <= T),
* ``G_ell = {S_ell^(j) in [L_ell, U_ell] for all j >= ell} & G_(ell-1)``,
* ``A_ell = {|S_ell^(j) - S_(ell-1)^(j)| <= 2 c_ell for all j >= ell}``,
* the containment in the widened barriers ``[L'_ell, U'_ell]``,

and check the exact identities (partition of H, the widened-barrier
implication, the increment-grid cover) sample by sample.
"""

import csv
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .dirichlet import make_spec, poly_spec, trajectory_matrix
from .models import aligned_weights, analytic_second_order, model_sums
from .scale_grid import barrier_bounds
from .torus import TorusDimensionError, torus_probability
from .zeta import log_abs_zeta_many, sample_heights

SOURCES = ("zeta_tau", "steinhaus", "gaussian")
LENGTH_EXPONENT = 0.25  # T^(2 q beta_m) <= T^(1/4)


# ------------------------------------------------------------ trajectories

@dataclass(frozen=True)
class TrajectorySample:
    """A batch of trajectories.

    ``values`` has shape ``(n, levels, L)`` with ``values[i, ell-1, j-1] =
    S_ell^(j)`` for ``ell <= j`` and NaN below the diagonal; ``levels <= L``
    when only the first checkpoints were sampled.
    """

    source: str
    values: np.ndarray
    log_zeta: np.ndarray = None
    provenance: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def levels(self):
        return self.values.shape[1]

    @property
    def capital_l(self):
        return self.values.shape[2]

    def increments(self, m):
        """``Y_j = S_j^(m) - S_(j-1)^(m)`` for ``j <= min(m, levels)``, with S_0 = 0."""
        top = min(m, self.levels)
        s = self.values[:, :top, m - 1]
        return np.diff(s, axis=1, prepend=0.0)


def _trajectory_columns(grid, levels, lam):
    cols, index = [], []
    for ell in range(1, levels + 1):
        lower = grid.log_T(ell - 1) if ell > 1 else None
        for j in range(ell, grid.capital_l + 1):
            cols.append((poly_spec(grid, j, ell, lam), lower))
            index.append((ell, j))
    return cols, index


def model_trajectories(grid, table, model, n, seed, max_level=None, with_h=True,
                       row_start=0, threads=1, lam=0.5):
    """Trajectories of the Steinhaus or Gaussian model on ``grid``.

    Increments ``S_ell^(j) - S_(ell-1)^(j)`` are sampled as columns sharing
    the prime phases and accumulated in ``ell``.  With ``with_h`` (Steinhaus
    only) the random Euler product over primes ``p <= T`` supplies the
    stand-in for ``log|zeta|``; the prime table must then reach T.
    """
    levels = grid.capital_l if max_level is None else int(max_level)
    if not 1 <= levels <= grid.capital_l:
        raise ValueError("max_level outside 1..L")
    cols, index = _trajectory_columns(grid, levels, lam)
    with_h = with_h and model == "steinhaus"
    axis = cols + [(make_spec(grid.log_t, grid.log_t), None)] if with_h else cols
    primes, W1, W2 = aligned_weights(axis, table)
    W1, W2 = W1[:, :len(cols)], W2[:, :len(cols)]
    euler_r = primes.astype(np.float64) ** -0.5 if with_h else None
    sums, euler = model_sums(W1, W2, model, seed, n, row_start, euler_r, threads)
    L = grid.capital_l
    values = np.full((n, levels, L), np.nan)
    running = np.zeros((n, L))
    for c, (ell, j) in enumerate(index):
        running[:, j - 1] += sums[:, c]
        values[:, ell - 1, j - 1] = running[:, j - 1]
    prov = {"seed": int(seed), "row_start": int(row_start), "model": model, "log_t": grid.log_t,
            "cutoff": grid.cutoff, "k": grid.k, "h_primes": int(primes.shape[0]) if with_h else 0}
    return TrajectorySample(model, values, euler if with_h else None, prov)


def zeta_trajectories(grid, table, n, seed, lam=0.5):
    """Trajectories at heights tau uniform in [T, 2T], with log|zeta(1/2 + i tau)|."""
    ts = sample_heights(math.exp(grid.log_t), n, seed, stream="barriers")
    values = trajectory_matrix(grid, table, ts, lam)
    prov = {"seed": int(seed), "log_t": grid.log_t, "cutoff": grid.cutoff, "k": grid.k}
    return TrajectorySample("zeta_tau", values, log_abs_zeta_many(ts), prov)


def tail_statistic(grid, table, ell, m, model, n, seed, row_start=0, lam=0.5):
    """S_m^(m) - S_ell^(m) restricted to primes p > T_ell (squares included
    only for p > T_ell), so it shares no phase with S_ell^(j)."""
    spec = poly_spec(grid, m, m, lam)
    primes, W1, W2 = aligned_weights([(spec, grid.log_T(ell))], table)
    W2 = np.where((primes > math.exp(grid.log_T(ell)))[:, None], W2, 0.0)
    return model_sums(W1, W2, model, seed, n, row_start)[0][:, 0]


# ----------------------------------------------------------------- events

@dataclass(frozen=True)
class EventFlags:
    in_H: bool
    in_G: tuple
    in_A: tuple
    first_exit: int  # None when the trajectory never leaves the barriers


@dataclass(frozen=True)
class BatchEvents:
    """Event indicators of a whole batch; column ``ell-1`` holds level ``ell``.

    ``first_exit`` is 0 where the sample stays in every ``G_ell``.
    """

    in_H: np.ndarray
    in_G: np.ndarray
    in_A: np.ndarray
    primed: np.ndarray
    above: np.ndarray  # some S_ell^(j) > U_ell
    below: np.ndarray  # some S_ell^(j) < L_ell
    first_exit: np.ndarray

    def flags(self, i):
        fe = int(self.first_exit[i])
        return EventFlags(None if self.in_H is None else bool(self.in_H[i]),
                          tuple(bool(x) for x in self.in_G[i]), tuple(bool(x) for x in self.in_A[i]),
                          fe if fe else None)


def evaluate_events(sample, barriers, V):
    """Direct inequality checks for H, G_ell, A_ell and the widened containment."""
    S = sample.values
    n, levels, _ = S.shape
    shape = (n, levels)
    in_G, in_A, primed = np.zeros(shape, bool), np.zeros(shape, bool), np.zeros(shape, bool)
    above, below = np.zeros(shape, bool), np.zeros(shape, bool)
    prev_G = np.ones(n, bool)
    for ell in range(1, levels + 1):
        cur = S[:, ell - 1, ell - 1:]
        prev = S[:, ell - 2, ell - 1:] if ell > 1 else np.zeros_like(cur)
        lo, hi = barriers.lower[ell - 1], barriers.upper[ell - 1]
        above[:, ell - 1] = np.any(cur > hi, axis=1)
        below[:, ell - 1] = np.any(cur < lo, axis=1)
        inside = np.all((cur >= lo) & (cur <= hi), axis=1)
        in_G[:, ell - 1] = inside & prev_G
        prev_G = in_G[:, ell - 1]
        in_A[:, ell - 1] = np.all(np.abs(cur - prev) <= 2 * barriers.widths[ell - 1], axis=1)
        primed[:, ell - 1] = np.all((cur >= barriers.lower_prime[ell - 1]) & (cur <= barriers.upper_prime[ell - 1]), axis=1)
    out_mask = ~in_G
    first_exit = np.where(out_mask.any(axis=1), out_mask.argmax(axis=1) + 1, 0)
    in_H = None if sample.log_zeta is None else sample.log_zeta > V
    return BatchEvents(in_H, in_G, in_A, primed, above, below, first_exit)


def implication_applicable(grid, ell):
    """Whether G_(ell-1) & A_ell forces the widened containment at level ell.

    With S_0 = 0 the level-1 condition is ``|kappa t_1| <= 2 c_1``; for
    ``ell >= 2`` it is ``(e^gamma - 2) c_ell <= kappa (t_ell - t_(ell-1))
    <= (2 - e^gamma) c_ell``, since ``c_(ell-1) = e^gamma c_ell``.
    """
    k, c = grid.kappa, grid.c(ell)
    if ell == 1:
        return abs(k * grid.t(1)) <= 2 * c
    step = k * (grid.t(ell) - grid.t(ell - 1))
    slack = 4 * c - 2 * c - grid.c(ell - 1)
    return -slack <= step <= slack


def implication_check(events, grid):
    """Count samples in G_(ell-1) & A_ell that leave [L'_ell, U'_ell]."""
    rows = []
    levels = events.in_G.shape[1]
    for ell in range(1, levels + 1):
        prev_G = events.in_G[:, ell - 2] if ell > 1 else np.ones(events.in_G.shape[0], bool)
        hyp = prev_G & events.in_A[:, ell - 1]
        bad = hyp & ~events.primed[:, ell - 1]
        rows.append({"ell": ell, "hypothesis": int(hyp.sum()), "counterexamples": int(bad.sum()),
                     "applicable": bool(implication_applicable(grid, ell))})
    ok = all(r["counterexamples"] == 0 for r in rows if r["applicable"])
    return {"target_eq": "primed_barrier_implication", "levels": rows, "pass": ok}


def partition_check(events):
    """Counts of H & (G_(ell-1) minus G_ell) for ell = 1..L+1 and the upper/lower split.

    Requires a complete trajectory (all L levels) and H flags.
    """
    if events.in_H is None:
        raise ValueError("batch carries no H flags")
    H = events.in_H
    n, L = events.in_G.shape
    G = [np.ones(n, bool)] + [events.in_G[:, i] for i in range(L)] + [np.zeros(n, bool)]
    counts, split = [], []
    for ell in range(1, L + 2):
        piece = H & G[ell - 1] & ~G[ell]
        counts.append(int(piece.sum()))
        if ell <= L:
            upper = int((G[ell - 1] & events.above[:, ell - 1]).sum())
            lower = int((H & G[ell - 1] & events.below[:, ell - 1]).sum())
            split.append({"ell": ell, "piece": counts[-1], "upper": upper, "lower": lower,
                          "covers": upper + lower >= counts[-1]})
    n_h = int(H.sum())
    ok = sum(counts) == n_h and all(s["covers"] for s in split)
    return {"target_eq": "event_partition", "n": n, "n_H": n_h, "pieces": counts,
            "split": split, "pass": ok}


# --------------------------------------------------------- increment grid

@dataclass(frozen=True)
class IncrementGrid:
    """Cells ``[u_j, u_j + 1/Delta_j]`` with ``u_j`` in ``Delta_j^-1 Z``.

    Tuples are stored as integer vectors ``n`` with ``u_j = n_j / Delta_j``
    and are admissible when every partial sum lies in ``[L_j - 1, U_j]``.
    """

    delta: tuple
    lower: tuple  # L_j - 1
    upper: tuple  # U_j
    mesh_scale: float = 1.0

    @classmethod
    def from_grid(cls, grid, mesh_scale=1.0):
        b = barrier_bounds(grid)
        return cls(tuple(mesh_scale * c for c in grid.cls), tuple(b.lower - 1), tuple(b.upper), mesh_scale)

    @property
    def inverse_sum(self):
        return math.fsum(1 / d for d in self.delta)

    def admissible(self, n):
        s = 0.0
        for j, nj in enumerate(n):
            s += nj / self.delta[j]
            if not self.lower[j] <= s <= self.upper[j]:
                return False
        return True

    def tuples(self, ell):
        """Enumerate the admissible integer tuples of length ``ell``."""
        def rec(j, s, prefix):
            if j == ell:
                yield tuple(prefix)
                return
            d = self.delta[j]
            lo = math.ceil((self.lower[j] - s) * d) - 1
            hi = math.floor((self.upper[j] - s) * d) + 1
            for nj in range(lo, hi + 1):
                t = s + nj / d
                if self.lower[j] <= t <= self.upper[j]:
                    yield from rec(j + 1, t, prefix + [nj])

        yield from rec(0, 0.0, [])

    def max_scaled_step(self, ell):
        """max |u_j| / Delta_j over the admissible tuples of length ``ell``."""
        return max((abs(nj / self.delta[j]) / self.delta[j] for t in self.tuples(ell)
                    for j, nj in enumerate(t)), default=0.0)


def sufficient_mesh_scale(grid):
    """Smallest scale s with ``sum_j 1/(s c_j) <= 1``: the cover then holds for every sample."""
    return max(1.0, math.fsum(1 / c for c in grid.cls))


def cover_one(y, inc, ell):
    """Whether some admissible tuple has ``Y_j`` in its cell for all ``j <= ell``.

    Points on a cell boundary belong to both neighbouring cells.
    """
    options = []
    for j in range(ell):
        x = y[j] * inc.delta[j]
        f = math.floor(x)
        options.append((f, f - 1) if f == x else (f,))
    return any(inc.admissible(n) for n in itertools.product(*options))


def increment_grid_cover(sample, inc, ell):
    """Cover flags of shape ``(n, L - ell + 1)``, one column per abscissa m >= ell.

    1: covered; 0: the sample is in the barrier event up to ``ell`` but no
    admissible tuple covers its increments; -1: not applicable (the sample
    leaves some ``[L_j, U_j]``, j <= ell).
    """
    n, L = sample.n, sample.capital_l
    d = np.asarray(inc.delta[:ell])
    lo_b = np.asarray(inc.lower[:ell]) + 1
    hi_b = np.asarray(inc.upper[:ell])
    out = np.empty((n, L - ell + 1), dtype=np.int8)
    for col, m in enumerate(range(ell, L + 1)):
        S = sample.values[:, :ell, m - 1]
        applicable = np.all((S >= lo_b) & (S <= hi_b), axis=1)
        y = np.diff(S, axis=1, prepend=0.0)
        x = y * d
        nfl = np.floor(x)
        ps = np.cumsum(nfl / d, axis=1)
        ok = np.all((ps >= np.asarray(inc.lower[:ell])) & (ps <= hi_b), axis=1)
        edge = np.any(nfl == x, axis=1) & applicable & ~ok
        for i in np.flatnonzero(edge):
            ok[i] = cover_one(y[i], inc, ell)
        out[:, col] = np.where(applicable, ok.astype(np.int8), -1)
    return out


def cover_check(sample, inc):
    """Cover counts for every ell; ``pass`` iff no applicable sample is uncovered."""
    rows = []
    for ell in range(1, sample.levels + 1):
        f = increment_grid_cover(sample, inc, ell)
        rows.append({"ell": ell, "applicable": int((f >= 0).sum()), "failures": int((f == 0).sum())})
    return {"target_eq": "increment_grid_cover", "mesh_scale": inc.mesh_scale, "inverse_sum": inc.inverse_sum,
            "levels": rows, "pass": all(r["failures"] == 0 for r in rows)}


# ------------------------------------------------------- torus oracle

def torus_oracle(primes, weights, boxes, square_weights=None):
    """P(statistics in boxes) under independent uniform phases of ``primes``.

    ``weights`` has shape ``(S, len(primes))``: the coefficient of
    ``Re X(p)`` in each of the S <= 2 linear statistics.
    """
    if len(primes) > 5:
        raise TorusDimensionError(f"dimension too high: {len(primes)} primes > 5")
    return torus_probability(weights, boxes, v=square_weights).value


# --------------------------------------------------------- profiles

def unit_bins(lo, hi):
    """Right endpoints u of unit bins ``(u-1, u]`` covering ``[lo, hi]``."""
    return lo + np.arange(1, math.ceil(hi - lo) + 1, dtype=np.float64)


def _bin_index(x, us):
    # bin k is (us[k] - 1, us[k]]; -1 outside
    k = np.ceil(x - us[0]).astype(np.int64)
    k = np.where(np.isfinite(x), k, -1)
    return np.where((k >= 0) & (k < us.shape[0]), k, -1)


def length_condition(grid, m, q):
    """``T^(2 q beta_m) <= T^(1/4)``."""
    return 2 * q * grid.beta(m) <= LENGTH_EXPONENT


def _prev_good(sample, barriers, ell):
    if ell == 1:
        return np.ones(sample.n, bool)
    return evaluate_events(sample, barriers, math.inf).in_G[:, ell - 2]


def one_point_profile(sample, grid, ell, j, m=None, q=0, q_values=None, enforce_length=True, min_count=100):
    """Weighted histogram ``E[Q^2 1(G_ell(u))] / E[Q^2]`` over unit bins of ``[L'_ell, U'_ell]``.

    ``G_ell(u) = G_(ell-1) & {S_ell^(j) in (u-1, u]}`` and ``Q = (S_m^(m) -
    S_ell^(m))^q`` (or the supplied ``q_values``).  Each bin is compared with
    the profile ``exp(-u^2/t_ell) / sqrt(t_ell)``.

    Raises
    ------
    ValueError
        ``"length condition violated"`` when ``2 q beta_m > 1/4`` and
        ``enforce_length`` is set.
    """
    if not ell <= j <= grid.capital_l:
        raise ValueError("need ell <= j <= L")
    b = barrier_bounds(grid)
    if q_values is None:
        if q == 0:
            Q = np.ones(sample.n)
        else:
            if m is None or not ell <= m <= sample.levels:
                raise ValueError("Q needs a sampled checkpoint m >= ell")
            if enforce_length and not length_condition(grid, m, q):
                raise ValueError(f"length condition violated: 2 q beta_m = {2 * q * grid.beta(m):.4g} > 1/4")
            Q = (sample.values[:, m - 1, m - 1] - sample.values[:, ell - 1, m - 1]) ** q
    else:
        Q = np.asarray(q_values, dtype=np.float64)
    w = Q * Q
    norm = w.mean()
    good = _prev_good(sample, b, ell)
    us = unit_bins(b.lower_prime[ell - 1], b.upper_prime[ell - 1])
    k = _bin_index(sample.values[:, ell - 1, j - 1], us)
    sel = good & (k >= 0)
    mass = np.bincount(k[sel], weights=w[sel], minlength=us.shape[0]) / (sample.n * norm)
    counts = np.bincount(k[sel], minlength=us.shape[0])
    t = grid.t(ell)
    profile = np.exp(-us * us / t) / math.sqrt(t)
    ratio = mass / profile
    keep = counts >= min_count
    G = evaluate_events(sample, b, math.inf).in_G[:, ell - 1]
    indep = w * (G - G.mean())
    return {
        "target_eq": "one_point_profile", "ell": ell, "j": j, "m": m, "q": q, "n": sample.n,
        "bins_u": us.tolist(), "counts": counts.tolist(), "mass": mass.tolist(), "ratio": ratio.tolist(),
        "total_mass": float(mass.sum()),
        "max_ratio": float(ratio[keep].max()) if keep.any() else math.nan,
        "independence": {"joint": float((w * G).mean()), "product": float(norm * G.mean()),
                         "std_err": float(indep.std(ddof=1) / math.sqrt(sample.n))},
        "histogram": histogram_rows(us - 1, us, counts, mass, np.exp(-(us - 0.5) ** 2 / t) / math.sqrt(math.pi * t)),
    }


def covariance_difference(log_Tell, log_Tm, log_Tm_prime, table, lam=0.5):
    """|E[S^2] - E[S S']| for S, S' the sums cut at T_ell with abscissae from T_m, T_m'."""
    a = make_spec(log_Tm, log_Tell, lam=lam)
    b = make_spec(log_Tm_prime, log_Tell, lam=lam)
    st = analytic_second_order(a, b, table)
    return abs(st.variance - st.covariance)


def covariance_difference_sweep(log_Tells, factors, table, lam=0.5, bound=2.0):
    """The covariance difference for every ordered pair of smoothing lengths
    ``log T_m = f log T_ell`` with f from ``factors``."""
    rows = []
    for lt in log_Tells:
        for f, g in itertools.product(factors, repeat=2):
            d = covariance_difference(lt, f * lt, g * lt, table, lam)
            rows.append({"log_Tell": lt, "factor_m": f, "factor_m_prime": g, "difference": d, "pass": d <= bound})
    return {"target_eq": "two_point_covariance", "bound": bound, "rows": rows,
            "max_difference": max(r["difference"] for r in rows), "pass": all(r["pass"] for r in rows)}


def two_point_profile(sample, grid, ell, m, m_prime, table=None, min_count=100):
    """Joint unit-cell histogram of ``(S_ell^(m), S_ell^(m'))`` on ``G_(ell-1)``.

    Cells ``(u, v)`` are compared with ``exp(-(u+v)^2/(4 t_ell)) exp(-(v-u)^2/8)
    / sqrt(log log T)``.  With ``table`` the analytic covariance difference of
    the pair is added.
    """
    if not (ell <= m <= grid.capital_l and ell <= m_prime <= grid.capital_l):
        raise ValueError("need m, m' >= ell")
    b = barrier_bounds(grid)
    good = _prev_good(sample, b, ell)
    us = unit_bins(b.lower_prime[ell - 1], b.upper_prime[ell - 1])
    x = sample.values[:, ell - 1, m - 1]
    y = sample.values[:, ell - 1, m_prime - 1]
    kx, ky = _bin_index(x, us), _bin_index(y, us)
    sel = good & (kx >= 0) & (ky >= 0)
    nb = us.shape[0]
    counts = np.bincount(kx[sel] * nb + ky[sel], minlength=nb * nb).reshape(nb, nb)
    prob = counts / sample.n
    U, V = np.meshgrid(us, us, indexing="ij")
    ref = np.exp(-(U + V) ** 2 / (4 * grid.t(ell))) * np.exp(-(V - U) ** 2 / 8) / math.sqrt(grid.loglog_t)
    ratio = prob / ref
    keep = counts >= min_count
    total = counts.sum()
    xs, ys = x[good], y[good]
    corr = float(np.corrcoef(xs, ys)[0, 1]) if xs.size > 1 and xs.std() > 0 and ys.std() > 0 else 1.0
    out = {
        "target_eq": "two_point_profile", "ell": ell, "m": m, "m_prime": m_prime, "n": sample.n,
        "bins_u": us.tolist(), "counts": counts.tolist(),
        "diagonal_fraction": float(np.trace(counts) / total) if total else math.nan,
        "max_ratio": float(ratio[keep].max()) if keep.any() else math.nan,
        "correlation": corr,
        "max_abs_difference": float(np.max(np.abs(xs - ys))) if xs.size else 0.0,
    }
    if table is not None:
        st = analytic_second_order(poly_spec(grid, m, ell), poly_spec(grid, m_prime, ell), table)
        out["covariance_difference"] = abs(st.variance - st.covariance)
    return out


def model_comparison(grid, table, n, seed, max_level=1, threads=1):
    """G_ell frequencies under Steinhaus and Gaussian phases, with the z-score
    of their difference (combined binomial standard error)."""
    b = barrier_bounds(grid)
    freq = {}
    for model in ("steinhaus", "gaussian"):
        s = model_trajectories(grid, table, model, n, seed, max_level, with_h=False, threads=threads)
        freq[model] = evaluate_events(s, b, math.inf).in_G.mean(axis=0)
    rows = []
    for ell in range(1, max_level + 1):
        p, g = float(freq["steinhaus"][ell - 1]), float(freq["gaussian"][ell - 1])
        se = math.sqrt((p * (1 - p) + g * (1 - g)) / n)
        rows.append({"ell": ell, "log_Tell": grid.log_T(ell), "steinhaus": p, "gaussian": g,
                     "std_err": se, "z": abs(p - g) / se if se > 0 else 0.0})
    return {"n": n, "levels": rows, "max_z": max(r["z"] for r in rows)}


def lower_barrier_schedule(grid, ell, u, m=None):
    """``W = (V - u)/10`` and ``q = ceil(W/5)``, with the length condition
    ``2 q beta_m < 1/2`` re-checked (m defaults to L)."""
    m = grid.capital_l if m is None else m
    W = (grid.v - u) / 10
    q = max(0, math.ceil(W / 5))
    return {"W": W, "q": q, "m": m, "length_ok": 2 * q * grid.beta(m) < 0.5}


# ----------------------------------------------------------------- output

def histogram_rows(lo, hi, counts, density, reference):
    return [{"bin_lo": float(a), "bin_hi": float(b), "count": int(c), "density": float(d),
             "reference_density": float(r)} for a, b, c, d, r in zip(lo, hi, counts, density, reference)]


def histogram_csv(rows):
    """RFC-4180 CSV text with columns bin_lo, bin_hi, count, density, reference_density."""
    buf = io.StringIO()
    cols = ["bin_lo", "bin_hi", "count", "density", "reference_density"]
    w = csv.DictWriter(buf, cols, lineterminator="\r\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(r[k]) if isinstance(r[k], float) else r[k]) for k in cols})
    return buf.getvalue()
