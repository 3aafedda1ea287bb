"""Polynomial approximations to the indicator of a short window.

The target is a polynomial D with, for |x| <= X,

    1[0 <= x <= 1/Delta] (1 - eps) <= |D(x)|^2 <= 1[-w <= x <= 1/Delta + w] + eps,

where ``w = Delta**-a`` and ``eps = exp(-Delta**(a - 2))``.

Construction.  Mollify the indicator of ``[-w/2, 1/Delta + w/2]`` with a
Gaussian of width ``s``; periodize with period ``P > 2X``; keep the Fourier
modes with frequency ``<= nu_max``; Taylor-expand every exponential to degree
``n``.  The result is a genuine polynomial ``D(x) = sum_l c_l x^l`` with

    c_l = sum_k alpha_k (2 pi i nu_k)^l / l!.

Its degree is far too large to store or to evaluate by Horner (the terms
cancel to within ``exp(2 pi nu_max X)``), so D is evaluated through the
closed form of the mollified window together with a certified bound on
``|D - window|`` (band, periodization and Taylor remainders).  The
coefficient ceiling ``|c_l| <= (2 pi)^l / l! Delta^(2a(l + 2))`` holds for
every l because ``nu_max <= Delta^(2a)`` and ``sum |alpha_k| <= Delta^(4a)``.
"""

import json
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq
from scipy.special import eval_hermitenorm, log_ndtr, ndtr

STORED_COEFFS = 24
MAX_ATTEMPTS = 4


class IndicatorConstructionError(RuntimeError):
    pass


class RangeWarning(UserWarning):
    """Evaluation outside the certified range [-X, X]."""


@dataclass(frozen=True)
class IndicatorPoly:
    """A certified window polynomial (spectral form) or an explicit one.

    Explicit polynomials carry ``coeffs`` only (``spectral = False``) and are
    evaluated by compensated Horner.  Spectral ones are described by the
    mollified window ``[lo, hi]``, the Gaussian width ``s``, the period, the
    frequency cap and the Taylor degree, plus ``error``: a bound on
    ``|D(x) - window(x)|`` valid for |x| <= X.
    """

    delta: float
    a_exp: int
    range_x: float
    degree: int
    coeffs: tuple  # stored low-order monomial coefficients
    spectral: bool = True
    lo: float = 0.0
    hi: float = 0.0
    s: float = 0.0
    period: float = 0.0
    n_modes: int = 0  # K: modes |k| <= K, frequency k / period
    alpha_l1: float = 0.0  # bound on sum |alpha_k|
    error: float = 0.0
    error_parts: dict = field(default_factory=dict)
    perturbation: tuple = ()  # (index, added amount) pairs from corruption

    @property
    def width(self):
        return self.delta ** -self.a_exp

    @property
    def eps(self):
        return math.exp(-self.delta ** (self.a_exp - 2))

    @property
    def nu_max(self):
        return self.n_modes / self.period if self.spectral else 0.0


@dataclass(frozen=True)
class SandwichReport:
    grid_points: int
    lower_violations: int
    upper_violations: int
    max_excess: float


# ------------------------------------------------------------- error bounds

def _log_taylor_tail(z, n):
    """log of sum_{l > n} z^l / l!  (upper bound, needs n + 2 > z)."""
    return (n + 1) * math.log(z) - math.lgamma(n + 2) - math.log1p(-z / (n + 2))


def _log_band_tail(c, K):
    """log of (2/pi) sum_{k > K} exp(-c k^2) / k  (upper bound)."""
    return math.log(2 / math.pi) - math.log(K + 1) - c * K * K - math.log(2 * c * K)


def _log_weighted_band_tail(c, K, period, ell):
    """log of 2 sum_{k > K} exp(-c k^2) / (pi k) (2 pi k / P)^l / l!  (upper bound).

    ``u^(l-1) exp(-c u^2)`` is log-concave, so beyond K it lies below the
    exponential tangent at K; requires ``2 c K > (l - 1) / K``.
    """
    if ell == 0:
        return _log_band_tail(c, K)
    rate = 2 * c * K - (ell - 1) / K
    if rate <= 0:
        return math.inf
    return (math.log(2 / math.pi) + ell * math.log(2 * math.pi / period) - math.lgamma(ell + 1)
            + (ell - 1) * math.log(K) - c * K * K - math.log(rate))


def _alpha_l1_bound(lo, hi, period, K):
    # |alpha_0| = (hi - lo)/P, |alpha_k| <= 1/(pi |k|)
    return (hi - lo) / period + (2 / math.pi) * (math.log(K) + 1.0)


def _log_period_tail(lo, hi, s, period, x_range):
    dist = period - x_range - max(abs(lo), abs(hi))
    return math.log(4.0) + float(log_ndtr(-dist / s))


def _design(delta, a_exp, range_x, tighten):
    eps = math.exp(-delta ** (a_exp - 2))
    log_eps = -delta ** (a_exp - 2)
    w = delta ** -a_exp
    lo, hi = -w / 2, 1 / delta + w / 2
    # Gaussian tails at distance w/2 from each edge: Phi(-z) <= eps / 8
    target = log_eps - math.log(8.0) - tighten * math.log(4.0)
    z = brentq(lambda u: float(log_ndtr(-u)) - target, 0.0, 1e4)
    s = w / (2 * z)
    period = 2 * range_x + 2.0
    log_budget = log_eps - math.log(32.0) - tighten * math.log(4.0)
    # band truncation: |alpha_k| <= exp(-c k^2) / (pi k)
    c = 2 * math.pi ** 2 * s * s / period ** 2
    k_lo, K = 0, max(1, math.ceil(math.sqrt(-log_budget / c)))
    while _log_band_tail(c, K) > log_budget:
        K *= 2
    while K - k_lo > 1:  # smallest K meeting the band budget
        mid = (k_lo + K) // 2
        if _log_band_tail(c, mid) > log_budget:
            k_lo = mid
        else:
            K = mid
    # the stored low-order coefficients must also be those of the truncated
    # series: the weighted band tails sum_{|k|>K} |alpha_k| (2 pi nu_k)^l / l!
    # are pushed below 1e-15 of each coefficient
    targets = [abs(window_coefficient(lo, hi, s, l)) for l in range(STORED_COEFFS)]
    while True:
        tails = [_log_weighted_band_tail(c, K, period, l) for l in range(STORED_COEFFS)]
        if all(t <= (math.log(1e-15 * v) if v > 0 else log_budget) for t, v in zip(tails, targets)):
            break
        K = math.ceil(K * 1.02) + 1
    alpha = _alpha_l1_bound(lo, hi, period, K)
    zt = 2 * math.pi * (K / period) * range_x
    log_target = log_budget - math.log(alpha)
    n_lo, n_hi = int(zt) + 2, int(zt) + 2
    while _log_taylor_tail(zt, n_hi) > log_target:
        n_hi = 2 * n_hi
    while n_hi - n_lo > 1:  # smallest n meeting the Taylor budget
        mid = (n_lo + n_hi) // 2
        if _log_taylor_tail(zt, mid) > log_target:
            n_lo = mid
        else:
            n_hi = mid
    n = n_hi
    parts = {
        "band": math.exp(_log_band_tail(c, K)),
        "taylor": alpha * math.exp(_log_taylor_tail(zt, n)),
        "period": math.exp(_log_period_tail(lo, hi, s, period, range_x)),
        "mollifier_z": z,
    }
    error = parts["band"] + parts["taylor"] + parts["period"]
    parts["coefficients"] = [math.exp(t) for t in tails]
    return dict(lo=lo, hi=hi, s=s, period=period, n_modes=K, alpha_l1=alpha,
                degree=n, error=error, error_parts=parts, eps=eps)


def window_coefficient(lo, hi, s, ell):
    """ell-th Taylor coefficient at 0 of Phi((hi - x)/s) - Phi((lo - x)/s)."""
    if ell == 0:
        return float(ndtr(hi / s) - ndtr(lo / s))

    def part(c):
        u = c / s
        log_phi = -0.5 * u * u - 0.5 * math.log(2 * math.pi)
        he = float(eval_hermitenorm(ell - 1, u))
        if he == 0.0 or log_phi - ell * math.log(s) - math.lgamma(ell + 1) < -740:
            return 0.0
        return he * math.exp(log_phi - ell * math.log(s) - math.lgamma(ell + 1))

    return -(part(hi) - part(lo))


def build_indicator_poly(delta, a_exp=5, range_x=None):
    """Construct the certified window polynomial.

    ``range_x`` defaults to ``10 * delta``.

    Raises
    ------
    ValueError
        ``"delta too small"`` unless ``delta**(a_exp - 2) >= 10``.
    IndicatorConstructionError
        ``"construction failed validation"`` when the ceilings or the
        sandwich fail after ``MAX_ATTEMPTS`` tightenings.
    """
    delta = float(delta)
    a_exp = int(a_exp)
    range_x = 10 * delta if range_x is None else float(range_x)
    if a_exp < 3 or delta <= 1 or delta ** (a_exp - 2) < 10:
        raise ValueError("delta too small: need a >= 3 and delta**(a-2) >= 10")
    for attempt in range(MAX_ATTEMPTS):
        d = _design(delta, a_exp, range_x, attempt)
        coeffs = tuple(window_coefficient(d["lo"], d["hi"], d["s"], l)
                       for l in range(min(STORED_COEFFS, d["degree"] + 1)))
        poly = IndicatorPoly(delta, a_exp, range_x, d["degree"], coeffs, True, d["lo"], d["hi"],
                             d["s"], d["period"], d["n_modes"], d["alpha_l1"], d["error"], d["error_parts"])
        audit = ceiling_audit(poly)
        if not (audit["degree_ok"] and audit["certificate_ok"] and audit["stored_ok"]):
            continue
        rep = validate_sandwich(poly, 2000)
        if rep.lower_violations == 0 and rep.upper_violations == 0:
            return poly
    raise IndicatorConstructionError("construction failed validation")


def explicit_poly(coeffs, delta=3.0, a_exp=5, range_x=30.0):
    """An explicit (stored-coefficient) polynomial, for small degrees."""
    coeffs = tuple(float(c) for c in coeffs)
    return IndicatorPoly(delta, a_exp, range_x, len(coeffs) - 1, coeffs, spectral=False)


def corrupt_coefficient(poly, index, factor=2.0):
    """The polynomial with coefficient ``index`` multiplied by ``factor``."""
    if index >= len(poly.coeffs):
        raise IndexError("only stored coefficients can be corrupted")
    if not poly.spectral:
        c = list(poly.coeffs)
        c[index] *= factor
        return replace(poly, coeffs=tuple(c))
    added = (factor - 1.0) * poly.coeffs[index]
    c = list(poly.coeffs)
    c[index] *= factor
    return replace(poly, coeffs=tuple(c), perturbation=poly.perturbation + ((index, added),))


# --------------------------------------------------------------- evaluation

def horner(coeffs, x):
    """Compensated Horner scheme (error-free product and sum transforms)."""
    x = np.asarray(x, dtype=np.float64)
    split = 134217729.0  # 2^27 + 1

    def two_prod(a, b):
        p = a * b
        t = split * a
        ah = t - (t - a)
        al = a - ah
        t = split * b
        bh = t - (t - b)
        bl = b - bh
        return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl

    def two_sum(a, b):
        s = a + b
        z = s - a
        return s, (a - (s - z)) + (b - z)

    r = np.full_like(x, coeffs[-1])
    comp = np.zeros_like(x)
    for c in reversed(coeffs[:-1]):
        p, pe = two_prod(r, x)
        r, se = two_sum(p, np.full_like(x, c))
        comp = comp * x + (pe + se)
    return r + comp


def power_sum(coeffs, x):
    """sum_l c_l x^l by explicit powers and an exactly rounded sum."""
    return math.fsum(c * x ** l for l, c in enumerate(coeffs))


def _window(poly, x):
    """(value, deficit = 1 - value) of the mollified window, both accurate."""
    lo_u = (x - poly.lo) / poly.s
    hi_u = (poly.hi - x) / poly.s
    deficit = ndtr(-lo_u) + ndtr(-hi_u)
    value = np.where(deficit < 0.5, 1.0 - deficit, ndtr(hi_u) - ndtr(-lo_u))
    return value, deficit


def _perturbation(poly, x):
    out = np.zeros_like(x)
    for index, amount in poly.perturbation:
        out = out + amount * x ** index
    return out


def eval_poly(poly, x):
    """|D(x)|^2 (the central value for spectral polynomials).

    Evaluation outside [-X, X] is allowed but raises a :class:`RangeWarning`.
    """
    xa = np.asarray(x, dtype=np.float64)
    if np.any(np.abs(xa) > poly.range_x):
        warnings.warn("outside certified range", RangeWarning, stacklevel=2)
    if poly.spectral:
        v = _window(poly, xa)[0] + _perturbation(poly, xa)
    else:
        v = horner(poly.coeffs, xa)
    out = v * v
    return float(out) if np.ndim(x) == 0 else out


def enclosure(poly, x):
    """Certified (lower, upper) bounds for |D(x)|^2."""
    xa = np.asarray(x, dtype=np.float64)
    value, _ = _window(poly, xa)
    v = value + _perturbation(poly, xa)
    e = poly.error
    lo = np.where(np.abs(v) > e, (np.abs(v) - e) ** 2, 0.0)
    return lo, (np.abs(v) + e) ** 2


def fourier_alphas(poly, k):
    """Fourier coefficients alpha_k of the periodized, mollified window."""
    k = np.asarray(k, dtype=np.float64)
    nu = k / poly.period
    with np.errstate(invalid="ignore", divide="ignore"):
        h = (np.exp(-2j * np.pi * nu * poly.lo) - np.exp(-2j * np.pi * nu * poly.hi)) / (2j * np.pi * nu)
    h = np.where(k == 0, poly.hi - poly.lo, h)
    return h * np.exp(-2 * np.pi ** 2 * poly.s ** 2 * nu ** 2) / poly.period


def fourier_value(poly, x, chunk=1 << 16):
    """sum_{|k| <= K} alpha_k exp(2 pi i k x / P) by direct summation."""
    total = 0.0
    for start in range(-poly.n_modes, poly.n_modes + 1, chunk):
        k = np.arange(start, min(start + chunk, poly.n_modes + 1))
        total += np.sum(fourier_alphas(poly, k) * np.exp(2j * np.pi * k * x / poly.period))
    return complex(total)


# --------------------------------------------------------------- validation

def boundary_points(poly):
    d, w = 1 / poly.delta, poly.width
    return np.array([0.0, d, -w, w, d - w, d + w])


def validation_grid(poly, n_grid):
    return np.concatenate([np.linspace(-poly.range_x, poly.range_x, n_grid), boundary_points(poly)])


def sandwich_margins(poly, x):
    """(lower_margin, upper_margin): both >= 0 where the sandwich holds.

    Margins are formed from the window deficit ``1 - window`` and its tails,
    which are computed to full relative precision, so inequalities with
    slack far below the double-precision unit are decided correctly.
    """
    x = np.asarray(x, dtype=np.float64)
    eps = poly.eps
    if poly.spectral:
        value, deficit = _window(poly, x)
        pert = _perturbation(poly, x)
        e = poly.error
        # D = value + pert + r with |r| <= e
        d_low = deficit - pert + e  # 1 - (smallest possible D)
        d_up = deficit - pert - e  # 1 - (largest possible D)
        top = np.maximum(np.abs(value + pert) + e, 0.0)
    else:
        v = horner(poly.coeffs, x)
        d_low = d_up = 1.0 - v
        top = np.abs(v)
    inner = (x >= 0) & (x <= 1 / poly.delta)
    wide = (x >= -poly.width) & (x <= 1 / poly.delta + poly.width)
    # lower: (1 - d_low)^2 >= 1 - eps  <=>  eps - d_low (2 - d_low) >= 0
    lower = np.where(inner, np.where(d_low < 1, eps - d_low * (2 - d_low), -np.inf), np.inf)
    # upper inside the wide window: top^2 <= 1 + eps; D >= -(...) side via top
    up_wide = np.where(np.abs(d_up) < 0.5, eps + d_up * (2 - d_up), 1 + eps - top * top)
    up_wide = np.minimum(up_wide, 1 + eps - top * top) if not poly.spectral else np.where(
        value + pert > 0, up_wide, 1 + eps - top * top)
    upper = np.where(wide, up_wide, eps - top * top)
    return lower, upper


def validate_sandwich(poly, n_grid=10_000):
    """Count violations on ``n_grid`` uniform points of [-X, X] plus the six
    boundary points {0, 1/Delta, +-Delta^-a offsets}."""
    if n_grid < 10:
        raise ValueError("n_grid too small")
    x = validation_grid(poly, n_grid)
    lower, upper = sandwich_margins(poly, x)
    excess = np.maximum(-lower, -upper)
    return SandwichReport(int(x.shape[0]), int(np.count_nonzero(lower < 0)),
                          int(np.count_nonzero(upper < 0)), float(np.max(excess)))


def ceiling_audit(poly):
    """Degree bound, the all-l coefficient certificate, and the stored coefficients."""
    D, a = poly.delta, poly.a_exp
    log_deg_bound = math.log(100 * poly.range_x) + 3 * a * math.log(D)
    out = {
        "degree": poly.degree,
        "log_degree_bound": log_deg_bound,
        "degree_ok": math.log(max(poly.degree, 1)) < log_deg_bound,
    }
    if poly.spectral:
        out["nu_max"] = poly.nu_max
        out["alpha_l1"] = poly.alpha_l1
        out["certificate_ok"] = poly.nu_max <= D ** (2 * a) and poly.alpha_l1 <= D ** (4 * a)
    else:
        out["certificate_ok"] = True
    worst = -math.inf
    for ell, c in enumerate(poly.coeffs):
        if c == 0:
            continue
        log_ceiling = ell * math.log(2 * math.pi) - math.lgamma(ell + 1) + 2 * a * (ell + 2) * math.log(D)
        worst = max(worst, math.log(abs(c)) - log_ceiling)
    out["stored_log_ratio_max"] = worst
    out["stored_ok"] = worst <= 0
    return out


def fourth_moment_budget(delta, a_exp, ys):
    """log of sum_l (2 pi)^l / l! 2 Delta^(2a(l+2)) y^l (= 2 Delta^(4a) e^(2 pi Delta^(2a) y))
    against log exp(9 pi Delta^(2a) (y + 4 Delta))."""
    ys = np.asarray(ys, dtype=np.float64)
    b = delta ** (2 * a_exp)
    lhs = math.log(2.0) + 4 * a_exp * math.log(delta) + 2 * math.pi * b * ys
    rhs = 9 * math.pi * b * (ys + 4 * delta)
    return lhs, rhs, bool(np.all(lhs <= rhs))


def smallest_valid_delta(a_exp, deltas, x_factor=10.0):
    """First ``delta`` in ``deltas`` for which the construction validates."""
    for d in deltas:
        try:
            poly = build_indicator_poly(d, a_exp, x_factor * d)
        except (ValueError, IndicatorConstructionError):
            continue
        rep = validate_sandwich(poly, 10_000)
        if rep.lower_violations == 0 and rep.upper_violations == 0:
            return d
    return None


# ------------------------------------------------------------ serialization

def to_json(poly):
    import mpmath

    with mpmath.workdps(40):
        coeffs = [mpmath.nstr(mpmath.mpf(c), 30) for c in poly.coeffs]
    return json.dumps({
        "delta": poly.delta,
        "a": poly.a_exp,
        "x_range": poly.range_x,
        "coeffs": coeffs,
        "degree": poly.degree,
        "spectral": poly.spectral,
    }, sort_keys=True)


def from_json(text):
    d = json.loads(text)
    if d.get("spectral", True):
        poly = build_indicator_poly(d["delta"], d["a"], d["x_range"])
        if poly.degree != d["degree"]:
            raise ValueError("serialized polynomial does not match its construction")
        return poly
    return explicit_poly([float(c) for c in d["coeffs"]], d["delta"], d["a"], d["x_range"])
