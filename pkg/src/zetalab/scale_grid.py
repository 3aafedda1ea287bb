"""Multiscale checkpoint grid and barrier levels.

Scales are handled in ``(log T, beta)`` coordinates: the checkpoint
``T_l = T**beta_l`` is represented by ``log T_l = beta_l * log T`` and never
exponentiated.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_GAMMA = 1.0 / 25.0
DEFAULT_CUTOFF = 2.0

# t_l values are snapped to this dyadic grid so that t_l - t_{l-1} == 1 exactly
_T_QUANTUM = 2.0 ** -44


class GridError(ValueError):
    """Invalid grid parameters."""


@dataclass(frozen=True)
class GridParams:
    """Inputs of the checkpoint grid.

    ``v`` defaults to ``k * log log T``; ``cutoff`` is the exponent theta in
    the rule ``L = 1 + max{l : beta_l <= exp(-theta)}``.
    """

    log_t: float
    k: float = 1.0
    v: float = None
    gamma: float = DEFAULT_GAMMA
    cutoff: float = DEFAULT_CUTOFF

    def __post_init__(self):
        if not self.log_t > math.e:
            raise GridError("degenerate T: log T must exceed e so that log log T > 1")
        if not self.k > 0:
            raise GridError("k must be positive")
        if not 0 < self.gamma < 1 / 20:
            raise GridError("gamma must lie in (0, 1/20)")
        if not self.cutoff > 0:
            raise GridError("cutoff must be positive")
        if self.v is None:
            object.__setattr__(self, "v", self.k * math.log(self.log_t))
        ratio = self.v / math.log(self.log_t)
        if not self.k / 2 <= ratio <= 2 * self.k:
            raise GridError(f"V / log log T = {ratio:.4g} outside [k/2, 2k]")


@dataclass(frozen=True)
class CheckpointGrid:
    log_t: float
    k: float
    v: float
    gamma: float
    cutoff: float
    betas: tuple
    tls: tuple
    cls: tuple
    capital_l: int
    kappa: float

    # 1-based accessors, matching the indexing of the scheme
    def beta(self, ell):
        return self.betas[ell - 1]

    def t(self, ell):
        """log log T_ell; ``t(0)`` is the -inf sentinel for T_0 = 1."""
        if ell == 0:
            return -math.inf
        return self.tls[ell - 1]

    def c(self, ell):
        return self.cls[ell - 1]

    def log_T(self, ell):
        """log T_ell (0 for the T_0 = 1 checkpoint)."""
        if ell == 0:
            return 0.0
        return self.betas[ell - 1] * self.log_t

    @property
    def loglog_t(self):
        return math.log(self.log_t)

    def to_dict(self):
        return {
            "log_t": self.log_t,
            "k": self.k,
            "v": self.v,
            "gamma": self.gamma,
            "cutoff": self.cutoff,
            "betas": list(self.betas),
            "tls": list(self.tls),
            "cls": list(self.cls),
            "capital_l": self.capital_l,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text) if isinstance(text, str) else dict(text)
        return build_grid(GridParams(d["log_t"], d["k"], d["v"], d["gamma"], d["cutoff"]))


@dataclass(frozen=True)
class BarrierSet:
    lower: np.ndarray
    upper: np.ndarray
    lower_prime: np.ndarray
    upper_prime: np.ndarray
    centers: np.ndarray = field(repr=False)
    widths: np.ndarray = field(repr=False)  # c_ell


def build_grid(params):
    """Construct the checkpoint grid for ``params``.

    Raises
    ------
    GridError
        ``"cutoff too large"`` when already ``beta_1 > exp(-theta)``.
    """
    if not isinstance(params, GridParams):
        params = GridParams(**params)
    log_t = params.log_t
    ceiling = math.exp(-params.cutoff)
    root = math.sqrt(log_t)
    if 1.0 / root > ceiling:
        raise GridError(f"cutoff too large: beta_1 = {1.0 / root:.4g} > exp(-{params.cutoff})")
    last_below = 1
    while math.exp(last_below) / root <= ceiling:  # beta_{last_below + 1}
        last_below += 1
    capital_l = 1 + last_below
    betas = tuple(math.exp(ell - 1) / root for ell in range(1, capital_l + 1))
    t1 = round(0.5 * math.log(log_t) / _T_QUANTUM) * _T_QUANTUM
    tls = tuple(t1 + (ell - 1) for ell in range(1, capital_l + 1))
    cls = tuple(b ** (-params.gamma) for b in betas)
    kappa = params.v / math.log(log_t)
    return CheckpointGrid(
        log_t=log_t, k=params.k, v=params.v, gamma=params.gamma, cutoff=params.cutoff,
        betas=betas, tls=tls, cls=cls, capital_l=capital_l, kappa=kappa,
    )


def barrier_bounds(grid):
    """Barriers ``[L, U]`` and the widened ``[L', U']`` for ell = 1..L (0-based arrays)."""
    t = np.asarray(grid.tls)
    c = np.asarray(grid.cls)
    center = grid.kappa * t
    return BarrierSet(
        lower=center - c,
        upper=center + c,
        lower_prime=center - 4 * c,
        upper_prime=center + 4 * c,
        centers=center,
        widths=c,
    )


@dataclass(frozen=True)
class Truncation:
    index: int
    clamped: bool


def truncation_index(grid, ell):
    """Smallest m with beta_m > beta_ell**gamma (the truncation x = T**beta_m).

    Desk-scale grids are short, so when no such m <= L exists the result is
    clamped to L and ``clamped`` is set.
    """
    if not 1 <= ell <= grid.capital_l:
        raise IndexError("ell outside 1..L")
    threshold = grid.beta(ell) ** grid.gamma
    for m in range(1, grid.capital_l + 1):
        if grid.beta(m) > threshold:
            return Truncation(m, False)
    return Truncation(grid.capital_l, True)


def union_count_ok(grid):
    """``#{j >= ell} = L - ell + 1 <= log(1/beta_ell) + 1`` for every ell."""
    return all(
        grid.capital_l - ell + 1 <= math.log(1 / grid.beta(ell)) + 1 + 1e-12
        for ell in range(1, grid.capital_l + 1)
    )


def key_condition_exponents(grid):
    """Length exponents beta_ell * c_ell**20 of the expanded indicator polynomials."""
    return [grid.beta(ell) * grid.c(ell) ** 20 for ell in range(1, grid.capital_l + 1)]
