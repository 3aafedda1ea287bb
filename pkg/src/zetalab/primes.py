"""Prime tables and weighted prime sums.

Only primes and prime squares are ever needed: higher prime powers are
dropped throughout the laboratory.
"""

import math
import struct
from dataclasses import dataclass

import numpy as np

from . import kernels

MAX_LIMIT = 2 ** 32
SEGMENT = 1 << 20
CACHE_MAGIC = b"ZLPT"


class PrimeTableError(ValueError):
    pass


@dataclass(frozen=True)
class PrimeTable:
    limit: int
    primes: np.ndarray  # int64, ascending

    @property
    def prime_squares(self):
        p = self.primes[: self.count_upto(math.isqrt(self.limit))]
        return p * p

    def count_upto(self, x):
        """Number of primes <= x."""
        return int(np.searchsorted(self.primes, math.floor(x), side="right"))

    def __len__(self):
        return int(self.primes.shape[0])

    def covers(self, log_x):
        """True when every prime <= exp(log_x) is in the table."""
        return log_x <= math.log(self.limit) or math.floor(math.exp(log_x)) <= self.limit


@dataclass(frozen=True)
class WeightedSum:
    value: float
    terms: int
    weight_descriptor: str


def _base_primes(n):
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def sieve_primes(limit, segment=SEGMENT):
    """All primes <= ``limit`` by a segmented sieve of Eratosthenes.

    Memory stays O(sqrt(limit) + segment) apart from the output itself.
    """
    limit = int(limit)
    if limit < 2:
        raise PrimeTableError("limit too small: need limit >= 2")
    if limit > MAX_LIMIT:
        raise PrimeTableError(f"limit above {MAX_LIMIT}")
    base = _base_primes(math.isqrt(limit) + 1)
    chunks = []
    for lo in range(0, limit + 1, segment):
        hi = min(lo + segment, limit + 1)
        flags = kernels.sieve_segment(lo, hi, base)
        chunks.append(np.flatnonzero(flags).astype(np.int64) + lo)
    return PrimeTable(limit, np.concatenate(chunks))


def compensated_sum(values):
    """Correctly rounded float sum (Shewchuk/fsum; stronger than Kahan)."""
    return math.fsum(np.asarray(values, dtype=np.float64).tolist())


def _range_primes(table, upto, lower, squared):
    upto = table.limit if upto is None else upto
    if upto > table.limit + 1e-9 * max(1.0, upto):
        raise PrimeTableError(f"table too short: range extends to {upto} beyond limit {table.limit}")
    p = table.primes.astype(np.float64)
    n = p * p if squared else p
    mask = n <= upto
    if lower is not None:
        mask &= n > lower
    return p[mask], n[mask], upto


def weighted_prime_sum(table, sigma, smoothing_log_x=None, squared=False,
                       weight_power=1, sigma_multiple=1, upto=None, lower=None):
    """Sum over n = p (or n = p**2 when ``squared``) in ``(lower, upto]`` of

        w(n)**weight_power / p**(sigma_multiple * sigma),

    with ``w(n) = 1 - log n / smoothing_log_x`` (``w = 1`` without smoothing).
    """
    if sigma < 0.5:
        raise ValueError("sigma must be >= 1/2")
    if weight_power not in (1, 2) or sigma_multiple not in (1, 2, 4):
        raise ValueError("weight_power in {1, 2} and sigma_multiple in {1, 2, 4}")
    p, n, upto = _range_primes(table, upto, lower, squared)
    if smoothing_log_x is not None and upto >= 2 and smoothing_log_x < math.log(upto) - 1e-12:
        raise ValueError("smoothing shorter than range")
    terms = p ** (-sigma_multiple * sigma)
    if smoothing_log_x is not None:
        terms = terms * (1.0 - np.log(n) / smoothing_log_x) ** weight_power
    tag = f"{'p^2' if squared else 'p'}:w^{weight_power if smoothing_log_x else 0}/p^({sigma_multiple}s)"
    return WeightedSum(compensated_sum(terms), int(p.shape[0]), tag)


def mertens_log_sum(table, x):
    """sum_{p <= x} log(p) / p."""
    p, _, _ = _range_primes(table, x, None, False)
    return WeightedSum(compensated_sum(np.log(p) / p), int(p.shape[0]), "p:log(p)/p")


# ---------------------------------------------------------------- cache file

def _encode_varints(values):
    values = np.asarray(values, dtype=np.uint64)
    nbytes = np.ones(values.shape[0], dtype=np.int64)
    v = values >> np.uint64(7)
    while np.any(v):
        nbytes += v > 0
        v >>= np.uint64(7)
    out = np.zeros(int(nbytes.sum()), dtype=np.uint8)
    pos = np.concatenate([[0], np.cumsum(nbytes)[:-1]])
    v = values.copy()
    for b in range(int(nbytes.max()) if values.size else 0):
        live = nbytes > b
        byte = (v[live] & np.uint64(0x7F)).astype(np.uint8)
        more = nbytes[live] > b + 1
        out[pos[live] + b] = byte | (more.astype(np.uint8) << 7)
        v >>= np.uint64(7)
    return out.tobytes()


def _decode_varints(data, count):
    raw = np.frombuffer(data, dtype=np.uint8)
    ends = np.flatnonzero((raw & 0x80) == 0)
    if ends.shape[0] < count:
        raise PrimeTableError("truncated prime cache")
    ends = ends[:count]
    starts = np.concatenate([[0], ends[:-1] + 1])
    values = np.zeros(count, dtype=np.uint64)
    width = int((ends - starts).max()) + 1 if count else 0
    for b in range(width):
        live = starts + b <= ends
        chunk = (raw[starts[live] + b] & 0x7F).astype(np.uint64)
        values[live] |= chunk << np.uint64(7 * b)
    return values


def save_prime_cache(table, path):
    """Binary cache: magic, limit (u64), count (u64), then varint prime gaps."""
    gaps = np.diff(table.primes, prepend=0)
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC + struct.pack("<QQ", table.limit, len(table)))
        fh.write(_encode_varints(gaps))


def load_prime_cache(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != CACHE_MAGIC:
        raise PrimeTableError("not a prime cache file")
    limit, count = struct.unpack("<QQ", data[4:20])
    gaps = _decode_varints(data[20:], count)
    return PrimeTable(int(limit), np.cumsum(gaps).astype(np.int64))
