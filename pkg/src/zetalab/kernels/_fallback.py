"""Pure numpy versions of the compiled kernels (same signatures, same results)."""

import numpy as np

_CHUNK = 1 << 21  # elements per temporary block


def cos_matvec(ts, phases, freqs, weights):
    ts = np.asarray(ts, dtype=np.float64)
    phases = np.asarray(phases, dtype=np.float64)
    freqs = np.asarray(freqs, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    n, K = ts.shape[0], freqs.shape[0]
    out = np.zeros((n, weights.shape[1]))
    if K == 0 or n == 0:
        return out
    rows = max(1, _CHUNK // K)
    for i0 in range(0, n, rows):
        sl = slice(i0, i0 + rows)
        arg = phases[sl, None] - ts[sl, None] * freqs[None, :]
        out[sl] = np.cos(arg) @ weights
    return out


def cos_sum_ragged(ts, phases, counts, freqs, weights):
    ts = np.asarray(ts, dtype=np.float64)
    phases = np.asarray(phases, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.int64)
    out = np.zeros(ts.shape[0])
    if ts.shape[0] == 0:
        return out
    order = np.argsort(counts, kind="stable")
    i = 0
    while i < order.shape[0]:
        m = int(counts[order[i]])
        rows = max(1, _CHUNK // max(m, 1))
        idx = order[i:i + rows]
        m = int(counts[idx].max())
        if m > 0:
            arg = phases[idx, None] - ts[idx, None] * freqs[None, :m]
            terms = np.cos(arg) * weights[None, :m]
            terms[np.arange(m)[None, :] >= counts[idx, None]] = 0.0
            out[idx] = terms.sum(axis=1)
        i += rows
    return out


def steinhaus_sums(u, w1, w2, euler_r):
    u = np.asarray(u, dtype=np.float64)
    x = np.cos(2.0 * np.pi * u)
    sums = x @ w1 + (2.0 * x * x - 1.0) @ w2
    euler_r = np.asarray(euler_r, dtype=np.float64)
    if euler_r.shape[0] == u.shape[1]:
        euler = -0.5 * np.log1p(euler_r * euler_r - 2.0 * euler_r * x).sum(axis=1)
    else:
        euler = np.zeros(0)
    return sums, euler


def sieve_segment(lo, hi, base):
    size = hi - lo
    flags = np.ones(size, dtype=np.uint8)
    for p in np.asarray(base, dtype=np.int64):
        p = int(p)
        if p * p >= hi:
            break
        start = max(((lo + p - 1) // p) * p, p * p)
        flags[start - lo::p] = 0
    if lo < 2:
        flags[: min(2 - lo, size)] = 0
    return flags
