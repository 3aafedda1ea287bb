"""Compiled versus numpy kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat N]

Prints the best-of-N wall time for each kernel and backend, the speedup, and
the largest absolute difference between the two backends' outputs.
"""

import argparse
import time

import numpy as np

from zetalab import kernels
from zetalab.primes import sieve_primes


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases():
    rng = np.random.default_rng(0)
    ts = rng.uniform(1e5, 2e5, 2000)
    phases = np.zeros_like(ts)
    freqs = np.log(np.arange(2, 2002, dtype=np.float64))
    weights = rng.normal(size=(2000, 4))
    yield "cos_matvec 2000x2000x4", lambda: kernels.cos_matvec(ts, phases, freqs, weights)

    u = rng.uniform(size=(20_000, 1229))
    table = sieve_primes(10**4)
    p = np.asarray(table.primes, dtype=np.float64)
    w1 = np.stack([p ** -0.5, np.where(p < 100, p ** -0.5, 0.0)], axis=1)
    w2 = 0.5 * w1 / np.sqrt(p)[:, None]
    yield "steinhaus_sums 20000x1229x2", lambda: kernels.steinhaus_sums(u, w1, w2, p ** -0.5)[0]

    base = np.asarray(sieve_primes(10**4).primes, dtype=np.int64)
    yield "sieve_segment 1e7..1e7+2^20", lambda: kernels.sieve_segment(10**7, 10**7 + (1 << 20), base)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    print(f"backends available: {', '.join(kernels.BACKENDS)}")
    print(f"{'kernel':32s} {'compiled':>10s} {'python':>10s} {'speedup':>8s} {'max|diff|':>10s}")
    for name, fn in cases():
        times, outs = {}, {}
        for b in kernels.BACKENDS:
            with kernels.using(b):
                times[b], outs[b] = best_of(fn, args.repeat)
        tc, tp = times.get("compiled", float("nan")), times["python"]
        diff = (float(np.max(np.abs(np.asarray(outs["compiled"], dtype=np.float64)
                                    - np.asarray(outs["python"], dtype=np.float64))))
                if "compiled" in outs else float("nan"))
        print(f"{name:32s} {tc:10.4f} {tp:10.4f} {tp / tc:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
