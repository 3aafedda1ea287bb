# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.  Each function mirrors one in ``_fallback.py``."""

import numpy as np

from libc.math cimport cos, floor, log, M_PI


DEF EULER_BLOCK = 32

cdef double _OCT_COS[8]
cdef double _OCT_SIN[8]
_OCT_COS[:] = [1.0, 0.0, 0.0, -1.0, -1.0, 0.0, 0.0, 1.0]
_OCT_SIN[:] = [0.0, 1.0, -1.0, 0.0, 0.0, -1.0, 1.0, 0.0]


cdef inline double _cos2pi(double u) nogil:
    """cos(2 pi u): exact reduction to an octant, then branch-free Taylor
    polynomials on [0, pi/4] (truncation below 1e-17)."""
    cdef double v = 8.0 * (u - floor(u))
    cdef int o = <int> v
    cdef double f = v - o
    cdef double odd = o & 1
    cdef double a = (odd + f - 2.0 * odd * f) * (M_PI / 4)
    cdef double z = a * a
    cdef double cp = 1.0 + z * (-1.0 / 2 + z * (1.0 / 24 + z * (-1.0 / 720 + z * (1.0 / 40320
        + z * (-1.0 / 3628800 + z * (1.0 / 479001600 + z * (-1.0 / 87178291200.0
        + z * (1.0 / 20922789888000.0 + z * (-1.0 / 6402373705728000.0)))))))))
    cdef double sp = a * (1.0 + z * (-1.0 / 6 + z * (1.0 / 120 + z * (-1.0 / 5040 + z * (1.0 / 362880
        + z * (-1.0 / 39916800 + z * (1.0 / 6227020800.0 + z * (-1.0 / 1307674368000.0
        + z * (1.0 / 355687428096000.0 + z * (-1.0 / 121645100408832000.0))))))))))
    return _OCT_COS[o] * cp + _OCT_SIN[o] * sp


def cos_matvec(const double[::1] ts, const double[::1] phases,
               const double[::1] freqs, const double[:, ::1] weights):
    """out[i, c] = sum_k weights[k, c] * cos(phases[i] - ts[i] * freqs[k])."""
    cdef Py_ssize_t n = ts.shape[0], K = freqs.shape[0], C = weights.shape[1]
    cdef Py_ssize_t i, k, c
    cdef double x, t, ph
    out = np.zeros((n, C), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(n):
            t = ts[i]
            ph = phases[i]
            for k in range(K):
                x = cos(ph - t * freqs[k])
                for c in range(C):
                    o[i, c] += weights[k, c] * x
    return out


def cos_sum_ragged(const double[::1] ts, const double[::1] phases,
                   const long[::1] counts, const double[::1] freqs,
                   const double[::1] weights):
    """out[i] = sum_{k < counts[i]} weights[k] * cos(phases[i] - ts[i] * freqs[k])."""
    cdef Py_ssize_t n = ts.shape[0], i, k, m
    cdef double acc, t, ph
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            t = ts[i]
            ph = phases[i]
            m = counts[i]
            acc = 0.0
            for k in range(m):
                acc += weights[k] * cos(ph - t * freqs[k])
            o[i] = acc
    return out


def steinhaus_sums(const double[:, ::1] u, const double[:, ::1] w1,
                   const double[:, ::1] w2, const double[::1] euler_r):
    """Linear statistics of Steinhaus phases 2*pi*u.

    sums[i, c] = sum_p w1[p, c] cos(theta) + w2[p, c] cos(2 theta)
    euler[i]   = -1/2 sum_p log(1 - 2 r_p cos(theta) + r_p^2)   (if r given)
    """
    cdef Py_ssize_t n = u.shape[0], P = u.shape[1], C = w1.shape[1]
    cdef Py_ssize_t i, p, c
    cdef bint do_euler = euler_r.shape[0] == P
    cdef double x, x2, r, acc, prod
    sums = np.zeros((n, C), dtype=np.float64)
    euler = np.zeros(n if do_euler else 0, dtype=np.float64)
    cdef double[:, ::1] s = sums
    cdef double[::1] e = euler
    with nogil:
        for i in range(n):
            acc = 0.0
            prod = 1.0
            for p in range(P):
                x = _cos2pi(u[i, p])
                x2 = 2.0 * x * x - 1.0
                for c in range(C):
                    s[i, c] += w1[p, c] * x + w2[p, c] * x2
                if do_euler:
                    # factors lie in [(1 - r)^2, (1 + r)^2] with r <= 2^-1/2, so
                    # EULER_BLOCK of them cannot overflow; one log per block
                    r = euler_r[p]
                    prod *= 1.0 + (r * r - 2.0 * r * x)
                    if (p + 1) % EULER_BLOCK == 0:
                        acc += log(prod)
                        prod = 1.0
            if do_euler:
                e[i] = -0.5 * (acc + log(prod))
    return sums, euler


def sieve_segment(long long lo, long long hi, const long long[::1] base):
    """Primality flags for integers lo <= n < hi, given all primes <= sqrt(hi)."""
    cdef Py_ssize_t size = hi - lo, j
    cdef long long p, start, m
    flags = np.ones(size, dtype=np.uint8)
    cdef unsigned char[::1] f = flags
    with nogil:
        for j in range(base.shape[0]):
            p = base[j]
            if p * p >= hi:
                break
            start = ((lo + p - 1) // p) * p
            if start < p * p:
                start = p * p
            m = start - lo
            while m < size:
                f[m] = 0
                m += p
        m = 0
        while m < size and lo + m < 2:
            f[m] = 0
            m += 1
    return flags
