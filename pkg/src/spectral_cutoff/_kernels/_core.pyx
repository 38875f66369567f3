# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: direct trigonometric sums and dyadic block scans.

Angles are reduced exactly through integer arithmetic, (m*i) mod n, and read
from a cosine/sine table of the n-th roots of unity, so no trig call and no
phase drift occurs inside the O(nL) loop.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, M_PI

cnp.import_array()


def direct_coefficients(const double[::1] y, Py_ssize_t L):
    """c(k,n) = n^-1 sum_i y_i phi_k(i/n), k = 1..L, by direct summation."""
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t i, j, m, idx, mmax
    cdef double acc_c, acc_s, inv_n = 1.0 / n, root2 = sqrt(2.0)
    out = np.zeros(L, dtype=np.float64)
    cdef double[::1] res = out
    if L < 1:
        return out
    cdef double[::1] ct = np.empty(n, dtype=np.float64)
    cdef double[::1] st = np.empty(n, dtype=np.float64)
    for j in range(n):
        ct[j] = cos(2.0 * M_PI * j / n)
        st[j] = sin(2.0 * M_PI * j / n)

    acc_c = 0.0
    for i in range(n):
        acc_c += y[i]
    res[0] = acc_c * inv_n

    mmax = L // 2
    for m in range(1, mmax + 1):
        acc_c = 0.0
        acc_s = 0.0
        idx = 0
        # y[i] sits at t = (i+1)/n
        for i in range(n):
            idx += m
            if idx >= n:
                idx -= n
            acc_c += y[i] * ct[idx]
            acc_s += y[i] * st[idx]
        res[2 * m - 1] = root2 * acc_c * inv_n
        if 2 * m < L:
            res[2 * m] = root2 * acc_s * inv_n
    return out


def block_sums(const double[::1] energy, Py_ssize_t nmax):
    """tau(N) = sum_{k=N+1}^{2N} energy[k-1] for N = 1..nmax."""
    cdef Py_ssize_t N, k
    cdef Py_ssize_t L = energy.shape[0]
    if 2 * nmax > L:
        raise ValueError("energy vector shorter than 2*nmax")
    cdef double[::1] cs = np.empty(L + 1, dtype=np.float64)
    cs[0] = 0.0
    for k in range(L):
        cs[k + 1] = cs[k] + energy[k]
    out = np.empty(nmax, dtype=np.float64)
    cdef double[::1] res = out
    for N in range(1, nmax + 1):
        res[N - 1] = cs[2 * N] - cs[N]
    return out


def argmin_first(const double[::1] curve, double rtol):
    """0-based index of the first entry within rtol*max|curve| of the minimum."""
    cdef Py_ssize_t i, n = curve.shape[0]
    cdef double lo, scale = 0.0, a
    if n == 0:
        raise ValueError("empty curve")
    lo = curve[0]
    for i in range(n):
        if curve[i] < lo:
            lo = curve[i]
        a = curve[i] if curve[i] >= 0 else -curve[i]
        if a > scale:
            scale = a
    for i in range(n):
        if curve[i] <= lo + rtol * scale:
            return i
    return 0
