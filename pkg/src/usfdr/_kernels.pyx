# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: Student-t tail probabilities and the family scan.

Mirrors ``usfdr._fallback`` function for function.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, fabs, lgamma, isinf

cnp.import_array()

cdef double CF_EPS = 1e-15
cdef int CF_MAXIT = 300
cdef double FPMIN = 1e-300


cdef inline double _betacf(double a, double b, double x) nogil:
    cdef double qab = a + b, qap = a + 1.0, qam = a - 1.0
    cdef double c = 1.0, d = 1.0 - qab * x / qap, h, num, delta, m2
    cdef int it
    if fabs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for it in range(1, CF_MAXIT + 1):
        m2 = 2.0 * it
        num = it * (b - it) * x / ((qam + m2) * (a + m2))
        d = 1.0 + num * d
        if fabs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + num / c
        if fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c
        num = -(a + it) * (qab + it) * x / ((a + m2) * (qap + m2))
        d = 1.0 + num * d
        if fabs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + num / c
        if fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < CF_EPS:
            break
    return h


cdef inline double _ibeta_pair(double a, double b, double x, double y,
                               double lbeta) nogil:
    # I_x(a, b) with y = 1 - x supplied exactly
    cdef double front
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    if x < (a + 1.0) / (a + b + 2.0):
        front = exp(a * log(x) + b * log(y) - lbeta)
        return front * _betacf(a, b, x) / a
    front = exp(b * log(y) + a * log(x) - lbeta)
    return 1.0 - front * _betacf(b, a, y) / b


cdef inline double _tail2(double t, double df, double lbeta) nogil:
    cdef double t2 = t * t
    if isinf(t2):
        return 0.0
    return _ibeta_pair(0.5 * df, 0.5, df / (df + t2), t2 / (df + t2), lbeta)


def t_two_sided_sf(t, double df):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tt = np.ascontiguousarray(
        np.abs(np.asarray(t, dtype=np.float64)).ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(tt)
    cdef double lbeta = lgamma(0.5 * df) + lgamma(0.5) - lgamma(0.5 * df + 0.5)
    cdef Py_ssize_t i, n = tt.shape[0]
    with nogil:
        for i in range(n):
            out[i] = _tail2(tt[i], df, lbeta)
    return out.reshape(np.shape(t))


def t_cdf(x, double df):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xx = np.ascontiguousarray(
        np.asarray(x, dtype=np.float64).ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(xx)
    cdef double lbeta = lgamma(0.5 * df) + lgamma(0.5) - lgamma(0.5 * df + 0.5)
    cdef double g
    cdef Py_ssize_t i, n = xx.shape[0]
    with nogil:
        for i in range(n):
            g = _tail2(fabs(xx[i]), df, lbeta)
            out[i] = 0.5 * g if xx[i] < 0.0 else 1.0 - 0.5 * g
    return out.reshape(np.shape(x))


def family_scan(p_sorted, screen_sorted, levels, alphas):
    cdef const double[::1] p = np.ascontiguousarray(p_sorted, dtype=np.float64)
    cdef const double[::1] s = np.ascontiguousarray(screen_sorted, dtype=np.float64)
    cdef const double[::1] lv = np.ascontiguousarray(levels, dtype=np.float64)
    cdef const double[::1] al = np.ascontiguousarray(alphas, dtype=np.float64)
    cdef Py_ssize_t m = p.shape[0], nl = lv.shape[0], na = al.shape[0]
    k1_arr = np.zeros((na, nl), dtype=np.int64)
    k2_arr = np.zeros((na, nl), dtype=np.int64)
    size1_arr = np.zeros(nl, dtype=np.int64)
    cdef long long[:, ::1] k1 = k1_arr
    cdef long long[:, ::1] k2 = k2_arr
    cdef long long[::1] size1 = size1_arr
    cdef Py_ssize_t i, j, a
    cdef long long n1, n2, r1, r2, best1, best2
    cdef double lev, alpha
    with nogil:
        for j in range(nl):
            lev = lv[j]
            n1 = 0
            for i in range(m):
                if s[i] >= lev:
                    n1 += 1
            n2 = m - n1
            size1[j] = n1
            for a in range(na):
                alpha = al[a]
                r1 = 0
                r2 = 0
                best1 = 0
                best2 = 0
                for i in range(m):
                    if s[i] >= lev:
                        r1 += 1
                        if p[i] <= alpha * r1 / n1:
                            best1 = r1
                    else:
                        r2 += 1
                        if p[i] <= alpha * r2 / n2:
                            best2 = r2
                k1[a, j] = best1
                k2[a, j] = best2
    return k1_arr, k2_arr, size1_arr


def bh_counts(p_sorted, alphas):
    cdef const double[::1] p = np.ascontiguousarray(p_sorted, dtype=np.float64)
    cdef const double[::1] al = np.ascontiguousarray(alphas, dtype=np.float64)
    cdef Py_ssize_t m = p.shape[0], na = al.shape[0], i, a
    out_arr = np.zeros(na, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef long long best
    cdef double alpha
    with nogil:
        for a in range(na):
            alpha = al[a]
            best = 0
            for i in range(m):
                if p[i] <= alpha * (i + 1) / m:
                    best = i + 1
            out[a] = best
    return out_arr
