# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops.  Same contracts as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, ceil, floor, M_PI

cnp.import_array()

cdef double _CUTOFF = 40.0


def gauss_moments(double n0, double h, const double[::1] wf, const double[::1] x, double sigma2):
    cdef Py_ssize_t m = wf.shape[0], nx = x.shape[0]
    cdef Py_ssize_t i, j, jlo, jhi
    cdef double norm = 1.0 / sqrt(2.0 * M_PI * sigma2)
    cdef double inv = 0.5 / sigma2
    cdef double cut = _CUTOFF * sqrt(sigma2)
    cdef double d, k, s0, s1, s2
    out = np.zeros((3, nx))
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(nx):
            jlo = <Py_ssize_t>ceil((x[i] - cut - n0) / h)
            jhi = <Py_ssize_t>floor((x[i] + cut - n0) / h)
            if jlo < 0:
                jlo = 0
            if jhi > m - 1:
                jhi = m - 1
            s0 = 0.0
            s1 = 0.0
            s2 = 0.0
            for j in range(jlo, jhi + 1):
                d = n0 + j * h - x[i]
                k = wf[j] * exp(-inv * d * d)
                s0 += k
                s1 += k * d
                s2 += k * d * d
            o[0, i] = s0 * norm
            o[1, i] = s1 * norm
            o[2, i] = s2 * norm
    return out


def orthogonality_sum(double n0, double h, const double[::1] wf, const double[::1] x,
                      const double[::1] wx, const double[::1] mean, double sigma2):
    cdef Py_ssize_t m = wf.shape[0], nx = x.shape[0]
    cdef Py_ssize_t i, j, jlo, jhi
    cdef double norm = 1.0 / sqrt(2.0 * M_PI * sigma2)
    cdef double inv = 0.5 / sigma2
    cdef double cut = _CUTOFF * sqrt(sigma2)
    cdef double d, n, inner, total = 0.0
    with nogil:
        for i in range(nx):
            if wx[i] == 0.0:
                continue
            jlo = <Py_ssize_t>ceil((x[i] - cut - n0) / h)
            jhi = <Py_ssize_t>floor((x[i] + cut - n0) / h)
            if jlo < 0:
                jlo = 0
            if jhi > m - 1:
                jhi = m - 1
            inner = 0.0
            for j in range(jlo, jhi + 1):
                n = n0 + j * h
                d = n - x[i]
                inner += wf[j] * exp(-inv * d * d) * (n - mean[i])
            total += wx[i] * (mean[i] - x[i]) * inner * norm
    return total


def binned_regression_stats(const cnp.int64_t[::1] bins, const double[::1] x1,
                            const double[::1] x2, const double[::1] y, Py_ssize_t n_bins):
    cdef Py_ssize_t i, b, n = bins.shape[0]
    cdef double a1, a2, v
    out = np.zeros((n_bins, 10))
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(n):
            b = bins[i]
            a1 = x1[i]
            a2 = x2[i]
            v = y[i]
            o[b, 0] += 1.0
            o[b, 1] += a1
            o[b, 2] += a2
            o[b, 3] += v
            o[b, 4] += a1 * a1
            o[b, 5] += a1 * a2
            o[b, 6] += a2 * a2
            o[b, 7] += a1 * v
            o[b, 8] += a2 * v
            o[b, 9] += v * v
    return out


def binned_residual_sums(const cnp.int64_t[::1] bins, const double[::1] x1,
                         const double[::1] x2, const double[::1] y,
                         const double[:, ::1] coef, keep):
    cdef const cnp.uint8_t[::1] kp = np.ascontiguousarray(keep, dtype=np.uint8)
    cdef Py_ssize_t i, b, n = bins.shape[0]
    cdef double r, r2, s2 = 0.0, s4 = 0.0
    cdef Py_ssize_t count = 0
    with nogil:
        for i in range(n):
            b = bins[i]
            if not kp[b]:
                continue
            r = y[i] - (coef[b, 0] + coef[b, 1] * x1[i] + coef[b, 2] * x2[i])
            r2 = r * r
            s2 += r2
            s4 += r2 * r2
            count += 1
    return s2, s4, count
