# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Same signatures and results as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, pow, M_PI

cnp.import_array()


def taylor_recurrence(double s, Py_ssize_t length):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(length + 1, dtype=np.float64)
    cdef double[::1] u = out
    cdef double two_s = 2.0 * s
    cdef Py_ssize_t k
    u[0] = 1.0
    if length >= 1:
        u[1] = two_s
    for k in range(1, length):
        u[k + 1] = (two_s * u[k] + (k - 1) * u[k - 1]) / (k + 1)
    return out


def parity_partial_sums(u, Py_ssize_t start, shifts, int power, checkpoints):
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[::1] sh = np.ascontiguousarray(shifts, dtype=np.float64)
    cdef const long long[::1] cp = np.ascontiguousarray(checkpoints, dtype=np.int64)
    cdef Py_ssize_t ns = sh.shape[0], nc = cp.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] res = np.empty((ns, nc), dtype=np.float64)
    cdef double[:, ::1] out = res
    cdef Py_ssize_t i, j, t, nterms = 0, m
    cdef double acc, d, term
    for j in range(nc):
        if cp[j] > nterms:
            nterms = cp[j]
    if uv.shape[0] < start + 2 * (nterms - 1) + 1:
        raise IndexError("mode table too short for requested partial sums")
    for i in range(ns):
        acc = 0.0
        j = 0
        m = start
        for t in range(nterms):
            d = sh[i] + m
            if power == 1:
                term = uv[m] / d
            elif power == 2:
                term = uv[m] / (d * d)
            else:
                term = uv[m] / pow(d, power)
            acc += term
            m += 2
            for j in range(nc):
                if cp[j] == t + 1:
                    out[i, j] = acc
    return res


def f_closed_form(a, b, double f00, Py_ssize_t order, diag_even, diag_odd):
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef const double[::1] de = np.ascontiguousarray(diag_even, dtype=np.float64)
    cdef const double[::1] do = np.ascontiguousarray(diag_odd, dtype=np.float64)
    cdef Py_ssize_t size = order + 1
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] res = np.zeros((size, size), dtype=np.complex128)
    cdef double complex[:, ::1] F = res
    cdef double g = f00 - 1.0
    cdef double sr, sc, s, rr, cc, root, zm, plus, minus, mixed, z
    cdef double sq3 = sqrt(3.0)
    cdef Py_ssize_t r, c
    F[0, 0] = f00
    for r in range(1, size):
        sr = 1.0 if ((r + 1) // 2) % 2 == 0 else -1.0
        z = g * sr * av[r] / sqrt(<double>r)
        if r % 2 == 1:
            F[r, 0] = 1j * z
            F[0, r] = -1j * z
        else:
            F[r, 0] = z
            F[0, r] = z
    for r in range(1, size):
        sr = 1.0 if ((r + 1) // 2) % 2 == 0 else -1.0
        rr = <double>r
        for c in range(1, size):
            sc = 1.0 if ((c + 1) // 2) % 2 == 0 else -1.0
            cc = <double>c
            s = sr * sc
            root = sqrt(rr * cc)
            zm = g * s * av[r] * av[c] / root
            if r == c:
                if r % 2 == 0:
                    F[r, c] = (g * av[r] * av[r] / rr - 0.5 * av[r] * bv[r] - 0.5
                               - (rr / M_PI) * (sq3 / 2.0) * de[r // 2 - 1])
                else:
                    F[r, c] = (g * av[r] * av[r] / rr + 0.5 * av[r] * bv[r] + 0.5
                               + (sq3 / (2.0 * M_PI)) * rr * do[(r + 1) // 2 - 1])
                continue
            if (r % 2) == (c % 2):
                plus = (av[r] * bv[c] + bv[r] * av[c]) / (rr + cc)
                minus = (av[r] * bv[c] - bv[r] * av[c]) / (rr - cc)
                if r % 2 == 0:
                    F[r, c] = zm - 0.5 * s * root * (plus + minus)
                else:
                    F[r, c] = zm + 0.5 * s * root * (plus + minus)
            else:
                mixed = 0.5 * s * root * ((av[r] * bv[c] + bv[r] * av[c]) / (rr - cc)
                                          + (av[r] * bv[c] - bv[r] * av[c]) / (rr + cc))
                if r % 2 == 0:
                    F[r, c] = -1j * mixed - 1j * zm
                else:
                    F[r, c] = -1j * mixed + 1j * zm
    return res
