# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the statevector, QUBO and assignment kernels."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin

NAME = "cython"


def apply_1q(amps, int qubit, double complex m00, double complex m01,
             double complex m10, double complex m11):
    cdef double[::1] v = amps.view(np.float64)
    cdef Py_ssize_t size = amps.shape[0]
    cdef Py_ssize_t step = 1 << qubit
    cdef Py_ssize_t base, j, i0, i1
    cdef double ar = m00.real, ai = m00.imag, br = m01.real, bi = m01.imag
    cdef double cr = m10.real, ci = m10.imag, dr = m11.real, di = m11.imag
    cdef double xr, xi, yr, yi
    for base in range(0, size, 2 * step):
        for j in range(step):
            i0 = 2 * (base + j)
            i1 = i0 + 2 * step
            xr = v[i0]
            xi = v[i0 + 1]
            yr = v[i1]
            yi = v[i1 + 1]
            v[i0] = ar * xr - ai * xi + br * yr - bi * yi
            v[i0 + 1] = ar * xi + ai * xr + br * yi + bi * yr
            v[i1] = cr * xr - ci * xi + dr * yr - di * yi
            v[i1 + 1] = cr * xi + ci * xr + dr * yi + di * yr


def apply_xy(amps, int a, int b, double c, double s):
    cdef double[::1] v = amps.view(np.float64)
    cdef Py_ssize_t size = amps.shape[0]
    cdef Py_ssize_t ma = 1 << a
    cdef Py_ssize_t mb = 1 << b
    cdef Py_ssize_t i, j
    cdef double xr, xi, yr, yi
    for i in range(size):
        if (i & ma) and not (i & mb):
            j = i ^ ma ^ mb
            xr = v[2 * i]
            xi = v[2 * i + 1]
            yr = v[2 * j]
            yi = v[2 * j + 1]
            # (c x - i s y, -i s x + c y)
            v[2 * i] = c * xr + s * yi
            v[2 * i + 1] = c * xi - s * yr
            v[2 * j] = c * yr + s * xi
            v[2 * j + 1] = c * yi - s * xr


def apply_diag(amps, factors):
    cdef double[::1] v = amps.view(np.float64)
    cdef const double[::1] f = np.ascontiguousarray(factors, dtype=np.complex128).view(np.float64)
    cdef Py_ssize_t i
    cdef double xr, xi
    for i in range(0, v.shape[0], 2):
        xr = v[i]
        xi = v[i + 1]
        v[i] = xr * f[i] - xi * f[i + 1]
        v[i + 1] = xr * f[i + 1] + xi * f[i]


def controlled_phase_factors(int n_qubits, int control, int start, int width, theta):
    cdef const double[::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef Py_ssize_t size = 1 << n_qubits
    out = np.ones(size, dtype=np.complex128)
    cdef double complex[::1] f = out
    cdef Py_ssize_t i, slot
    cdef Py_ssize_t mask = (1 << width) - 1
    cdef Py_ssize_t cm = 1 << control
    for i in range(size):
        if i & cm:
            slot = (i >> start) & mask
            f[i] = cos(th[slot]) + 1j * sin(th[slot])
    return out


def qubo_energies(const double[:, ::1] Q, const double[::1] c, const cnp.int64_t[::1] group_of,
                  int n_groups, double lam):
    cdef int n = c.shape[0]
    cdef Py_ssize_t size = (<Py_ssize_t> 1) << n
    out = np.empty(size, dtype=np.float64)
    cdef double[::1] e = out
    cdef int[64] setbits
    cdef double[64] gsum
    cdef Py_ssize_t b
    cdef int i, j, cnt, g
    cdef double acc, pen, t
    for b in range(size):
        cnt = 0
        for i in range(n):
            if (b >> i) & 1:
                setbits[cnt] = i
                cnt += 1
        acc = 0.0
        for g in range(n_groups):
            gsum[g] = 0.0
        for i in range(cnt):
            acc += c[setbits[i]] + Q[setbits[i], setbits[i]]
            gsum[group_of[setbits[i]]] += 1.0
            for j in range(i):
                acc += Q[setbits[i], setbits[j]] + Q[setbits[j], setbits[i]]
        pen = 0.0
        for g in range(n_groups):
            t = 1.0 - gsum[g]
            pen += t * t
        e[b] = acc + lam * pen
    return out


def nearest(const double[:, ::1] X, const double[:, ::1] C):
    cdef Py_ssize_t n = X.shape[0], k = C.shape[0], d = X.shape[1]
    out = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] a = out
    cdef Py_ssize_t i, g, j, best
    cdef double dist, bestd, diff
    for i in range(n):
        best = 0
        bestd = 0.0
        for g in range(k):
            dist = 0.0
            for j in range(d):
                diff = X[i, j] - C[g, j]
                dist += diff * diff
            if g == 0 or dist < bestd:
                bestd = dist
                best = g
        a[i] = best
    return out
