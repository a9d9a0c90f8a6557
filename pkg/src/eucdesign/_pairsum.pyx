# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pair-sum kernels; see ``_pairsum_py`` for the reference version."""
import numpy as np
cimport numpy as cnp
from libc.math cimport pow, fmin, fmax, sqrt

cnp.import_array()

RIESZ, POLY_U, POLY_T, INNER_POWER = 0, 1, 2, 3


def pair_moments(unit, radii, weights, alpha, beta, int imax, int jmax):
    cdef const double[:, ::1] u = np.ascontiguousarray(unit, dtype=np.float64)
    cdef const double[::1] r = np.ascontiguousarray(radii, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[::1] al = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef const double[::1] be = np.ascontiguousarray(beta, dtype=np.float64)
    out_arr = np.zeros((imax + 1, jmax + 1))
    cdef double[:, ::1] out = out_arr
    q_arr = np.empty(jmax + 1)
    rad_arr = np.empty(imax + 1)
    cdef double[::1] q = q_arr
    cdef double[::1] rad = rad_arr
    cdef Py_ssize_t n = u.shape[0], dim = u.shape[1]
    cdef Py_ssize_t x, y, k, i, j
    cdef double t, rs, sym
    # each unordered pair once, off-diagonal terms doubled
    for x in range(n):
        for y in range(x, n):
            sym = 1.0 if x == y else 2.0
            t = 0.0
            for k in range(dim):
                t += u[x, k] * u[y, k]
            t = fmax(-1.0, fmin(1.0, t))
            q[0] = 1.0
            if jmax >= 1:
                q[1] = al[1] * t
            for j in range(2, jmax + 1):
                q[j] = al[j] * t * q[j - 1] - be[j] * q[j - 2]
            rs = r[x] * r[y]
            rad[0] = sym * w[x] * w[y]
            for i in range(1, imax + 1):
                rad[i] = rad[i - 1] * rs
            for i in range(imax + 1):
                for j in range(jmax + 1):
                    out[i, j] += rad[i] * q[j]
    return out_arr


cdef inline double _horner(const double[::1] c, double v) nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t k
    for k in range(c.shape[0] - 1, -1, -1):
        acc = acc * v + c[k]
    return acc


def pair_energy(points, unit, weights, int mode, params):
    cdef const double[:, ::1] p = np.ascontiguousarray(points, dtype=np.float64)
    cdef const double[:, ::1] u = np.ascontiguousarray(unit, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[::1] c = np.ascontiguousarray(params, dtype=np.float64)
    if mode not in (RIESZ, POLY_U, POLY_T, INNER_POWER):
        raise ValueError(f"unknown energy mode {mode}")
    cdef Py_ssize_t n = p.shape[0], dim = p.shape[1]
    cdef Py_ssize_t x, y, k
    cdef double total = 0.0, row, v, dk, f
    cdef double half_s = -0.5 * c[0] if c.shape[0] else 0.0
    cdef int lpow = <int>c[0] if (mode == INNER_POWER) else 0
    cdef double s_exp = c[0] if (mode == RIESZ) else 0.0
    # the kernels are symmetric in (x, y), so sum y > x and double
    for x in range(n):
        row = 0.0
        for y in range(x + 1, n):
            v = 0.0
            if mode == RIESZ or mode == POLY_U:
                for k in range(dim):
                    dk = p[x, k] - p[y, k]
                    v += dk * dk
                if mode == RIESZ:
                    if s_exp == 1.0:
                        f = 1.0 / sqrt(v)
                    elif s_exp == 2.0:
                        f = 1.0 / v
                    else:
                        f = pow(v, half_s)
                else:
                    f = _horner(c, v)
            elif mode == POLY_T:
                for k in range(dim):
                    v += u[x, k] * u[y, k]
                f = _horner(c, fmax(-1.0, fmin(1.0, v)))
            else:
                for k in range(dim):
                    v += p[x, k] * p[y, k]
                f = pow(v, lpow)
            row += w[y] * f
        total += w[x] * row
    total *= 2.0
    return total
