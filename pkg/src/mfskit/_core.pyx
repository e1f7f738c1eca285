# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pairwise kernel blocks (hot inner loops of matrix assembly).

Mirrors ``mfskit._core_py``: float64 point arrays in, full pairwise blocks
out, ``ValueError`` when any pair falls inside the squared guard ``eps2``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log, sqrt

cnp.import_array()

cdef double TWO_PI = 6.283185307179586476925286766559
cdef double FOUR_PI = 12.566370614359172953850573533118


cdef inline void _raise_singular() except *:
    raise ValueError("kernel evaluated inside the singularity guard")


def lap2_val(double[:, ::1] x, double[:, ::1] y, double eps2):
    cdef Py_ssize_t nx = x.shape[0], ny = y.shape[0], i, j
    cdef double dx, dy, r2
    cdef bint bad = False
    out_arr = np.empty((nx, ny), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(nx):
            for j in range(ny):
                dx = x[i, 0] - y[j, 0]
                dy = x[i, 1] - y[j, 1]
                r2 = dx * dx + dy * dy
                if r2 <= eps2:
                    bad = True
                out[i, j] = log(r2) / (2.0 * TWO_PI)
    if bad:
        _raise_singular()
    return out_arr


def lap3_val(double[:, ::1] x, double[:, ::1] y, double eps2):
    cdef Py_ssize_t nx = x.shape[0], ny = y.shape[0], i, j
    cdef double d0, d1, d2, r2
    cdef bint bad = False
    out_arr = np.empty((nx, ny), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(nx):
            for j in range(ny):
                d0 = x[i, 0] - y[j, 0]
                d1 = x[i, 1] - y[j, 1]
                d2 = x[i, 2] - y[j, 2]
                r2 = d0 * d0 + d1 * d1 + d2 * d2
                if r2 <= eps2:
                    bad = True
                    r2 = 1.0
                out[i, j] = -1.0 / (FOUR_PI * sqrt(r2))
    if bad:
        _raise_singular()
    return out_arr


def lap2_dn(double[:, ::1] x, double[:, ::1] nrm, double[:, ::1] y, double eps2):
    cdef Py_ssize_t nx = x.shape[0], ny = y.shape[0], i, j
    cdef double dx, dy, r2
    cdef bint bad = False
    out_arr = np.empty((nx, ny), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(nx):
            for j in range(ny):
                dx = x[i, 0] - y[j, 0]
                dy = x[i, 1] - y[j, 1]
                r2 = dx * dx + dy * dy
                if r2 <= eps2:
                    bad = True
                    r2 = 1.0
                out[i, j] = (nrm[i, 0] * dx + nrm[i, 1] * dy) / (TWO_PI * r2)
    if bad:
        _raise_singular()
    return out_arr


def lap3_dn(double[:, ::1] x, double[:, ::1] nrm, double[:, ::1] y, double eps2):
    cdef Py_ssize_t nx = x.shape[0], ny = y.shape[0], i, j
    cdef double d0, d1, d2, r2
    cdef bint bad = False
    out_arr = np.empty((nx, ny), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(nx):
            for j in range(ny):
                d0 = x[i, 0] - y[j, 0]
                d1 = x[i, 1] - y[j, 1]
                d2 = x[i, 2] - y[j, 2]
                r2 = d0 * d0 + d1 * d1 + d2 * d2
                if r2 <= eps2:
                    bad = True
                    r2 = 1.0
                out[i, j] = (nrm[i, 0] * d0 + nrm[i, 1] * d1 + nrm[i, 2] * d2) \
                    / (FOUR_PI * r2 * sqrt(r2))
    if bad:
        _raise_singular()
    return out_arr


def lap2_grad(double[:, ::1] x, double[:, ::1] y, double eps2):
    cdef Py_ssize_t nx = x.shape[0], ny = y.shape[0], i, j
    cdef double dx, dy, r2, s
    cdef bint bad = False
    out_arr = np.empty((nx, ny, 2), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    with nogil:
        for i in range(nx):
            for j in range(ny):
                dx = x[i, 0] - y[j, 0]
                dy = x[i, 1] - y[j, 1]
                r2 = dx * dx + dy * dy
                if r2 <= eps2:
                    bad = True
                    r2 = 1.0
                s = 1.0 / (TWO_PI * r2)
                out[i, j, 0] = dx * s
                out[i, j, 1] = dy * s
    if bad:
        _raise_singular()
    return out_arr


def lap3_grad(double[:, ::1] x, double[:, ::1] y, double eps2):
    cdef Py_ssize_t nx = x.shape[0], ny = y.shape[0], i, j
    cdef double d0, d1, d2, r2, s
    cdef bint bad = False
    out_arr = np.empty((nx, ny, 3), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    with nogil:
        for i in range(nx):
            for j in range(ny):
                d0 = x[i, 0] - y[j, 0]
                d1 = x[i, 1] - y[j, 1]
                d2 = x[i, 2] - y[j, 2]
                r2 = d0 * d0 + d1 * d1 + d2 * d2
                if r2 <= eps2:
                    bad = True
                    r2 = 1.0
                s = 1.0 / (FOUR_PI * r2 * sqrt(r2))
                out[i, j, 0] = d0 * s
                out[i, j, 1] = d1 * s
                out[i, j, 2] = d2 * s
    if bad:
        _raise_singular()
    return out_arr


def cr_val(double[:, ::1] x, double[:, ::1] y, double eps2):
    cdef Py_ssize_t nx = x.shape[0], ny = y.shape[0], i, j
    cdef double dr, di, r2, s
    cdef bint bad = False
    out_arr = np.empty((nx, ny), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    with nogil:
        for i in range(nx):
            for j in range(ny):
                dr = x[i, 0] - y[j, 0]
                di = x[i, 1] - y[j, 1]
                r2 = dr * dr + di * di
                if r2 <= eps2:
                    bad = True
                    r2 = 1.0
                # 1 / (pi * dz) = conj(dz) / (pi * |dz|^2)
                s = 1.0 / (3.1415926535897932384626433832795 * r2)
                out[i, j] = (dr - 1j * di) * s
    if bad:
        _raise_singular()
    return out_arr


def cr_dz(double[:, ::1] x, double[:, ::1] y, double eps2):
    cdef Py_ssize_t nx = x.shape[0], ny = y.shape[0], i, j
    cdef double dr, di, r2, s, wr, wi
    cdef bint bad = False
    out_arr = np.empty((nx, ny), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    with nogil:
        for i in range(nx):
            for j in range(ny):
                dr = x[i, 0] - y[j, 0]
                di = x[i, 1] - y[j, 1]
                r2 = dr * dr + di * di
                if r2 <= eps2:
                    bad = True
                    r2 = 1.0
                # -1 / (pi * dz^2) = -conj(dz)^2 / (pi * |dz|^4)
                wr = dr * dr - di * di
                wi = -2.0 * dr * di
                s = -1.0 / (3.1415926535897932384626433832795 * r2 * r2)
                out[i, j] = (wr + 1j * wi) * s
    if bad:
        _raise_singular()
    return out_arr
