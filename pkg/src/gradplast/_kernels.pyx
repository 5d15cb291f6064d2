# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the hot kernels in ``_kernels_py``.

Same contracts, same arithmetic order, bitwise-identical results; the test
suite asserts exact agreement on random inputs.
"""

from libc.math cimport copysign, fabs, fmax

import numpy as np

BACKEND = "compiled"


def _as4d(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    return a, a.reshape(a.shape[0], a.shape[1], a.shape[2], -1)


def diff_forward(a, int axis, double h, bint zero_closure):
    """Forward difference ``(a[i+1] - a[i]) / h`` along a grid axis."""
    orig, a4 = _as4d(a)
    out = np.empty_like(a4)
    cdef double[:, :, :, ::1] src = a4
    cdef double[:, :, :, ::1] dst = out
    cdef Py_ssize_t nx = src.shape[0], ny = src.shape[1]
    cdef Py_ssize_t nz = src.shape[2], nc = src.shape[3]
    cdef Py_ssize_t i, j, k, c
    with nogil:
        if axis == 0:
            for i in range(nx - 1):
                for j in range(ny):
                    for k in range(nz):
                        for c in range(nc):
                            dst[i, j, k, c] = (src[i + 1, j, k, c] - src[i, j, k, c]) / h
            for j in range(ny):
                for k in range(nz):
                    for c in range(nc):
                        dst[nx - 1, j, k, c] = (-src[nx - 1, j, k, c]) / h if zero_closure else 0.0
        elif axis == 1:
            for i in range(nx):
                for j in range(ny - 1):
                    for k in range(nz):
                        for c in range(nc):
                            dst[i, j, k, c] = (src[i, j + 1, k, c] - src[i, j, k, c]) / h
                for k in range(nz):
                    for c in range(nc):
                        dst[i, ny - 1, k, c] = (-src[i, ny - 1, k, c]) / h if zero_closure else 0.0
        else:
            for i in range(nx):
                for j in range(ny):
                    for k in range(nz - 1):
                        for c in range(nc):
                            dst[i, j, k, c] = (src[i, j, k + 1, c] - src[i, j, k, c]) / h
                    for c in range(nc):
                        dst[i, j, nz - 1, c] = (-src[i, j, nz - 1, c]) / h if zero_closure else 0.0
    return out.reshape(orig.shape)


def diff_forward_adjoint(a, int axis, double h, bint zero_closure):
    """Exact transpose of :func:`diff_forward` with the same closure."""
    orig, a4 = _as4d(a)
    out = np.empty_like(a4)
    cdef double[:, :, :, ::1] src = a4
    cdef double[:, :, :, ::1] dst = out
    cdef Py_ssize_t nx = src.shape[0], ny = src.shape[1]
    cdef Py_ssize_t nz = src.shape[2], nc = src.shape[3]
    cdef Py_ssize_t i, j, k, c
    with nogil:
        if axis == 0:
            if nx == 1:
                for j in range(ny):
                    for k in range(nz):
                        for c in range(nc):
                            dst[0, j, k, c] = (-src[0, j, k, c]) / h if zero_closure else 0.0
            else:
                for j in range(ny):
                    for k in range(nz):
                        for c in range(nc):
                            dst[0, j, k, c] = (-src[0, j, k, c]) / h
                            for i in range(1, nx - 1):
                                dst[i, j, k, c] = (src[i - 1, j, k, c] - src[i, j, k, c]) / h
                            if zero_closure:
                                dst[nx - 1, j, k, c] = (src[nx - 2, j, k, c] - src[nx - 1, j, k, c]) / h
                            else:
                                dst[nx - 1, j, k, c] = src[nx - 2, j, k, c] / h
        elif axis == 1:
            if ny == 1:
                for i in range(nx):
                    for k in range(nz):
                        for c in range(nc):
                            dst[i, 0, k, c] = (-src[i, 0, k, c]) / h if zero_closure else 0.0
            else:
                for i in range(nx):
                    for k in range(nz):
                        for c in range(nc):
                            dst[i, 0, k, c] = (-src[i, 0, k, c]) / h
                            for j in range(1, ny - 1):
                                dst[i, j, k, c] = (src[i, j - 1, k, c] - src[i, j, k, c]) / h
                            if zero_closure:
                                dst[i, ny - 1, k, c] = (src[i, ny - 2, k, c] - src[i, ny - 1, k, c]) / h
                            else:
                                dst[i, ny - 1, k, c] = src[i, ny - 2, k, c] / h
        else:
            if nz == 1:
                for i in range(nx):
                    for j in range(ny):
                        for c in range(nc):
                            dst[i, j, 0, c] = (-src[i, j, 0, c]) / h if zero_closure else 0.0
            else:
                for i in range(nx):
                    for j in range(ny):
                        for c in range(nc):
                            dst[i, j, 0, c] = (-src[i, j, 0, c]) / h
                            for k in range(1, nz - 1):
                                dst[i, j, k, c] = (src[i, j, k - 1, c] - src[i, j, k, c]) / h
                            if zero_closure:
                                dst[i, j, nz - 1, c] = (src[i, j, nz - 2, c] - src[i, j, nz - 1, c]) / h
                            else:
                                dst[i, j, nz - 1, c] = src[i, j, nz - 2, c] / h
    return out.reshape(orig.shape)


def prox_iso_sweep(x, double t, double sigma0, double mu_k2, eta_prev):
    """Elementwise isotropic-hardening prox (see the numpy twin)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    eta = np.ascontiguousarray(eta_prev, dtype=np.float64)
    out = np.empty_like(x)
    cdef double[::1] xf = x.ravel()
    cdef double[::1] ef = eta.ravel()
    cdef double[::1] of = out.ravel()
    cdef Py_ssize_t i, n = xf.shape[0]
    cdef double denom = 1.0 + t * mu_k2
    cdef double mag
    with nogil:
        for i in range(n):
            mag = fmax(fabs(xf[i]) - t * (sigma0 + mu_k2 * ef[i]), 0.0)
            of[i] = copysign(mag / denom, xf[i])
    return out


def prox_kin_sweep(x, double t, double sigma0):
    """Elementwise soft threshold at ``t * sigma0``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty_like(x)
    cdef double[::1] xf = x.ravel()
    cdef double[::1] of = out.ravel()
    cdef Py_ssize_t i, n = xf.shape[0]
    cdef double thr = t * sigma0
    cdef double mag
    with nogil:
        for i in range(n):
            mag = fmax(fabs(xf[i]) - thr, 0.0)
            of[i] = copysign(mag, xf[i])
    return out
