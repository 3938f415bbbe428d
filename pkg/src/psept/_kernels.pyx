# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for resampling and radial-polynomial evaluation.

Every routine here has a twin in ``_pykernels`` with the same arithmetic
order, so both backends agree to the last bit when the C compiler does not
contract multiply-adds (``-ffp-contract=off`` in setup.py).
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()

# Coordinates within this distance of the raster edge are treated as inside.
cdef double EDGE_TOL = 1e-9


def bilinear_sample(const double[:, ::1] img, const double[::1] xs,
                    const double[::1] ys, double fill):
    cdef Py_ssize_t h = img.shape[0]
    cdef Py_ssize_t w = img.shape[1]
    cdef Py_ssize_t n = xs.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, x0, y0
    cdef double x, y, fx, fy, top, bot
    cdef double xmax = <double>(w - 1)
    cdef double ymax = <double>(h - 1)
    for i in range(n):
        x = xs[i]
        y = ys[i]
        if x < -EDGE_TOL or y < -EDGE_TOL or x > xmax + EDGE_TOL or y > ymax + EDGE_TOL:
            out[i] = fill
            continue
        if x < 0.0:
            x = 0.0
        elif x > xmax:
            x = xmax
        if y < 0.0:
            y = 0.0
        elif y > ymax:
            y = ymax
        x0 = <Py_ssize_t>floor(x)
        y0 = <Py_ssize_t>floor(y)
        if x0 > w - 2:
            x0 = w - 2
        if y0 > h - 2:
            y0 = h - 2
        fx = x - x0
        fy = y - y0
        top = (1.0 - fx) * img[y0, x0] + fx * img[y0, x0 + 1]
        bot = (1.0 - fx) * img[y0 + 1, x0] + fx * img[y0 + 1, x0 + 1]
        out[i] = (1.0 - fy) * top + fy * bot
    return out_arr


def bilinear_sample_polar(const double[:, ::1] samples, const double[::1] jf,
                          const double[::1] kf):
    cdef Py_ssize_t nt = samples.shape[0]
    cdef Py_ssize_t nr = samples.shape[1]
    cdef Py_ssize_t n = jf.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j0, j1, k0
    cdef double j, k, fj, fk, a, b
    cdef double kmax = <double>(nr - 1)
    for i in range(n):
        j = jf[i]
        k = kf[i]
        if k < 0.0:
            k = 0.0
        elif k > kmax:
            k = kmax
        k0 = <Py_ssize_t>floor(k)
        if k0 > nr - 2:
            k0 = nr - 2
        fk = k - k0
        j = j - nt * floor(j / nt)
        j0 = <Py_ssize_t>floor(j)
        if j0 >= nt:
            j0 = nt - 1
        fj = j - j0
        j1 = j0 + 1
        if j1 == nt:
            j1 = 0
        a = (1.0 - fk) * samples[j0, k0] + fk * samples[j0, k0 + 1]
        b = (1.0 - fk) * samples[j1, k0] + fk * samples[j1, k0 + 1]
        out[i] = (1.0 - fj) * a + fj * b
    return out_arr


def horner(const double[::1] coeffs, const double[::1] x):
    cdef Py_ssize_t nc = coeffs.shape[0]
    cdef Py_ssize_t n = x.shape[0]
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, c
    cdef double acc, xi
    if nc == 0:
        return out_arr
    for i in range(n):
        xi = x[i]
        acc = coeffs[0]
        for c in range(1, nc):
            acc = acc * xi + coeffs[c]
        out[i] = acc
    return out_arr
