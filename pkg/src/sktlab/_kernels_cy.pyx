# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stencil kernels (fast backend).

Twin of ``_kernels_py``: same iteration order, same per-element
expression shape.  Compiled with -ffp-contract=off so results are
bit-identical to the numpy fallback.  Keep edits mirrored there.
"""


def stencil_apply_1d(double[::1] values, Py_ssize_t[::1] offsets,
                     double[::1] weights, double[::1] out):
    cdef Py_ssize_t m = values.shape[0]
    cdef Py_ssize_t n_off = offsets.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double w
    for i in range(m):
        out[i] = 0.0
    for j in range(n_off):
        k = offsets[j]
        w = weights[j]
        if k == 0 or w == 0.0:
            continue
        if k > 0:
            for i in range(m - k):
                out[i] += w * (values[i + k] - values[i])
        else:
            for i in range(-k, m):
                out[i] += w * (values[i + k] - values[i])


def stencil_apply_2d(double[:, ::1] values, Py_ssize_t[::1] off_x,
                     Py_ssize_t[::1] off_y, double[::1] weights,
                     double[:, ::1] out):
    cdef Py_ssize_t mx = values.shape[0]
    cdef Py_ssize_t my = values.shape[1]
    cdef Py_ssize_t n_off = off_x.shape[0]
    cdef Py_ssize_t j, kx, ky, xl, xr, yl, yr, ix, iy
    cdef double w
    for ix in range(mx):
        for iy in range(my):
            out[ix, iy] = 0.0
    for j in range(n_off):
        kx = off_x[j]
        ky = off_y[j]
        w = weights[j]
        if w == 0.0 or (kx == 0 and ky == 0):
            continue
        xl = -kx if kx < 0 else 0
        xr = mx - kx if kx > 0 else mx
        yl = -ky if ky < 0 else 0
        yr = my - ky if ky > 0 else my
        if xl >= xr or yl >= yr:
            continue
        for ix in range(xl, xr):
            for iy in range(yl, yr):
                out[ix, iy] += w * (values[ix + kx, iy + ky] - values[ix, iy])


def stencil_square_1d(double[::1] values, Py_ssize_t[::1] offsets,
                      double[::1] weights, double[::1] contrib):
    cdef Py_ssize_t m = values.shape[0]
    cdef Py_ssize_t n_off = offsets.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double w, d
    for i in range(m):
        contrib[i] = 0.0
    for j in range(n_off):
        k = offsets[j]
        w = weights[j]
        if k == 0 or w == 0.0:
            continue
        if k > 0:
            for i in range(m - k):
                d = values[i + k] - values[i]
                contrib[i] += w * (d * d)
        else:
            for i in range(-k, m):
                d = values[i + k] - values[i]
                contrib[i] += w * (d * d)


def stencil_square_2d(double[:, ::1] values, Py_ssize_t[::1] off_x,
                      Py_ssize_t[::1] off_y, double[::1] weights,
                      double[:, ::1] contrib):
    cdef Py_ssize_t mx = values.shape[0]
    cdef Py_ssize_t my = values.shape[1]
    cdef Py_ssize_t n_off = off_x.shape[0]
    cdef Py_ssize_t j, kx, ky, xl, xr, yl, yr, ix, iy
    cdef double w, d
    for ix in range(mx):
        for iy in range(my):
            contrib[ix, iy] = 0.0
    for j in range(n_off):
        kx = off_x[j]
        ky = off_y[j]
        w = weights[j]
        if w == 0.0 or (kx == 0 and ky == 0):
            continue
        xl = -kx if kx < 0 else 0
        xr = mx - kx if kx > 0 else mx
        yl = -ky if ky < 0 else 0
        yr = my - ky if ky > 0 else my
        if xl >= xr or yl >= yr:
            continue
        for ix in range(xl, xr):
            for iy in range(yl, yr):
                d = values[ix + kx, iy + ky] - values[ix, iy]
                contrib[ix, iy] += w * (d * d)


def mirror_laplacian_1d(double[::1] values, double[::1] out):
    cdef Py_ssize_t m = values.shape[0]
    cdef Py_ssize_t i
    for i in range(1, m - 1):
        out[i] = values[i + 1] - 2.0 * values[i] + values[i - 1]
    out[0] = values[1] - values[0]
    out[m - 1] = values[m - 2] - values[m - 1]


def mirror_laplacian_2d(double[:, ::1] values, double[:, ::1] out):
    cdef Py_ssize_t mx = values.shape[0]
    cdef Py_ssize_t my = values.shape[1]
    cdef Py_ssize_t ix, iy
    for ix in range(1, mx - 1):
        for iy in range(my):
            out[ix, iy] = values[ix + 1, iy] - 2.0 * values[ix, iy] + values[ix - 1, iy]
    for iy in range(my):
        out[0, iy] = values[1, iy] - values[0, iy]
        out[mx - 1, iy] = values[mx - 2, iy] - values[mx - 1, iy]
    for ix in range(mx):
        for iy in range(1, my - 1):
            out[ix, iy] += values[ix, iy + 1] - 2.0 * values[ix, iy] + values[ix, iy - 1]
        out[ix, 0] += values[ix, 1] - values[ix, 0]
        out[ix, my - 1] += values[ix, my - 2] - values[ix, my - 1]
