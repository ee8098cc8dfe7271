"""Pure-numpy stencil kernels (fallback backend).

Every function here has a compiled twin in ``_kernels_cy``.  The two must
stay bit-identical: same offset iteration order, same per-element
expression shape, no reductions (callers reduce with numpy's pairwise
sum).  Keep edits mirrored in the .pyx file.
"""

from __future__ import annotations

import numpy as np


def stencil_apply_1d(values, offsets, weights, out):
    # out[x] = sum_k w(k) * (v[x+k] - v[x]) over offsets staying in range
    out[:] = 0.0
    m = values.shape[0]
    for j in range(offsets.shape[0]):
        k = int(offsets[j])
        w = weights[j]
        if k == 0 or w == 0.0 or k >= m or -k >= m:
            continue
        if k > 0:
            out[: m - k] += w * (values[k:] - values[: m - k])
        else:
            out[-k:] += w * (values[: m + k] - values[-k:])


def stencil_apply_2d(values, off_x, off_y, weights, out):
    out[:, :] = 0.0
    mx, my = values.shape
    for j in range(off_x.shape[0]):
        kx = int(off_x[j])
        ky = int(off_y[j])
        w = weights[j]
        if w == 0.0 or (kx == 0 and ky == 0):
            continue
        xl = -kx if kx < 0 else 0
        xr = mx - kx if kx > 0 else mx
        yl = -ky if ky < 0 else 0
        yr = my - ky if ky > 0 else my
        if xl >= xr or yl >= yr:
            continue
        src = values[xl + kx : xr + kx, yl + ky : yr + ky]
        dst = values[xl:xr, yl:yr]
        out[xl:xr, yl:yr] += w * (src - dst)


def stencil_square_1d(values, offsets, weights, contrib):
    # contrib[x] = sum_k w(k) * (v[x+k] - v[x])^2; caller reduces and scales
    contrib[:] = 0.0
    m = values.shape[0]
    for j in range(offsets.shape[0]):
        k = int(offsets[j])
        w = weights[j]
        if k == 0 or w == 0.0 or k >= m or -k >= m:
            continue
        if k > 0:
            d = values[k:] - values[: m - k]
            contrib[: m - k] += w * (d * d)
        else:
            d = values[: m + k] - values[-k:]
            contrib[-k:] += w * (d * d)


def stencil_square_2d(values, off_x, off_y, weights, contrib):
    contrib[:, :] = 0.0
    mx, my = values.shape
    for j in range(off_x.shape[0]):
        kx = int(off_x[j])
        ky = int(off_y[j])
        w = weights[j]
        if w == 0.0 or (kx == 0 and ky == 0):
            continue
        xl = -kx if kx < 0 else 0
        xr = mx - kx if kx > 0 else mx
        yl = -ky if ky < 0 else 0
        yr = my - ky if ky > 0 else my
        if xl >= xr or yl >= yr:
            continue
        d = values[xl + kx : xr + kx, yl + ky : yr + ky] - values[xl:xr, yl:yr]
        contrib[xl:xr, yl:yr] += w * (d * d)


def mirror_laplacian_1d(values, out):
    # second difference with mirrored ghosts; caller divides by h^2
    out[1:-1] = values[2:] - 2.0 * values[1:-1] + values[:-2]
    out[0] = values[1] - values[0]
    out[-1] = values[-2] - values[-1]


def mirror_laplacian_2d(values, out):
    out[1:-1, :] = values[2:, :] - 2.0 * values[1:-1, :] + values[:-2, :]
    out[0, :] = values[1, :] - values[0, :]
    out[-1, :] = values[-2, :] - values[-1, :]
    out[:, 1:-1] += values[:, 2:] - 2.0 * values[:, 1:-1] + values[:, :-2]
    out[:, 0] += values[:, 1] - values[:, 0]
    out[:, -1] += values[:, -2] - values[:, -1]
