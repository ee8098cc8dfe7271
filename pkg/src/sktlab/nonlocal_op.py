"""Integral-kernel diffusion operator restricted to the box domain.

(L f)(x) = sum_k w(k) * (f(x+k) - f(x)) over offsets k with x+k inside
the domain; offsets leaving the box simply drop out, which is the
zero-flux analogue for integral operators and makes the operator exactly
mass neutral.  The same stencil machinery serves any discrete kernel
(rescaled or point-mass normalized), so the dual-problem solver reuses
``stencil_apply``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import backend
from .grids import Field, Grid, lq_norm_space
from .kernels import DiscreteKernel, KernelKind


def _check_compatible(kernel: DiscreteKernel, grid: Grid) -> None:
    if kernel.dimension != grid.dimension:
        raise ValueError(
            f"kernel dimension {kernel.dimension} != grid dimension {grid.dimension}"
        )
    if abs(kernel.spacing - grid.h) > 1e-12 * grid.h:
        raise ValueError(
            f"kernel spacing {kernel.spacing!r} != grid spacing {grid.h!r}"
        )


def stencil_apply(kernel: DiscreteKernel, grid: Grid, values: np.ndarray) -> np.ndarray:
    """Raw stencil application on a value array (any kernel kind)."""
    _check_compatible(kernel, grid)
    out = np.empty_like(values)
    if grid.dimension == 1:
        backend.stencil_apply_1d(values, kernel.offsets[:, 0], kernel.weights, out)
    else:
        backend.stencil_apply_2d(
            values,
            np.ascontiguousarray(kernel.offsets[:, 0]),
            np.ascontiguousarray(kernel.offsets[:, 1]),
            kernel.weights,
            out,
        )
    return out


def stencil_square_sum(kernel: DiscreteKernel, grid: Grid, values: np.ndarray) -> float:
    """sum_x sum_k w(k) * (f(x+k) - f(x))^2 * h^N over in-domain pairs."""
    _check_compatible(kernel, grid)
    contrib = np.empty_like(values)
    if grid.dimension == 1:
        backend.stencil_square_1d(values, kernel.offsets[:, 0], kernel.weights, contrib)
    else:
        backend.stencil_square_2d(
            values,
            np.ascontiguousarray(kernel.offsets[:, 0]),
            np.ascontiguousarray(kernel.offsets[:, 1]),
            kernel.weights,
            contrib,
        )
    return float(np.sum(contrib)) * grid.cell_volume


@dataclass(eq=False)
class NonlocalOperator:
    """Rescaled-kernel diffusion operator bound to one grid."""

    kernel: DiscreteKernel
    grid: Grid
    _off_x: np.ndarray = dc_field(init=False, repr=False)
    _off_y: np.ndarray | None = dc_field(init=False, repr=False)

    def __post_init__(self):
        if self.kernel.kind is not KernelKind.RESCALED:
            raise ValueError("diffusion operator requires a rescaled kernel")
        _check_compatible(self.kernel, self.grid)
        self._off_x = np.ascontiguousarray(self.kernel.offsets[:, 0])
        self._off_y = (
            np.ascontiguousarray(self.kernel.offsets[:, 1])
            if self.grid.dimension == 2
            else None
        )

    @property
    def lipschitz_mass(self) -> float:
        """Total kernel mass; 2x this bounds the operator norm on sup-norm."""
        return self.kernel.total_mass

    def apply_values(self, values: np.ndarray, out: np.ndarray) -> None:
        if self.grid.dimension == 1:
            backend.stencil_apply_1d(values, self._off_x, self.kernel.weights, out)
        else:
            backend.stencil_apply_2d(
                values, self._off_x, self._off_y, self.kernel.weights, out
            )

    def square_sum_values(self, values: np.ndarray, contrib: np.ndarray) -> float:
        if self.grid.dimension == 1:
            backend.stencil_square_1d(values, self._off_x, self.kernel.weights, contrib)
        else:
            backend.stencil_square_2d(
                values, self._off_x, self._off_y, self.kernel.weights, contrib
            )
        return float(np.sum(contrib)) * self.grid.cell_volume


def apply(op: NonlocalOperator, f: Field) -> Field:
    """Operator image of a field."""
    if f.grid != op.grid:
        raise ValueError("field grid does not match operator grid")
    out = np.empty_like(f.values)
    op.apply_values(f.values, out)
    return Field(op.grid, out)


def dissipation(op: NonlocalOperator, f: Field) -> float:
    """Kernel-weighted squared-difference form of f (both points in domain)."""
    if f.grid != op.grid:
        raise ValueError("field grid does not match operator grid")
    contrib = np.empty_like(f.values)
    return op.square_sum_values(f.values, contrib)


def _second_difference(values: np.ndarray, axis: int) -> np.ndarray:
    # zero extension outside the domain: valid for fields vanishing near
    # the boundary, which sobolev_ratio requires anyway
    padded = np.pad(values, [(1, 1) if ax == axis else (0, 0) for ax in range(values.ndim)])
    sl_p = [slice(None)] * values.ndim
    sl_m = [slice(None)] * values.ndim
    sl_c = [slice(None)] * values.ndim
    sl_p[axis] = slice(2, None)
    sl_m[axis] = slice(None, -2)
    sl_c[axis] = slice(1, -1)
    return padded[tuple(sl_p)] - 2.0 * values + padded[tuple(sl_m)]


def _first_difference(values: np.ndarray, axis: int) -> np.ndarray:
    padded = np.pad(values, [(1, 1) if ax == axis else (0, 0) for ax in range(values.ndim)])
    sl_p = [slice(None)] * values.ndim
    sl_m = [slice(None)] * values.ndim
    sl_p[axis] = slice(2, None)
    sl_m[axis] = slice(None, -2)
    return 0.5 * (padded[tuple(sl_p)] - padded[tuple(sl_m)])


def sobolev_ratio(op: NonlocalOperator, xi: Field, p: float) -> float:
    """||L xi||_p divided by a discrete W^{2,p} norm of xi.

    xi must vanish near the boundary (difference quotients use zero
    extension); a field that does not is rejected.
    """
    if p < 1.0:
        raise ValueError(f"p must be at least 1, got {p}")
    if xi.grid != op.grid:
        raise ValueError("field grid does not match operator grid")
    peak = float(np.max(np.abs(xi.values)))
    if peak == 0.0:
        raise ValueError("ratio undefined for the zero field")
    edge = _boundary_band_max(xi.values)
    if edge > 1e-3 * peak:
        raise ValueError(
            f"field must vanish near the boundary (edge magnitude {edge:.3g} "
            f"vs peak {peak:.3g})"
        )
    grid = op.grid
    h = grid.h
    num = lq_norm_space(apply(op, xi), p)
    terms = [xi.values]
    for ax in range(grid.dimension):
        terms.append(_first_difference(xi.values, ax) / h)
    for ax in range(grid.dimension):
        terms.append(_second_difference(xi.values, ax) / (h * h))
    if grid.dimension == 2:
        mixed = _first_difference(_first_difference(xi.values, 0), 1) / (h * h)
        terms.append(mixed)
    vol = grid.cell_volume
    denom = sum(float(np.sum(np.abs(t) ** p)) * vol for t in terms) ** (1.0 / p)
    return num / denom


def _boundary_band_max(values: np.ndarray) -> float:
    band = 2
    if values.ndim == 1:
        return float(max(np.max(np.abs(values[:band])), np.max(np.abs(values[-band:]))))
    edges = [
        values[:band, :],
        values[-band:, :],
        values[:, :band],
        values[:, -band:],
    ]
    return float(max(np.max(np.abs(e)) for e in edges))
