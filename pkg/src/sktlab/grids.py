"""Uniform cell-centered grids on a box, scalar fields, and species pairs.

The domain is (0, extent)^N covered by cells^N equal cells; all field
values live at cell centers.  Snapshot files are plain text: one header
line ``# t=<t> nx=<cells> [ny=<cells>] h=<spacing>`` followed by one
value per line in row-major order, 17 significant digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True)
class Grid:
    dimension: int
    extent: float
    cells: int

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dimension}")
        if not (self.extent > 0.0 and math.isfinite(self.extent)):
            raise ValueError(f"extent must be positive, got {self.extent}")
        if self.cells < 4:
            raise ValueError(f"need at least 4 cells per axis, got {self.cells}")

    @property
    def h(self) -> float:
        return self.extent / self.cells

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells,) * self.dimension

    @property
    def cell_volume(self) -> float:
        return self.h**self.dimension

    def cell_centers(self) -> np.ndarray:
        """Center coordinates along one axis."""
        return (np.arange(self.cells) + 0.5) * self.h

    def coordinate_arrays(self) -> tuple[np.ndarray, ...]:
        """Cell-center coordinate arrays, broadcastable to field shape."""
        x = self.cell_centers()
        if self.dimension == 1:
            return (x,)
        return tuple(np.meshgrid(x, x, indexing="ij"))


@dataclass(eq=False)
class Field:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} != grid shape {self.grid.shape}"
            )

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())


def constant_field(grid: Grid, value: float) -> Field:
    return Field(grid, np.full(grid.shape, float(value)))


def field_from_function(grid: Grid, fn: Callable[..., np.ndarray]) -> Field:
    """Sample fn at cell centers; fn takes one coordinate array per axis."""
    return Field(grid, np.asarray(fn(*grid.coordinate_arrays()), dtype=np.float64))


@dataclass(eq=False)
class SpeciesPair:
    u1: Field
    u2: Field

    def __post_init__(self):
        if self.u1.grid != self.u2.grid:
            raise ValueError("species fields must share one grid")

    @property
    def grid(self) -> Grid:
        return self.u1.grid

    def copy(self) -> "SpeciesPair":
        return SpeciesPair(self.u1.copy(), self.u2.copy())

    def component(self, i: int) -> Field:
        if i == 1:
            return self.u1
        if i == 2:
            return self.u2
        raise ValueError(f"species index must be 1 or 2, got {i}")


def lq_norm_space(field: Field, q: float) -> float:
    """(sum |f|^q h^N)^(1/q) over cells."""
    if q < 1.0:
        raise ValueError(f"q must be at least 1, got {q}")
    total = float(np.sum(np.abs(field.values) ** q)) * field.grid.cell_volume
    return total ** (1.0 / q)


def lq_norm_spacetime(snapshots: Sequence[tuple[float, Field]], q: float) -> float:
    """Space-time norm: trapezoid in t of the spatial q-th powers, then q-th root."""
    if q < 1.0:
        raise ValueError(f"q must be at least 1, got {q}")
    if len(snapshots) < 2:
        raise ValueError("need at least two snapshots for a time integral")
    times = np.array([t for t, _ in snapshots])
    if not np.all(np.diff(times) > 0.0):
        raise ValueError("snapshot times must be strictly increasing")
    powers = np.array(
        [float(np.sum(np.abs(f.values) ** q)) * f.grid.cell_volume for _, f in snapshots]
    )
    return float(np.trapezoid(powers, times)) ** (1.0 / q)


def total_mass(field: Field) -> float:
    return float(np.sum(field.values)) * field.grid.cell_volume


def min_value(field: Field) -> float:
    return float(np.min(field.values))


def restrict_interior(field: Field, margin: float) -> Field:
    """Drop cells whose centers lie within margin of the domain boundary."""
    if margin < 0.0:
        raise ValueError(f"margin must be nonnegative, got {margin}")
    grid = field.grid
    if margin == 0.0:
        return field.copy()
    centers = grid.cell_centers()
    drop = int(np.searchsorted(centers, margin - 1e-9 * grid.h))
    kept = grid.cells - 2 * drop
    if kept < 4:
        raise ValueError(
            f"margin {margin:.6g} leaves {kept} cells of {grid.cells}; "
            "margin exceeds what the grid can spare"
        )
    sub = Grid(grid.dimension, kept * grid.h, kept)
    sl = slice(drop, grid.cells - drop)
    if grid.dimension == 1:
        return Field(sub, field.values[sl].copy())
    return Field(sub, field.values[sl, sl].copy())


def write_snapshot(path, t: float, field: Field) -> None:
    grid = field.grid
    if grid.dimension == 1:
        header = f"# t={FLOAT_FORMAT % t} nx={grid.cells} h={FLOAT_FORMAT % grid.h}"
    else:
        header = (
            f"# t={FLOAT_FORMAT % t} nx={grid.cells} ny={grid.cells} "
            f"h={FLOAT_FORMAT % grid.h}"
        )
    lines = [header]
    lines.extend(FLOAT_FORMAT % v for v in field.values.ravel(order="C"))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_snapshot(path) -> tuple[float, Field]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        body = fh.read().split()
    if not header.startswith("# "):
        raise ValueError(f"snapshot {path} lacks a header line")
    entries = dict(item.split("=", 1) for item in header[2:].split())
    t = float(entries["t"])
    nx = int(entries["nx"])
    h = float(entries["h"])
    if "ny" in entries:
        ny = int(entries["ny"])
        if ny != nx:
            raise ValueError(f"snapshot {path}: grids must be square, got {nx}x{ny}")
        grid = Grid(2, nx * h, nx)
        values = np.array(body, dtype=np.float64).reshape(nx, ny)
    else:
        grid = Grid(1, nx * h, nx)
        values = np.array(body, dtype=np.float64)
    return t, Field(grid, values)
