"""Grids, fields, norms, and snapshot serialization."""

import math

import numpy as np
import pytest

from sktlab import (
    Field,
    Grid,
    SpeciesPair,
    constant_field,
    field_from_function,
    lq_norm_space,
    lq_norm_spacetime,
    min_value,
    read_snapshot,
    restrict_interior,
    total_mass,
    write_snapshot,
)


def test_grid_geometry():
    grid = Grid(1, 2.0, 8)
    assert grid.h == 0.25
    assert grid.shape == (8,)
    assert grid.cell_volume == 0.25
    assert np.allclose(grid.cell_centers(), np.arange(8) * 0.25 + 0.125)
    grid2 = Grid(2, 1.0, 16)
    assert grid2.shape == (16, 16)
    assert grid2.cell_volume == pytest.approx((1.0 / 16) ** 2)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(3, 1.0, 8)
    with pytest.raises(ValueError):
        Grid(1, -1.0, 8)
    with pytest.raises(ValueError):
        Grid(1, 1.0, 3)


def test_field_shape_checked():
    grid = Grid(1, 1.0, 8)
    with pytest.raises(ValueError):
        Field(grid, np.zeros(9))
    f = Field(grid, np.arange(8))
    assert f.values.dtype == np.float64


def test_species_pair_grid_must_match():
    a = constant_field(Grid(1, 1.0, 8), 1.0)
    b = constant_field(Grid(1, 1.0, 16), 1.0)
    with pytest.raises(ValueError):
        SpeciesPair(a, b)


def test_lq_norm_oracle_linear_function():
    # ||x||_L2(0,1) = 1/sqrt(3); midpoint sums converge at h^2
    grid = Grid(1, 1.0, 512)
    f = field_from_function(grid, lambda x: x)
    assert lq_norm_space(f, 2.0) == pytest.approx(1.0 / math.sqrt(3.0), abs=1e-3)


def test_mass_oracle_sine():
    # int_0^1 sin(pi x) dx = 2/pi
    grid = Grid(1, 1.0, 1024)
    f = field_from_function(grid, lambda x: np.sin(np.pi * x))
    assert total_mass(f) == pytest.approx(2.0 / math.pi, abs=1e-4)


def test_lq_norm_2d():
    grid = Grid(2, 1.0, 128)
    f = constant_field(grid, 3.0)
    assert lq_norm_space(f, 2.0) == pytest.approx(3.0, rel=1e-12)
    assert lq_norm_space(f, 1.0) == pytest.approx(3.0, rel=1e-12)


def test_spacetime_norm_oracle():
    # f(t) = t constant in space on [0,1]: L2 in time gives 1/sqrt(3)
    grid = Grid(1, 1.0, 16)
    times = np.linspace(0.0, 1.0, 201)
    snaps = [(t, constant_field(grid, t)) for t in times]
    assert lq_norm_spacetime(snaps, 2.0) == pytest.approx(
        1.0 / math.sqrt(3.0), abs=1e-4
    )


def test_spacetime_norm_rejects_disorder():
    grid = Grid(1, 1.0, 16)
    snaps = [(0.5, constant_field(grid, 1.0)), (0.25, constant_field(grid, 1.0))]
    with pytest.raises(ValueError):
        lq_norm_spacetime(snaps, 2.0)
    with pytest.raises(ValueError):
        lq_norm_spacetime(snaps[:1], 2.0)


def test_norm_rejects_q_below_one():
    grid = Grid(1, 1.0, 16)
    with pytest.raises(ValueError):
        lq_norm_space(constant_field(grid, 1.0), 0.5)


def test_restrict_interior_counts():
    grid = Grid(1, 1.0, 8)
    f = field_from_function(grid, lambda x: x)
    inner = restrict_interior(f, 0.25)
    assert inner.grid.cells == 4
    assert np.allclose(inner.values, [0.3125, 0.4375, 0.5625, 0.6875])
    with pytest.raises(ValueError):
        restrict_interior(f, 0.4)  # would leave 2 cells


def test_restrict_interior_2d():
    grid = Grid(2, 1.0, 16)
    f = field_from_function(grid, lambda x, y: x + y)
    inner = restrict_interior(f, 0.25)
    assert inner.grid.shape == (8, 8)
    assert inner.values[0, 0] == pytest.approx(0.28125 + 0.28125)


def test_snapshot_round_trip_1d(tmp_path):
    grid = Grid(1, 1.0, 32)
    f = field_from_function(grid, lambda x: np.sin(7.0 * x) + 0.1)
    path = tmp_path / "snap.txt"
    write_snapshot(path, 0.375, f)
    t, g = read_snapshot(path)
    assert t == 0.375
    assert g.grid == grid
    assert np.array_equal(g.values, f.values)  # %.17g is value-exact


def test_snapshot_round_trip_2d(tmp_path):
    grid = Grid(2, 2.0, 16)
    rng = np.random.default_rng(7)
    f = Field(grid, rng.random((16, 16)))
    path = tmp_path / "snap2d.txt"
    write_snapshot(path, 1.0, f)
    t, g = read_snapshot(path)
    assert t == 1.0
    assert g.grid == grid
    assert np.array_equal(g.values, f.values)


def test_snapshot_header_layout(tmp_path):
    grid = Grid(1, 1.0, 8)
    path = tmp_path / "snap.txt"
    write_snapshot(path, 0.5, constant_field(grid, 2.0))
    lines = path.read_text().splitlines()
    assert lines[0] == "# t=0.5 nx=8 h=0.125"
    assert len(lines) == 9
    assert lines[1] == "2"


def test_min_value():
    grid = Grid(1, 1.0, 8)
    f = Field(grid, np.array([3.0, -2.0, 5.0, 0.0, 1.0, 1.0, 1.0, 1.0]))
    assert min_value(f) == -2.0
