"""Reference solver: classical diffusion of the same pressures on the same grid.

dv_i/dt = Lap p_i(v) + f_i(v) with the 3-point (5-point in 2D) Laplacian
and mirrored ghost cells applied to the pressure, so the discrete
operator telescopes to zero total flux.  The step bound is the standard
explicit-diffusion limit dt <= safety * h^2 / (2 N L_p).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import backend
from .evolution import StepTerms, Trajectory, integrate
from .grids import Field, Grid, SpeciesPair
from .model import ModelParams, reaction_is_zero
from .nonlocal_solver import pressure_slope_bound, reaction_slope_bound

_EPS = 1e-12


def laplacian_values(grid: Grid, values: np.ndarray, out: np.ndarray) -> None:
    """Mirror-ghost Laplacian into out (includes the 1/h^2 factor)."""
    if grid.dimension == 1:
        backend.mirror_laplacian_1d(values, out)
    else:
        backend.mirror_laplacian_2d(values, out)
    out *= 1.0 / (grid.h * grid.h)


def neumann_laplacian(f: Field) -> Field:
    """Zero-flux Laplacian of a field."""
    out = np.empty_like(f.values)
    laplacian_values(f.grid, f.values, out)
    return Field(f.grid, out)


def gradient_square_sum(grid: Grid, values: np.ndarray) -> float:
    """sum_x |grad v|^2 h^N with centered differences and mirrored ghosts."""
    h2 = 2.0 * grid.h
    if grid.dimension == 1:
        g = np.empty_like(values)
        g[1:-1] = (values[2:] - values[:-2]) / h2
        g[0] = (values[1] - values[0]) / h2
        g[-1] = (values[-1] - values[-2]) / h2
        return float(np.sum(g * g)) * grid.cell_volume
    total = np.zeros_like(values)
    g = np.empty_like(values)
    g[1:-1, :] = (values[2:, :] - values[:-2, :]) / h2
    g[0, :] = (values[1, :] - values[0, :]) / h2
    g[-1, :] = (values[-1, :] - values[-2, :]) / h2
    total += g * g
    g[:, 1:-1] = (values[:, 2:] - values[:, :-2]) / h2
    g[:, 0] = (values[:, 1] - values[:, 0]) / h2
    g[:, -1] = (values[:, -1] - values[:, -2]) / h2
    total += g * g
    return float(np.sum(total)) * grid.cell_volume


@dataclass
class LocalRunConfig:
    grid: Grid
    params: ModelParams
    initial: SpeciesPair
    snapshot_times: Sequence[float] = ()
    dt_safety: float = 0.4
    positivity_tol: float = 1e-10
    diag_stride: int = 10
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not (0.0 < self.dt_safety <= 1.0):
            raise ValueError(f"dt_safety must lie in (0, 1], got {self.dt_safety}")
        if self.initial.grid != self.grid:
            raise ValueError("initial data grid does not match config grid")


def local_stable_dt(config: LocalRunConfig, pair: SpeciesPair) -> float:
    grid = config.grid
    lp = pressure_slope_bound(config.params, pair)
    diff = config.dt_safety * grid.h * grid.h / max(2.0 * grid.dimension * lp, _EPS)
    react = config.dt_safety / (reaction_slope_bound(config.params, pair) + _EPS)
    return min(diff, react)


def _terms_builder(config: LocalRunConfig):
    params = config.params
    grid = config.grid
    vol = grid.cell_volume
    a1, a2 = params.a
    c1, c2 = params.c
    al1, al2 = params.alpha
    (b11, b12), (b21, b22) = params.beta
    no_reaction = reaction_is_zero(params)
    out1 = np.empty(grid.shape)
    out2 = np.empty(grid.shape)

    def terms(pair: SpeciesPair) -> StepTerms:
        v1 = pair.u1.values
        v2 = pair.u2.values
        laplacian_values(grid, v1 * (c1 + a1 * v1 + v2), out1)
        laplacian_values(grid, v2 * (c2 + a2 * v2 + v1), out2)
        diss = a1 * gradient_square_sum(grid, v1) + a2 * gradient_square_sum(grid, v2)
        if no_reaction:
            return StepTerms(out1.copy(), out2.copy(), (0.0, 0.0), diss)
        f1 = v1 * (al1 - b11 * v1 - b12 * v2)
        f2 = v2 * (al2 - b21 * v1 - b22 * v2)
        return StepTerms(
            out1 + f1,
            out2 + f2,
            (float(np.sum(f1)) * vol, float(np.sum(f2)) * vol),
            diss,
        )

    return terms


def local_step(config: LocalRunConfig, pair: SpeciesPair, dt: float) -> SpeciesPair:
    """One forward-Euler step of the reference system."""
    terms = _terms_builder(config)(pair)
    grid = pair.grid
    return SpeciesPair(
        Field(grid, pair.u1.values + dt * terms.rhs1),
        Field(grid, pair.u2.values + dt * terms.rhs2),
    )


def run_local(config: LocalRunConfig) -> Trajectory:
    """Integrate the reference system to params.t_final."""
    return integrate(
        config.initial,
        config.params.t_final,
        config.snapshot_times,
        _terms_builder(config),
        lambda pair: local_stable_dt(config, pair),
        positivity_tol=config.positivity_tol,
        diag_stride=config.diag_stride,
        max_steps=config.max_steps,
    )
