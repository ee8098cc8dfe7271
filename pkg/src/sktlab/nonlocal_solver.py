"""Explicit time integration of the kernel-diffusion system.

du_i/dt = L p_i(u) + f_i(u) with L the rescaled-kernel operator.  The
step bound follows the operator's sup-norm Lipschitz constant: L moves
mass at rate at most 2 * (kernel mass) * L_p where L_p bounds the
pressure slope; with the 0.4 default safety factor the Euler update is
also a convex combination, which is what keeps cell values nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .evolution import StepTerms, Trajectory, integrate
from .grids import Field, SpeciesPair
from .model import ModelParams, reaction_is_zero
from .nonlocal_op import NonlocalOperator

_EPS = 1e-12


@dataclass
class NonlocalRunConfig:
    operator: NonlocalOperator
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
        if self.initial.grid != self.operator.grid:
            raise ValueError("initial data grid does not match operator grid")


def pressure_slope_bound(params: ModelParams, pair: SpeciesPair) -> float:
    """max_i sup |dp_i/du_i| = max_i (c_i + 2 a_i |u_i| + |u_j|) over cells."""
    s1 = float(np.max(np.abs(pair.u1.values)))
    s2 = float(np.max(np.abs(pair.u2.values)))
    return max(
        params.c[0] + 2.0 * params.a[0] * s1 + s2,
        params.c[1] + 2.0 * params.a[1] * s2 + s1,
    )


def reaction_slope_bound(params: ModelParams, pair: SpeciesPair) -> float:
    """max_i (alpha_i + 2 max(beta) ||u||_inf)."""
    umax = max(
        float(np.max(np.abs(pair.u1.values))), float(np.max(np.abs(pair.u2.values)))
    )
    beta_max = max(*params.beta[0], *params.beta[1])
    return max(params.alpha) + 2.0 * beta_max * umax


def stable_dt(config: NonlocalRunConfig, pair: SpeciesPair) -> float:
    """Step bound from diffusion stiffness and reaction slope, whichever is tighter."""
    lp = pressure_slope_bound(config.params, pair)
    diff = config.dt_safety / max(2.0 * config.operator.lipschitz_mass * lp, _EPS)
    react = config.dt_safety / (reaction_slope_bound(config.params, pair) + _EPS)
    return min(diff, react)


def _terms_builder(config: NonlocalRunConfig):
    op = config.operator
    params = config.params
    grid = op.grid
    vol = grid.cell_volume
    a1, a2 = params.a
    c1, c2 = params.c
    al1, al2 = params.alpha
    (b11, b12), (b21, b22) = params.beta
    no_reaction = reaction_is_zero(params)
    out1 = np.empty(grid.shape)
    out2 = np.empty(grid.shape)
    contrib = np.empty(grid.shape)

    def terms(pair: SpeciesPair) -> StepTerms:
        v1 = pair.u1.values
        v2 = pair.u2.values
        op.apply_values(v1 * (c1 + a1 * v1 + v2), out1)
        op.apply_values(v2 * (c2 + a2 * v2 + v1), out2)
        diss = a1 * op.square_sum_values(v1, contrib) + a2 * op.square_sum_values(
            v2, contrib
        )
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


def step(config: NonlocalRunConfig, pair: SpeciesPair, dt: float) -> SpeciesPair:
    """One forward-Euler step (no validity checks; run() enforces them)."""
    terms = _terms_builder(config)(pair)
    grid = pair.grid
    return SpeciesPair(
        Field(grid, pair.u1.values + dt * terms.rhs1),
        Field(grid, pair.u2.values + dt * terms.rhs2),
    )


def run(config: NonlocalRunConfig) -> Trajectory:
    """Integrate to params.t_final, landing exactly on every snapshot time."""
    return integrate(
        config.initial,
        config.params.t_final,
        config.snapshot_times,
        _terms_builder(config),
        lambda pair: stable_dt(config, pair),
        positivity_tol=config.positivity_tol,
        diag_stride=config.diag_stride,
        max_steps=config.max_steps,
    )
