"""Two-species cross-diffusion model: pressures, reactions, entropy.

Species i diffuses through the pressure p_i(u) = u_i * (c_i + a_i u_i + u_j)
and reacts through the competition term f_i(u) = u_i * (alpha_i - beta_i1 u_1
- beta_i2 u_2).  The per-capita pressure c_i + a_i u_i + u_j stays defined
at u_i = 0 and is what the dual problem uses as diffusion coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grids import Field, SpeciesPair


@dataclass(frozen=True)
class ModelParams:
    c: tuple[float, float]
    a: tuple[float, float]
    alpha: tuple[float, float]
    beta: tuple[tuple[float, float], tuple[float, float]]
    t_final: float

    def __post_init__(self):
        flat = (*self.c, *self.a, *self.alpha, *self.beta[0], *self.beta[1])
        if any(not math.isfinite(v) or v < 0.0 for v in flat):
            raise ValueError("model coefficients must be finite and nonnegative")
        if not (self.t_final > 0.0 and math.isfinite(self.t_final)):
            raise ValueError(f"t_final must be positive, got {self.t_final}")


def _pick(pair: SpeciesPair, i: int) -> tuple[np.ndarray, np.ndarray]:
    if i == 1:
        return pair.u1.values, pair.u2.values
    if i == 2:
        return pair.u2.values, pair.u1.values
    raise ValueError(f"species index must be 1 or 2, got {i}")


def diffusion_pressure(params: ModelParams, i: int, pair: SpeciesPair) -> Field:
    """p_i(u) = u_i * (c_i + a_i u_i + u_j)."""
    ui, uj = _pick(pair, i)
    k = i - 1
    return Field(pair.grid, ui * (params.c[k] + params.a[k] * ui + uj))


def pressure_per_capita(params: ModelParams, i: int, pair: SpeciesPair) -> Field:
    """c_i + a_i u_i + u_j: the pressure divided by u_i, finite at u_i = 0."""
    ui, uj = _pick(pair, i)
    k = i - 1
    return Field(pair.grid, params.c[k] + params.a[k] * ui + uj)


def reaction(params: ModelParams, i: int, pair: SpeciesPair) -> Field:
    """f_i(u) = u_i * (alpha_i - beta_i1 u_1 - beta_i2 u_2)."""
    ui, _ = _pick(pair, i)
    k = i - 1
    b = params.beta[k]
    return Field(
        pair.grid,
        ui * (params.alpha[k] - b[0] * pair.u1.values - b[1] * pair.u2.values),
    )


def reaction_is_zero(params: ModelParams) -> bool:
    return all(v == 0.0 for v in (*params.alpha, *params.beta[0], *params.beta[1]))


def entropy_density(values: np.ndarray) -> np.ndarray:
    """u*(ln u - 1) + 1 cellwise, with the limit value 1 at u = 0."""
    if np.any(values < 0.0):
        raise ValueError("entropy undefined for negative values")
    out = np.ones_like(values)
    mask = values > 0.0
    v = values[mask]
    out[mask] = v * (np.log(v) - 1.0) + 1.0
    return out


def entropy(pair: SpeciesPair) -> float:
    """Sum over species of int u*(ln u - 1) + 1; nonnegative, zero only at u = 1."""
    vol = pair.grid.cell_volume
    e1 = float(np.sum(entropy_density(pair.u1.values)))
    e2 = float(np.sum(entropy_density(pair.u2.values)))
    return (e1 + e2) * vol
