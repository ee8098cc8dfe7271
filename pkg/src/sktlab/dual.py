"""Linear dual problem: d(phi)/dt = a * L phi + b, phi(0) = c.

L is the stencil operator of any discrete kernel.  On a short time slab
the right-hand side defines a contraction in sup norm with factor
(slab length) * 2 * ||a||_inf * (kernel mass), so fixed-point iteration
converges; slabs are chained to cover [0, t_final].  The slab length is
planned with a 0.5 safety factor against that bound.

The terminal transform turns a solution run backward in time into a
nonnegative test function vanishing at the final time, with prescribed
forcing; see terminal_test_function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .evolution import SolverError, Trajectory
from .grids import Grid
from .kernels import DiscreteKernel
from .model import ModelParams, pressure_per_capita
from .nonlocal_op import stencil_apply


class NoContractionError(SolverError):
    """Fixed-point increments grew; the slab bound should make this impossible."""


class MaxIterationsError(SolverError):
    """Fixed-point iteration did not reach the tolerance in max_iters."""


@dataclass(eq=False)
class DualProblem:
    kernel: DiscreteKernel
    grid: Grid
    coefficient: Callable[[float], np.ndarray]
    source: Callable[[float], np.ndarray]
    initial: np.ndarray
    t_final: float
    coefficient_bound: float

    def __post_init__(self):
        if not (self.t_final > 0.0 and math.isfinite(self.t_final)):
            raise ValueError(f"t_final must be positive, got {self.t_final}")
        if not (self.coefficient_bound >= 0.0 and math.isfinite(self.coefficient_bound)):
            raise ValueError(
                f"coefficient_bound must be finite and nonnegative, got "
                f"{self.coefficient_bound}"
            )
        self.initial = np.ascontiguousarray(self.initial, dtype=np.float64)
        if self.initial.shape != self.grid.shape:
            raise ValueError("initial datum shape does not match grid")

    @property
    def lipschitz(self) -> float:
        """Sup-norm Lipschitz constant 2 ||a||_inf ||kernel||_mass of the integrand."""
        return 2.0 * self.coefficient_bound * float(np.sum(np.abs(self.kernel.weights)))


@dataclass(frozen=True)
class SlabSchedule:
    slab_length: float
    slab_count: int
    predicted_contraction: float

    @staticmethod
    def plan(problem: DualProblem, safety: float = 0.5) -> "SlabSchedule":
        if not (0.0 < safety < 1.0):
            raise ValueError(f"safety must lie in (0, 1), got {safety}")
        lip = problem.lipschitz
        if lip <= 0.0:
            return SlabSchedule(problem.t_final, 1, 0.0)
        count = max(1, int(math.ceil(problem.t_final * lip / safety - 1e-12)))
        length = problem.t_final / count
        return SlabSchedule(length, count, length * lip)


@dataclass(frozen=True)
class PicardRecord:
    slab: int
    iteration: int
    increment: float
    ratio: float  # nan for the first iteration of each slab


@dataclass(eq=False)
class DualSolution:
    times: np.ndarray  # global sub-grid nodes, strictly increasing
    values: np.ndarray  # (len(times), *grid.shape)
    schedule: SlabSchedule
    records: list[PicardRecord]
    slab_contractions: list[float]

    def at(self, t: float) -> np.ndarray:
        if t <= self.times[0]:
            return self.values[0].copy()
        if t >= self.times[-1]:
            return self.values[-1].copy()
        j = int(np.searchsorted(self.times, t, side="right")) - 1
        t0, t1 = self.times[j], self.times[j + 1]
        if t == t0:
            return self.values[j].copy()
        w = (t - t0) / (t1 - t0)
        return (1.0 - w) * self.values[j] + w * self.values[j + 1]

    def min_value(self) -> float:
        return float(np.min(self.values))


def solve_dual(
    problem: DualProblem,
    picard_tol: float = 1e-8,
    max_iters: int = 200,
    substeps: int = 32,
    safety: float = 0.5,
    initial_guess: Callable[[float], np.ndarray] | None = None,
) -> DualSolution:
    """Chain contraction slabs over [0, t_final].

    Each slab iterates w <- c + cumtrapz(a * L w + b) on substeps+1 nodes
    until the sup-norm increment falls to picard_tol, starting from the
    slab datum extended constant in time (or initial_guess on the first
    slab).  Divergent increments raise NoContractionError; exhausting
    max_iters raises MaxIterationsError.
    """
    if substeps < 2:
        raise ValueError(f"substeps must be at least 2, got {substeps}")
    if picard_tol <= 0.0:
        raise ValueError(f"picard_tol must be positive, got {picard_tol}")
    schedule = SlabSchedule.plan(problem, safety=safety)
    grid = problem.grid
    shape = grid.shape
    n_sub = substeps
    total_nodes = schedule.slab_count * n_sub + 1
    times = np.empty(total_nodes)
    values = np.empty((total_nodes,) + shape)
    records: list[PicardRecord] = []
    slab_contractions: list[float] = []

    datum = problem.initial.copy()
    for s in range(schedule.slab_count):
        t_start = s * schedule.slab_length
        dt = schedule.slab_length / n_sub
        ts = t_start + dt * np.arange(n_sub + 1)
        coeff = [problem.coefficient(float(t)) for t in ts]
        src = [problem.source(float(t)) for t in ts]
        w = np.empty((n_sub + 1,) + shape)
        if s == 0 and initial_guess is not None:
            for j in range(n_sub + 1):
                w[j] = initial_guess(float(ts[j]))
        else:
            w[:] = datum  # constant-in-time extension of the slab datum
        prev_inc = None
        ratios: list[float] = []
        for m in range(1, max_iters + 1):
            g = np.empty_like(w)
            for j in range(n_sub + 1):
                g[j] = coeff[j] * stencil_apply(problem.kernel, grid, w[j]) + src[j]
            w_new = np.empty_like(w)
            w_new[0] = datum
            for j in range(1, n_sub + 1):
                w_new[j] = w_new[j - 1] + (0.5 * dt) * (g[j - 1] + g[j])
            inc = float(np.max(np.abs(w_new - w)))
            if prev_inc is None:
                ratio = float("nan")
            else:
                ratio = inc / prev_inc if prev_inc > 0.0 else 0.0
                if inc > prev_inc and inc > 10.0 * picard_tol:
                    records.append(PicardRecord(s, m, inc, ratio))
                    raise NoContractionError(
                        f"slab {s}: increment grew from {prev_inc:.3e} to {inc:.3e}"
                    )
                if prev_inc > picard_tol:
                    ratios.append(ratio)
            records.append(PicardRecord(s, m, inc, ratio))
            w = w_new
            if inc <= picard_tol:
                break
            prev_inc = inc
        else:
            raise MaxIterationsError(
                f"slab {s}: no convergence to {picard_tol:.1e} in {max_iters} iterations"
            )
        slab_contractions.append(max(ratios) if ratios else 0.0)
        lo = s * n_sub
        times[lo : lo + n_sub + 1] = ts
        values[lo : lo + n_sub + 1] = w
        datum = w[n_sub].copy()

    return DualSolution(
        times=times,
        values=values,
        schedule=schedule,
        records=records,
        slab_contractions=slab_contractions,
    )


def write_iteration_log(records: Sequence[PicardRecord], path) -> None:
    """CSV of fixed-point progress: slab, iteration, increment, contraction."""
    lines = ["slab,iteration,increment,contraction"]
    for r in records:
        ratio = "" if math.isnan(r.ratio) else "%.17g" % r.ratio
        lines.append(f"{r.slab},{r.iteration},{'%.17g' % r.increment},{ratio}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass(eq=False)
class TerminalTestFunction:
    """Backward-transformed dual solution: nonnegative, zero at the final time."""

    times: np.ndarray
    values: np.ndarray
    decay_rate: float
    species: int

    def at(self, t: float) -> np.ndarray:
        j = int(np.searchsorted(self.times, t, side="right")) - 1
        j = max(0, min(j, len(self.times) - 2))
        t0, t1 = self.times[j], self.times[j + 1]
        if t == t0:
            return self.values[j].copy()
        w = (t - t0) / (t1 - t0)
        return (1.0 - w) * self.values[j] + w * self.values[j + 1]


def trajectory_coefficient_bound(
    trajectory: Trajectory, params: ModelParams, species: int
) -> float:
    """sup over snapshots of the per-capita pressure (linear interp attains it there)."""
    best = 0.0
    for _, pair in trajectory.snapshots:
        vals = pressure_per_capita(params, species, pair).values
        best = max(best, float(np.max(np.abs(vals))))
    return best


def terminal_test_function(
    trajectory: Trajectory,
    params: ModelParams,
    species: int,
    decay_rate: float,
    forcing: Callable[[float], np.ndarray],
    kernel: DiscreteKernel,
    picard_tol: float = 1e-8,
    max_iters: int = 200,
    substeps: int = 32,
) -> TerminalTestFunction:
    """Nonnegative test function for one species along a stored trajectory.

    Solves the dual problem forward with coefficient a(t) = per-capita
    pressure at trajectory time T - t, source b(t) = -exp(rate*t) *
    forcing(T-t) * sqrt(a(t)), zero initial datum, then flips time and
    applies the exponential weight.  The forcing must be nonpositive,
    which makes b nonnegative and hence the result nonnegative.
    """
    if species not in (1, 2):
        raise ValueError(f"species index must be 1 or 2, got {species}")
    horizon = trajectory.final_time
    grid = trajectory.initial_state.grid

    def coefficient(t: float) -> np.ndarray:
        return pressure_per_capita(params, species, trajectory.at(horizon - t)).values

    def source(t: float) -> np.ndarray:
        psi = np.asarray(forcing(horizon - t), dtype=np.float64)
        if np.any(psi > 1e-12):
            raise ValueError("forcing must be nonpositive")
        return -math.exp(decay_rate * t) * psi * np.sqrt(coefficient(t))

    problem = DualProblem(
        kernel=kernel,
        grid=grid,
        coefficient=coefficient,
        source=source,
        initial=np.zeros(grid.shape),
        t_final=horizon,
        coefficient_bound=trajectory_coefficient_bound(trajectory, params, species),
    )
    sol = solve_dual(problem, picard_tol=picard_tol, max_iters=max_iters, substeps=substeps)
    n = len(sol.times)
    times_out = np.empty(n)
    values_out = np.empty_like(sol.values)
    for k in range(n):
        back = n - 1 - k
        s = sol.times[back]
        times_out[k] = horizon - s
        values_out[k] = math.exp(-decay_rate * s) * sol.values[back]
    return TerminalTestFunction(
        times=times_out, values=values_out, decay_rate=decay_rate, species=species
    )


def terminal_residual(
    test_fn: TerminalTestFunction,
    trajectory: Trajectory,
    params: ModelParams,
    forcing: Callable[[float], np.ndarray],
    kernel: DiscreteKernel,
) -> float:
    """Discrete space-time L2 norm of the defect in the backward equation.

    Checks d(phi)/dt + a * L phi - rate * phi = sqrt(a) * forcing at
    interior time nodes, with centered time differences.
    """
    grid = trajectory.initial_state.grid
    times = test_fn.times
    vals = test_fn.values
    vol = grid.cell_volume
    total = 0.0
    for k in range(1, len(times) - 1):
        dt2 = times[k + 1] - times[k - 1]
        dphi = (vals[k + 1] - vals[k - 1]) / dt2
        a_k = pressure_per_capita(params, test_fn.species, trajectory.at(times[k])).values
        lphi = stencil_apply(kernel, grid, vals[k])
        r = dphi + a_k * lphi - test_fn.decay_rate * vals[k] - np.sqrt(a_k) * np.asarray(
            forcing(times[k])
        )
        weight = 0.5 * (times[k + 1] - times[k - 1])
        total += float(np.sum(r * r)) * vol * weight
    return math.sqrt(total)
