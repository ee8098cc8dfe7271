"""Shared forward-Euler driver, trajectory storage, and run diagnostics.

Both solvers (integral-kernel and local) feed this loop: a terms builder
returns the two right-hand sides, the reaction mass rates, and the
instantaneous entropy-dissipation rate; the driver owns step-size
clipping so snapshots land on requested times exactly, accumulates the
dissipation integral with a left-endpoint rule, and enforces positivity
and finiteness after every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np

from .grids import FLOAT_FORMAT, Field, SpeciesPair, min_value, total_mass
from .model import entropy


class SolverError(RuntimeError):
    """Time integration failed; .time carries the failure time when known."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class PositivityBreachError(SolverError):
    pass


class NonFiniteError(SolverError):
    pass


DIAGNOSTIC_COLUMNS = ("t", "E", "D", "mass1", "mass2", "min1", "min2", "dt")


@dataclass
class DiagnosticsSeries:
    """Columnar per-step record: entropy, cumulative dissipation, masses, minima, dt."""

    rows: list[tuple[float, ...]] = dc_field(default_factory=list)

    def append(self, *row: float) -> None:
        if len(row) != len(DIAGNOSTIC_COLUMNS):
            raise ValueError(f"expected {len(DIAGNOSTIC_COLUMNS)} entries, got {len(row)}")
        self.rows.append(tuple(float(v) for v in row))

    def column(self, name: str) -> np.ndarray:
        idx = DIAGNOSTIC_COLUMNS.index(name)
        return np.array([r[idx] for r in self.rows])

    def write_csv(self, path) -> None:
        lines = [",".join(DIAGNOSTIC_COLUMNS)]
        for row in self.rows:
            lines.append(",".join(FLOAT_FORMAT % v for v in row))
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


@dataclass
class Trajectory:
    """Snapshots at requested times plus the diagnostics series."""

    snapshots: list[tuple[float, SpeciesPair]]
    diagnostics: DiagnosticsSeries
    reaction_mass_integral: tuple[float, float]
    steps: int

    @property
    def final_time(self) -> float:
        return self.snapshots[-1][0]

    @property
    def initial_state(self) -> SpeciesPair:
        return self.snapshots[0][1]

    @property
    def final_state(self) -> SpeciesPair:
        return self.snapshots[-1][1]

    def snapshot_times(self) -> np.ndarray:
        return np.array([t for t, _ in self.snapshots])

    def at(self, t: float) -> SpeciesPair:
        """State at time t by linear interpolation between snapshots."""
        times = self.snapshot_times()
        if t <= times[0]:
            return self.snapshots[0][1].copy()
        if t >= times[-1]:
            return self.snapshots[-1][1].copy()
        j = int(np.searchsorted(times, t, side="right")) - 1
        t0, s0 = self.snapshots[j]
        t1, s1 = self.snapshots[j + 1]
        if t == t0:
            return s0.copy()
        w = (t - t0) / (t1 - t0)
        grid = s0.grid
        return SpeciesPair(
            Field(grid, (1.0 - w) * s0.u1.values + w * s1.u1.values),
            Field(grid, (1.0 - w) * s0.u2.values + w * s1.u2.values),
        )


@dataclass
class StepTerms:
    """Per-state quantities the driver needs for one Euler step."""

    rhs1: np.ndarray
    rhs2: np.ndarray
    reaction_rate: tuple[float, float]
    dissipation_rate: float


def _clamped_entropy(pair: SpeciesPair) -> float:
    grid = pair.grid
    return entropy(
        SpeciesPair(
            Field(grid, np.maximum(pair.u1.values, 0.0)),
            Field(grid, np.maximum(pair.u2.values, 0.0)),
        )
    )


def _check_state(pair: SpeciesPair, positivity_tol: float, t: float) -> None:
    for f in (pair.u1, pair.u2):
        if not f.is_finite():
            raise NonFiniteError(f"state became non-finite at t={t:.9g}", time=t)
    low = min(min_value(pair.u1), min_value(pair.u2))
    if low < -positivity_tol:
        raise PositivityBreachError(
            f"cell value {low:.3e} below -{positivity_tol:.1e} at t={t:.9g}", time=t
        )


def prepare_event_times(snapshot_times: Sequence[float] | None, t_final: float) -> list[float]:
    """Sorted unique stop times, always including 0 and t_final."""
    events = {0.0, float(t_final)}
    for t in snapshot_times or ():
        ft = float(t)
        if ft < 0.0 or ft > t_final * (1.0 + 1e-12):
            raise ValueError(f"snapshot time {ft} outside [0, {t_final}]")
        events.add(min(ft, float(t_final)))
    return sorted(events)


def integrate(
    initial: SpeciesPair,
    t_final: float,
    snapshot_times: Sequence[float] | None,
    terms_fn: Callable[[SpeciesPair], StepTerms],
    stable_dt_fn: Callable[[SpeciesPair], float],
    positivity_tol: float = 1e-10,
    diag_stride: int = 10,
    max_steps: int = 10_000_000,
) -> Trajectory:
    """Forward Euler up to t_final with event-aligned steps.

    Steps are clipped so every snapshot time is hit exactly; the
    dissipation integral D(t) accumulates left-endpoint rates.  Raises
    PositivityBreachError / NonFiniteError with the failing time, and
    SolverError if max_steps is exhausted.
    """
    if diag_stride < 1:
        raise ValueError(f"diag_stride must be positive, got {diag_stride}")
    events = prepare_event_times(snapshot_times, t_final)
    state = initial.copy()
    _check_state(state, positivity_tol, 0.0)

    grid = state.grid
    vol = grid.cell_volume
    diagnostics = DiagnosticsSeries()
    snapshots: list[tuple[float, SpeciesPair]] = [(0.0, state.copy())]
    diss_acc = 0.0
    ledger = [0.0, 0.0]
    t = 0.0
    steps = 0
    event_idx = 1  # events[0] == 0.0 already consumed
    last_dt = 0.0
    last_diag_t = -1.0

    while t < t_final:
        dt_stable = stable_dt_fn(state)
        if not (dt_stable > 0.0 and np.isfinite(dt_stable)):
            raise SolverError(f"stable step size {dt_stable!r} at t={t:.9g}", time=t)
        gap = events[event_idx] - t
        if dt_stable >= gap:
            dt = gap
            lands = True
        else:
            dt = dt_stable
            lands = False

        terms = terms_fn(state)
        if steps % diag_stride == 0:
            diagnostics.append(
                t,
                _clamped_entropy(state),
                diss_acc,
                total_mass(state.u1),
                total_mass(state.u2),
                min_value(state.u1),
                min_value(state.u2),
                dt,
            )
            last_diag_t = t
        diss_acc += dt * terms.dissipation_rate
        ledger[0] += dt * terms.reaction_rate[0]
        ledger[1] += dt * terms.reaction_rate[1]
        state = SpeciesPair(
            Field(grid, state.u1.values + dt * terms.rhs1),
            Field(grid, state.u2.values + dt * terms.rhs2),
        )
        steps += 1
        last_dt = dt
        if lands:
            t = events[event_idx]
            snapshots.append((t, state.copy()))
            event_idx += 1
        else:
            t_new = t + dt
            if t_new >= events[event_idx]:  # rounding pushed us onto the event
                t = events[event_idx]
                snapshots.append((t, state.copy()))
                event_idx += 1
            else:
                t = t_new
        _check_state(state, positivity_tol, t)
        if steps > max_steps:
            raise SolverError(f"exceeded {max_steps} steps at t={t:.9g}", time=t)

    if last_diag_t != t:
        diagnostics.append(
            t,
            _clamped_entropy(state),
            diss_acc,
            total_mass(state.u1),
            total_mass(state.u2),
            min_value(state.u1),
            min_value(state.u2),
            last_dt,
        )
    return Trajectory(
        snapshots=snapshots,
        diagnostics=diagnostics,
        reaction_mass_integral=(ledger[0], ledger[1]),
        steps=steps,
    )


def richardson_rate(errors: Sequence[float]) -> list[float]:
    """log2 ratios of consecutive error values (assumes factor-2 refinement)."""
    rates = []
    for coarse, fine in zip(errors, list(errors)[1:]):
        if fine <= 0.0 or coarse <= 0.0:
            rates.append(float("nan"))
        else:
            rates.append(float(np.log2(coarse / fine)))
    return rates
