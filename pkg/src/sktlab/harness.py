"""Study orchestration: configs to runs, error tables, CSV and JSON output.

Every emitter is deterministic: fixed column orders, %.17g floats,
LF newlines, sorted JSON keys, no timestamps.  Identical inputs must
produce byte-identical files.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ConfigError, StudyConfig
from .dual import DualProblem, DualSolution, solve_dual, write_iteration_log
from .evolution import Trajectory
from .grids import (
    FLOAT_FORMAT,
    Field,
    Grid,
    SpeciesPair,
    constant_field,
    field_from_function,
    lq_norm_spacetime,
    min_value,
    restrict_interior,
    total_mass,
    write_snapshot,
)
from .kernels import (
    DiscreteKernel,
    KernelFamily,
    KernelKind,
    KernelProfile,
    compute_c1,
    discretize,
    make_profile,
)
from .local_solver import LocalRunConfig, run_local
from .model import ModelParams, entropy, reaction_is_zero
from .nonlocal_op import NonlocalOperator, apply as op_apply, sobolev_ratio
from .nonlocal_solver import NonlocalRunConfig, run


# -- builders -----------------------------------------------------------

def build_profile(config: StudyConfig) -> KernelProfile:
    spec = config.require("kernel")
    return make_profile(KernelFamily(spec.family), spec.radius, spec.dimension)


def build_grid(config: StudyConfig) -> Grid:
    spec = config.require("grid")
    return Grid(spec.dimension, spec.extent, spec.cells)


def build_params(config: StudyConfig) -> ModelParams:
    m = config.require("model")
    return ModelParams(
        c=(m.c1, m.c2),
        a=(m.a1, m.a2),
        alpha=(m.alpha1, m.alpha2),
        beta=((m.beta11, m.beta12), (m.beta21, m.beta22)),
        t_final=m.t_final,
    )


def build_kernel(config: StudyConfig, scale: int, kind: KernelKind | None = None) -> DiscreteKernel:
    spec = config.require("kernel")
    if kind is None:
        kind = KernelKind.RESCALED if spec.kind == "rescaled" else KernelKind.DELTA_APPROX
    profile = build_profile(config)
    normalizer = compute_c1(profile)
    return discretize(
        profile,
        normalizer,
        scale,
        build_grid(config),
        kind=kind,
        min_cells_per_radius=spec.min_cells_per_radius,
    )


def build_operator(config: StudyConfig, scale: int) -> NonlocalOperator:
    kernel = build_kernel(config, scale, kind=KernelKind.RESCALED)
    return NonlocalOperator(kernel, build_grid(config))


def require_scale(config: StudyConfig) -> int:
    spec = config.require("kernel")
    if spec.scale is None:
        raise ConfigError("missing required key", key="kernel.scale")
    return spec.scale


def build_initial(config: StudyConfig, grid: Grid) -> SpeciesPair:
    spec = config.require("initial")
    fields = []
    for i in (0, 1):
        if spec.kind == "constant":
            fields.append(constant_field(grid, spec.value[i]))
        elif spec.kind == "gaussian":
            base = spec.baseline[i]
            amp = spec.amplitude[i]
            ctr = spec.center[i]
            wid = spec.width[i]

            def datum(*coords, base=base, amp=amp, ctr=ctr, wid=wid):
                s = sum((c - ctr) ** 2 for c in coords)
                return base + amp * np.exp(-s / (wid * wid))

            fields.append(field_from_function(grid, datum))
        else:
            base = spec.base[i]
            amp = spec.amplitude[i]
            freq = spec.frequency[i]
            length = grid.extent

            def datum(*coords, base=base, amp=amp, freq=freq, length=length):
                prof = np.ones_like(coords[0])
                for c in coords:
                    prof = prof * np.cos(2.0 * np.pi * freq * c / length)
                return base + amp * prof

            fields.append(field_from_function(grid, datum))
    return SpeciesPair(fields[0], fields[1])


def snapshot_schedule(t_final: float, count: int) -> tuple[float, ...]:
    if count < 2:
        raise ValueError(f"need at least 2 snapshots, got {count}")
    return tuple(np.linspace(0.0, t_final, count))


# -- deterministic emitters ---------------------------------------------

def write_report(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2, allow_nan=False)
        fh.write("\n")


def _csv_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return ""
    return FLOAT_FORMAT % v


def write_table(path, header: tuple[str, ...], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_csv_cell(v) for v in row) + "\n")


def _finite_or_none(v: float):
    v = float(v)
    return v if math.isfinite(v) else None


# -- single simulations -------------------------------------------------

def trajectory_report(traj: Trajectory, params: ModelParams) -> dict:
    first = traj.initial_state
    last = traj.final_state
    drift1 = total_mass(last.u1) - total_mass(first.u1) - traj.reaction_mass_integral[0]
    drift2 = total_mass(last.u2) - total_mass(first.u2) - traj.reaction_mass_integral[1]
    entropy_series = traj.diagnostics.column("E")
    diss = traj.diagnostics.column("D")
    max_rise = float(np.max(np.diff(entropy_series))) if entropy_series.size > 1 else 0.0
    traj_min = float(
        min(traj.diagnostics.column("min1").min(), traj.diagnostics.column("min2").min())
    )
    m1, m2 = total_mass(first.u1), total_mass(first.u2)
    checks = {
        "mass_ledger_closed": bool(
            abs(drift1) <= 1e-9 * max(m1, 1e-300)
            and abs(drift2) <= 1e-9 * max(m2, 1e-300)
        ),
        "positivity": bool(traj_min >= -1e-10),
    }
    if reaction_is_zero(params):
        # sampled at diag_stride; a per-step statement needs stride 1
        checks["entropy_monotone"] = bool(max_rise <= 1e-8)
        checks["entropy_plus_dissipation_bounded"] = bool(
            entropy_series[-1] + diss[-1] <= entropy_series[0] + 1e-6
        )
    return {
        "steps": traj.steps,
        "final_time": traj.final_time,
        "mass_drift": [drift1, drift2],
        "min_values": [min_value(last.u1), min_value(last.u2)],
        "entropy_initial": entropy(first),
        "entropy_final": entropy(last),
        "dissipation_integral": float(diss[-1]),
        "entropy_max_rise": max_rise,
        "entropy_plus_dissipation_final": float(entropy_series[-1] + diss[-1]),
        "checks": checks,
        "all_checks_pass": all(checks.values()),
    }


def run_nonlocal_simulation(config: StudyConfig) -> tuple[Trajectory, dict]:
    scale = require_scale(config)
    operator = build_operator(config, scale)
    params = build_params(config)
    initial = build_initial(config, operator.grid)
    rc = NonlocalRunConfig(
        operator=operator,
        params=params,
        initial=initial,
        dt_safety=config.solver.dt_safety,
        positivity_tol=config.solver.positivity_tol,
        diag_stride=config.solver.diag_stride,
        max_steps=config.solver.max_steps,
    )
    traj = run(rc)
    report = trajectory_report(traj, params)
    report["scale"] = scale
    report["kernel_mass"] = operator.kernel.total_mass
    return traj, report


def run_local_simulation(config: StudyConfig) -> tuple[Trajectory, dict]:
    grid = build_grid(config)
    params = build_params(config)
    initial = build_initial(config, grid)
    rc = LocalRunConfig(
        grid=grid,
        params=params,
        initial=initial,
        dt_safety=config.solver.dt_safety,
        positivity_tol=config.solver.positivity_tol,
        diag_stride=config.solver.diag_stride,
        max_steps=config.solver.max_steps,
    )
    traj = run_local(rc)
    return traj, trajectory_report(traj, params)


def write_simulation_outputs(out_dir, traj: Trajectory, report: dict, command: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    traj.diagnostics.write_csv(out / "diagnostics.csv")
    t0, first = traj.snapshots[0]
    t1, last = traj.snapshots[-1]
    write_snapshot(out / "u1_initial.txt", t0, first.u1)
    write_snapshot(out / "u2_initial.txt", t0, first.u2)
    write_snapshot(out / "u1_final.txt", t1, last.u1)
    write_snapshot(out / "u2_final.txt", t1, last.u2)
    payload = dict(report)
    payload["command"] = command
    write_report(out / "report.json", payload)


# -- convergence study --------------------------------------------------

@dataclass(frozen=True)
class ConvergenceReport:
    n_list: tuple[int, ...]
    q: float
    e1: tuple[float, ...]
    e2: tuple[float, ...]
    e_total: tuple[float, ...]
    rates: tuple[float, ...]  # between consecutive factor-2 scales, nan elsewhere
    local_steps: int
    nonlocal_steps: tuple[int, ...]

    def rows(self):
        out = []
        for k, n in enumerate(self.n_list):
            rate = float("nan") if k == 0 else self.rates[k - 1]
            out.append((n, self.e1[k], self.e2[k], self.e_total[k], rate))
        return out


def _nonlocal_case(args) -> tuple[int, Trajectory]:
    config, n, times = args
    operator = build_operator(config, n)
    rc = NonlocalRunConfig(
        operator=operator,
        params=build_params(config),
        initial=build_initial(config, operator.grid),
        snapshot_times=times,
        dt_safety=config.solver.dt_safety,
        positivity_tol=config.solver.positivity_tol,
        diag_stride=config.solver.diag_stride,
        max_steps=config.solver.max_steps,
    )
    return n, run(rc)


def _spacetime_error(
    reference: Trajectory, candidate: Trajectory, times, grid: Grid, q: float
) -> tuple[float, float, float]:
    diffs1 = []
    diffs2 = []
    for t in times:
        ref = reference.at(t)
        cand = candidate.at(t)
        diffs1.append((t, Field(grid, cand.u1.values - ref.u1.values)))
        diffs2.append((t, Field(grid, cand.u2.values - ref.u2.values)))
    e1 = lq_norm_spacetime(diffs1, q)
    e2 = lq_norm_spacetime(diffs2, q)
    e_total = (e1**q + e2**q) ** (1.0 / q)
    return e1, e2, e_total


def run_convergence_study(config: StudyConfig, jobs: int = 1) -> ConvergenceReport:
    """Local reference plus one nonlocal run per scale, same snapshot grid."""
    grid = build_grid(config)
    params = build_params(config)
    # surface resolution problems before any long run
    for n in config.study.n_list:
        build_kernel(config, n)
    times = snapshot_schedule(params.t_final, config.study.snapshots)
    initial = build_initial(config, grid)
    local_rc = LocalRunConfig(
        grid=grid,
        params=params,
        initial=initial,
        snapshot_times=times,
        dt_safety=config.solver.dt_safety,
        positivity_tol=config.solver.positivity_tol,
        diag_stride=config.solver.diag_stride,
        max_steps=config.solver.max_steps,
    )
    reference = run_local(local_rc)

    cases = [(config, n, times) for n in config.study.n_list]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = dict(pool.map(_nonlocal_case, cases))
    else:
        results = dict(map(_nonlocal_case, cases))

    q = config.study.q
    e1s, e2s, etots, steps = [], [], [], []
    for n in config.study.n_list:
        traj = results[n]
        e1, e2, e_total = _spacetime_error(reference, traj, times, grid, q)
        e1s.append(e1)
        e2s.append(e2)
        etots.append(e_total)
        steps.append(traj.steps)

    rates = []
    ns = config.study.n_list
    for k in range(len(ns) - 1):
        if ns[k + 1] == 2 * ns[k] and etots[k] > 0.0 and etots[k + 1] > 0.0:
            rates.append(math.log2(etots[k] / etots[k + 1]))
        else:
            rates.append(float("nan"))

    return ConvergenceReport(
        n_list=tuple(ns),
        q=q,
        e1=tuple(e1s),
        e2=tuple(e2s),
        e_total=tuple(etots),
        rates=tuple(rates),
        local_steps=reference.steps,
        nonlocal_steps=tuple(steps),
    )


def write_convergence_outputs(out_dir, report: ConvergenceReport) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_table(out / "convergence.csv", ("n", "e1", "e2", "e_total", "rate"), report.rows())
    monotone = all(b < a for a, b in zip(report.e_total, report.e_total[1:]))
    payload = {
        "command": "convergence-study",
        "n_list": list(report.n_list),
        "q": report.q,
        "e1": list(report.e1),
        "e2": list(report.e2),
        "e_total": list(report.e_total),
        "rates": [_finite_or_none(r) for r in report.rates],
        "local_steps": report.local_steps,
        "nonlocal_steps": list(report.nonlocal_steps),
        "monotone_decrease_observed": monotone,
        "monotone_decrease_note": (
            "empirical observation on benign data; the limit theory guarantees "
            "convergence only along a subsequence, so monotone decrease in n is "
            "checked, not assumed"
        ),
    }
    write_report(out / "report.json", payload)


# -- operator consistency -----------------------------------------------

def _consistency_fields(config: StudyConfig, grid: Grid) -> tuple[Field, Field]:
    """Smooth test function and its exact local diffusion image."""
    name = config.consistency_function
    length = grid.extent
    dim = grid.dimension
    if name == "cosine":
        w = 2.0 * np.pi / length

        def phi(*coords):
            prof = np.ones_like(coords[0])
            for c in coords:
                prof = prof * np.cos(w * c)
            return prof

        def lap(*coords):
            return -dim * w * w * phi(*coords)

    elif name == "quadratic":

        def phi(*coords):
            return sum(c**2 for c in coords)

        def lap(*coords):
            return np.full_like(coords[0], 2.0 * dim)

    else:
        m = 0.5 * length
        wd = length / 8.0

        def phi(*coords):
            s = sum((c - m) ** 2 for c in coords)
            return np.exp(-s / (wd * wd))

        def lap(*coords):
            s = sum((c - m) ** 2 for c in coords)
            return np.exp(-s / (wd * wd)) * (4.0 * s / wd**4 - 2.0 * dim / wd**2)

    return field_from_function(grid, phi), field_from_function(grid, lap)


@dataclass(frozen=True)
class ConsistencyReport:
    n_list: tuple[int, ...]
    function: str
    max_errors: tuple[float, ...]
    rates: tuple[float, ...]

    def rows(self):
        out = []
        for k, n in enumerate(self.n_list):
            rate = float("nan") if k == 0 else self.rates[k - 1]
            out.append((n, self.max_errors[k], rate))
        return out


def run_consistency_test(config: StudyConfig) -> ConsistencyReport:
    """Sup-norm interior error of the rescaled stencil against the exact
    second-derivative image, one row per scale."""
    grid = build_grid(config)
    spec = config.require("kernel")
    phi, lap_exact = _consistency_fields(config, grid)
    errors = []
    for n in config.study.n_list:
        operator = build_operator(config, n)
        image = op_apply(operator, phi)
        margin = spec.radius / n + 2.0 * grid.h
        approx = restrict_interior(image, margin)
        exact = restrict_interior(lap_exact, margin)
        errors.append(float(np.max(np.abs(approx.values - exact.values))))
    ns = config.study.n_list
    rates = []
    for k in range(len(ns) - 1):
        if ns[k + 1] == 2 * ns[k] and errors[k] > 0.0 and errors[k + 1] > 0.0:
            rates.append(math.log2(errors[k] / errors[k + 1]))
        else:
            rates.append(float("nan"))
    return ConsistencyReport(
        n_list=tuple(ns),
        function=config.consistency_function,
        max_errors=tuple(errors),
        rates=tuple(rates),
    )


def write_consistency_outputs(out_dir, report: ConsistencyReport) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_table(out / "consistency.csv", ("n", "max_err", "rate"), report.rows())
    payload = {
        "command": "consistency-test",
        "function": report.function,
        "n_list": list(report.n_list),
        "max_errors": list(report.max_errors),
        "rates": [_finite_or_none(r) for r in report.rates],
    }
    write_report(out / "report.json", payload)


# -- scale-uniform norm-ratio audit --------------------------------------

@dataclass(frozen=True)
class BoundednessReport:
    n_list: tuple[int, ...]
    p: float
    ratios: tuple[float, ...]
    max_over_min: float
    bounded: bool

    def rows(self):
        return [(n, r) for n, r in zip(self.n_list, self.ratios)]


def quartic_bump(grid: Grid) -> Field:
    """Product bump x^2 (L-x)^2 per axis: flat at the boundary to two orders."""
    length = grid.extent

    def xi(*coords):
        prof = np.ones_like(coords[0])
        for c in coords:
            prof = prof * (c * (length - c)) ** 2
        return prof

    return field_from_function(grid, xi)


def run_boundedness_audit(config: StudyConfig) -> BoundednessReport:
    """Ratio of the stencil image norm to a discrete second-order norm,
    checked for scale uniformity across n_list."""
    grid = build_grid(config)
    xi = quartic_bump(grid)
    p = config.audit_p
    ratios = []
    for n in config.study.n_list:
        operator = build_operator(config, n)
        ratios.append(sobolev_ratio(operator, xi, p))
    max_over_min = max(ratios) / min(ratios)
    return BoundednessReport(
        n_list=tuple(config.study.n_list),
        p=p,
        ratios=tuple(ratios),
        max_over_min=max_over_min,
        bounded=bool(max_over_min <= 4.0),
    )


def write_boundedness_outputs(out_dir, report: BoundednessReport) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_table(out / "boundedness.csv", ("n", "ratio"), report.rows())
    payload = {
        "command": "lemma4-audit",
        "p": report.p,
        "n_list": list(report.n_list),
        "ratios": list(report.ratios),
        "max_over_min": report.max_over_min,
        "bounded": report.bounded,
    }
    write_report(out / "report.json", payload)


# -- dual solve -----------------------------------------------------------

def run_dual_solve(config: StudyConfig) -> tuple[DualSolution, dict]:
    d = config.dual
    if d.a is None:
        raise ConfigError("missing required key", key="dual.a")
    scale = require_scale(config)
    grid = build_grid(config)
    kernel = build_kernel(config, scale)
    a, b, c = d.a, d.b, d.c

    problem = DualProblem(
        kernel=kernel,
        grid=grid,
        coefficient=lambda t: np.full(grid.shape, a),
        source=lambda t: np.full(grid.shape, b),
        initial=np.full(grid.shape, c),
        t_final=d.t_final,
        coefficient_bound=abs(a),
    )
    solution = solve_dual(
        problem,
        picard_tol=d.picard_tol,
        max_iters=d.max_iters,
        substeps=d.substeps,
    )
    report = {
        "command": "dual-solve",
        "slab_count": solution.schedule.slab_count,
        "slab_length": solution.schedule.slab_length,
        "predicted_contraction": solution.schedule.predicted_contraction,
        "observed_contractions": list(solution.slab_contractions),
        "iterations": len(solution.records),
        "min_value": solution.min_value(),
        "final_sup": float(np.max(np.abs(solution.values[-1]))),
    }
    return solution, report


def write_dual_outputs(out_dir, solution: DualSolution, report: dict) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_iteration_log(solution.records, out / "iterations.csv")
    write_report(out / "report.json", report)
