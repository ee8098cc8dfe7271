"""Time-stepping loop mechanics, independent of any spatial operator."""

import numpy as np
import pytest

from sktlab import Field, Grid, PositivityBreachError, SolverError, SpeciesPair, constant_field
from sktlab.evolution import (
    DIAGNOSTIC_COLUMNS,
    StepTerms,
    Trajectory,
    integrate,
    prepare_event_times,
    richardson_rate,
)

GRID = Grid(1, 1.0, 8)


def _pair(v1=1.0, v2=2.0):
    return SpeciesPair(constant_field(GRID, v1), constant_field(GRID, v2))


def _decay_terms(rate=1.0):
    def terms(pair):
        return StepTerms(
            rhs1=-rate * pair.u1.values,
            rhs2=-rate * pair.u2.values,
            reaction_rate=(
                -rate * float(np.sum(pair.u1.values)) * GRID.cell_volume,
                -rate * float(np.sum(pair.u2.values)) * GRID.cell_volume,
            ),
            dissipation_rate=0.0,
        )

    return terms


def test_event_times_include_endpoints():
    assert prepare_event_times([0.5], 1.0) == [0.0, 0.5, 1.0]
    assert prepare_event_times(None, 2.0) == [0.0, 2.0]
    assert prepare_event_times([0.25, 0.25, 0.75], 1.0) == [0.0, 0.25, 0.75, 1.0]
    with pytest.raises(ValueError):
        prepare_event_times([1.5], 1.0)


def test_snapshots_land_exactly():
    times = (0.3, 0.7)
    traj = integrate(_pair(), 1.0, times, _decay_terms(0.5), lambda pair: 0.02)
    assert list(traj.snapshot_times()) == [0.0, 0.3, 0.7, 1.0]
    # exponential decay, first order in dt
    final = traj.final_state.u1.values[0]
    assert final == pytest.approx(np.exp(-0.5), abs=5e-3)


def test_reaction_mass_ledger_closes():
    traj = integrate(_pair(), 1.0, None, _decay_terms(0.5), lambda pair: 0.01)
    drift = (
        float(np.sum(traj.final_state.u1.values)) * GRID.cell_volume
        - float(np.sum(traj.initial_state.u1.values)) * GRID.cell_volume
        - traj.reaction_mass_integral[0]
    )
    assert abs(drift) < 1e-12


def test_positivity_breach_reports_time():
    def sink(pair):
        return StepTerms(
            rhs1=np.full(GRID.shape, -10.0),
            rhs2=np.zeros(GRID.shape),
            reaction_rate=(0.0, 0.0),
            dissipation_rate=0.0,
        )

    with pytest.raises(PositivityBreachError) as err:
        integrate(_pair(0.05, 1.0), 1.0, None, sink, lambda pair: 0.01)
    assert err.value.time is not None
    assert err.value.time <= 0.03


def test_nonfinite_dt_rejected():
    with pytest.raises(SolverError):
        integrate(_pair(), 1.0, None, _decay_terms(), lambda pair: float("nan"))
    with pytest.raises(SolverError):
        integrate(_pair(), 1.0, None, _decay_terms(), lambda pair: 0.0)


def test_max_steps_guard():
    with pytest.raises(SolverError):
        integrate(_pair(), 1.0, None, _decay_terms(), lambda pair: 1e-6, max_steps=10)


def test_diag_stride_and_final_row():
    traj = integrate(
        _pair(), 0.1, None, _decay_terms(), lambda pair: 0.001, diag_stride=25
    )
    ts = traj.diagnostics.column("t")
    assert ts[0] == 0.0
    assert ts[-1] == pytest.approx(0.1)
    assert len(ts) == pytest.approx(traj.steps / 25, abs=3)
    assert tuple(DIAGNOSTIC_COLUMNS) == ("t", "E", "D", "mass1", "mass2", "min1", "min2", "dt")


def test_trajectory_interpolation():
    traj = integrate(_pair(2.0, 2.0), 1.0, (0.5,), _decay_terms(0.0), lambda pair: 0.125)
    mid = traj.at(0.25)
    assert mid.u1.values[0] == pytest.approx(2.0)
    before = traj.at(-1.0)
    after = traj.at(2.0)
    assert before.u1.values[0] == 2.0
    assert after.u1.values[0] == pytest.approx(2.0)


def test_diagnostics_csv_format(tmp_path):
    traj = integrate(_pair(), 0.05, None, _decay_terms(), lambda pair: 0.01)
    path = tmp_path / "diag.csv"
    traj.diagnostics.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,E,D,mass1,mass2,min1,min2,dt"
    assert len(lines[1].split(",")) == 8


def test_richardson_rate():
    assert richardson_rate([4.0, 1.0, 0.25]) == pytest.approx([2.0, 2.0])
    rates = richardson_rate([1.0, 0.0])
    assert np.isnan(rates[0])
