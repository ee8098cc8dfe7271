"""Config parsing: fail-closed validation and exact round-trips."""

import pytest

from sktlab import ConfigError, emit_config, parse_config
from sktlab.config import DualSpec, SolverSpec, StudySpec

FULL = """
# full configuration
kernel.family = polynomial_bump
kernel.radius = 0.5
kernel.dimension = 1
kernel.scale = 8
grid.dimension = 1
grid.extent = 1.0
grid.cells = 256
model.c1 = 0.05
model.c2 = 0.05
model.a1 = 0.5
model.a2 = 0.5
model.alpha1 = 0.4
model.alpha2 = 0.3
model.beta11 = 0.5
model.beta12 = 0.3
model.beta21 = 0.2
model.beta22 = 0.4
model.t_final = 0.25
initial.kind = gaussian
initial.baseline1 = 0.3
initial.baseline2 = 0.4
initial.amplitude1 = 0.5
initial.amplitude2 = 0.4
initial.center1 = 0.45
initial.center2 = 0.55
initial.width1 = 0.08
initial.width2 = 0.1
"""


def _write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_full_config_parses(tmp_path):
    cfg = parse_config(_write(tmp_path, FULL))
    assert cfg.kernel.family == "polynomial_bump"
    assert cfg.kernel.scale == 8
    assert cfg.grid.cells == 256
    assert cfg.model.t_final == 0.25
    assert cfg.initial.kind == "gaussian"
    assert cfg.initial.width == (0.08, 0.1)


def test_defaults_applied(tmp_path):
    cfg = parse_config(_write(tmp_path, FULL))
    assert cfg.solver == SolverSpec(0.4, 1e-10, 10, 10_000_000)
    assert cfg.study == StudySpec((4, 8, 16, 32), 2.0, 33)
    assert cfg.dual == DualSpec(None, None, None, None, 1e-8, 200, 32, 1.0)
    assert cfg.consistency_function == "cosine"
    assert cfg.audit_p == 3.0
    assert cfg.kernel.min_cells_per_radius == 8
    assert cfg.kernel.kind == "rescaled"


def test_unknown_key_rejected_with_location(tmp_path):
    path = _write(tmp_path, "grid.dimension = 1\ngrid.extent = 1\ngrid.cels = 8\n")
    with pytest.raises(ConfigError) as err:
        parse_config(path)
    assert "grid.cels" in str(err.value)
    assert "line 3" in str(err.value)


def test_duplicate_key_rejected(tmp_path):
    path = _write(tmp_path, "grid.extent = 1\ngrid.extent = 2\n")
    with pytest.raises(ConfigError) as err:
        parse_config(path)
    assert "duplicate" in str(err.value)


def test_bad_value_names_key(tmp_path):
    path = _write(tmp_path, "grid.dimension = 1\ngrid.extent = fast\ngrid.cells = 8\n")
    with pytest.raises(ConfigError) as err:
        parse_config(path)
    assert "grid.extent" in str(err.value)


def test_range_checks(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(_write(tmp_path, "solver.dt_safety = 1.5\n"))
    with pytest.raises(ConfigError):
        parse_config(_write(tmp_path, "study.q = 3.0\n"))
    with pytest.raises(ConfigError):
        parse_config(_write(tmp_path, "study.n_list = 8,4\n"))
    with pytest.raises(ConfigError):
        parse_config(_write(tmp_path, "grid.dimension = 3\ngrid.extent = 1\ngrid.cells = 8\n"))


def test_missing_block_member_named(tmp_path):
    text = FULL.replace("model.beta21 = 0.2\n", "")
    with pytest.raises(ConfigError) as err:
        parse_config(_write(tmp_path, text))
    assert "model.beta21" in str(err.value)


def test_initial_kind_specific_keys(tmp_path):
    text = "initial.kind = constant\ninitial.value1 = 1.0\n"
    with pytest.raises(ConfigError) as err:
        parse_config(_write(tmp_path, text))
    assert "initial.value2" in str(err.value)
    # keys from another kind are rejected
    text = (
        "initial.kind = constant\ninitial.value1 = 1\ninitial.value2 = 1\n"
        "initial.width1 = 0.1\n"
    )
    with pytest.raises(ConfigError) as err:
        parse_config(_write(tmp_path, text))
    assert "initial.width1" in str(err.value)


def test_cosine_must_stay_nonnegative(tmp_path):
    text = (
        "initial.kind = cosine\ninitial.base1 = 0.2\ninitial.base2 = 1\n"
        "initial.amplitude1 = 0.5\ninitial.amplitude2 = 0.5\n"
        "initial.frequency1 = 1\ninitial.frequency2 = 1\n"
    )
    with pytest.raises(ConfigError) as err:
        parse_config(_write(tmp_path, text))
    assert "initial.base1" in str(err.value)


def test_dimension_conflict_rejected(tmp_path):
    text = (
        "kernel.family = uniform\nkernel.radius = 0.5\nkernel.dimension = 2\n"
        "grid.dimension = 1\ngrid.extent = 1\ngrid.cells = 64\n"
    )
    with pytest.raises(ConfigError) as err:
        parse_config(_write(tmp_path, text))
    assert "dimension" in str(err.value)


def test_partial_dual_block_rejected(tmp_path):
    text = "dual.a = 0.1\ndual.b = 1\n"
    with pytest.raises(ConfigError) as err:
        parse_config(_write(tmp_path, text))
    assert "dual.c" in str(err.value) or "dual.t_final" in str(err.value)


def test_comments_and_blanks_ignored(tmp_path):
    text = "\n# leading comment\ngrid.dimension = 1  # trailing\n\ngrid.extent = 1\ngrid.cells = 8\n"
    cfg = parse_config(_write(tmp_path, text))
    assert cfg.grid.cells == 8


def test_malformed_line_reports_number(tmp_path):
    with pytest.raises(ConfigError) as err:
        parse_config(_write(tmp_path, "grid.extent 1\n"))
    assert "line 1" in str(err.value)


def test_round_trip_exact(tmp_path):
    cfg = parse_config(_write(tmp_path, FULL))
    out = tmp_path / "emitted.cfg"
    emit_config(cfg, out)
    again = parse_config(out)
    assert again == cfg
    # a second emit is byte-identical
    out2 = tmp_path / "emitted2.cfg"
    emit_config(again, out2)
    assert out.read_bytes() == out2.read_bytes()


def test_round_trip_with_awkward_floats(tmp_path):
    text = FULL + "solver.dt_safety = 0.1\nstudy.q = 1.7\ndual.a = 0.001\ndual.b = 0.3\ndual.c = 0.1\ndual.t_final = 0.7\n"
    cfg = parse_config(_write(tmp_path, text))
    out = tmp_path / "emitted.cfg"
    emit_config(cfg, out)
    assert parse_config(out) == cfg


def test_require_names_missing_block(tmp_path):
    cfg = parse_config(_write(tmp_path, "grid.dimension = 1\ngrid.extent = 1\ngrid.cells = 8\n"))
    with pytest.raises(ConfigError) as err:
        cfg.require("model")
    assert "model" in str(err.value)
