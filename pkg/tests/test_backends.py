"""Bitwise parity between the numpy and compiled stencil backends."""

import os
import subprocess
import sys

import numpy as np
import pytest

from sktlab import _kernels_py
from sktlab.backend import backend_name

try:
    from sktlab import _kernels_cy
except ImportError:
    _kernels_cy = None

needs_compiled = pytest.mark.skipif(
    _kernels_cy is None, reason="compiled extension not built"
)


def _stencil_1d(rng, m):
    values = rng.uniform(-2.0, 3.0, m)
    span = rng.integers(1, 9)
    offsets = np.arange(-span, span + 1, dtype=np.intp)
    weights = rng.uniform(0.0, 1.0, offsets.shape[0])
    weights[rng.integers(0, weights.shape[0])] = 0.0  # exercise the skip branch
    return values, offsets, weights


def _stencil_2d(rng, mx, my):
    values = rng.uniform(-2.0, 3.0, (mx, my))
    span = rng.integers(1, 5)
    ox, oy = np.meshgrid(
        np.arange(-span, span + 1), np.arange(-span, span + 1), indexing="ij"
    )
    off_x = ox.ravel().astype(np.intp)
    off_y = oy.ravel().astype(np.intp)
    weights = rng.uniform(0.0, 1.0, off_x.shape[0])
    return values, off_x, off_y, weights


@needs_compiled
@pytest.mark.parametrize("seed", range(20))
def test_stencil_apply_1d_parity(seed):
    rng = np.random.default_rng(seed)
    values, offsets, weights = _stencil_1d(rng, int(rng.integers(16, 300)))
    a = np.empty_like(values)
    b = np.empty_like(values)
    _kernels_py.stencil_apply_1d(values, offsets, weights, a)
    _kernels_cy.stencil_apply_1d(values, offsets, weights, b)
    assert a.tobytes() == b.tobytes()


@needs_compiled
@pytest.mark.parametrize("seed", range(20))
def test_stencil_square_1d_parity(seed):
    rng = np.random.default_rng(100 + seed)
    values, offsets, weights = _stencil_1d(rng, int(rng.integers(16, 300)))
    a = np.empty_like(values)
    b = np.empty_like(values)
    _kernels_py.stencil_square_1d(values, offsets, weights, a)
    _kernels_cy.stencil_square_1d(values, offsets, weights, b)
    assert a.tobytes() == b.tobytes()


@needs_compiled
@pytest.mark.parametrize("seed", range(10))
def test_stencil_apply_2d_parity(seed):
    rng = np.random.default_rng(200 + seed)
    values, off_x, off_y, weights = _stencil_2d(
        rng, int(rng.integers(8, 48)), int(rng.integers(8, 48))
    )
    a = np.empty_like(values)
    b = np.empty_like(values)
    _kernels_py.stencil_apply_2d(values, off_x, off_y, weights, a)
    _kernels_cy.stencil_apply_2d(values, off_x, off_y, weights, b)
    assert a.tobytes() == b.tobytes()


@needs_compiled
@pytest.mark.parametrize("seed", range(10))
def test_stencil_square_2d_parity(seed):
    rng = np.random.default_rng(300 + seed)
    values, off_x, off_y, weights = _stencil_2d(
        rng, int(rng.integers(8, 48)), int(rng.integers(8, 48))
    )
    a = np.empty_like(values)
    b = np.empty_like(values)
    _kernels_py.stencil_square_2d(values, off_x, off_y, weights, a)
    _kernels_cy.stencil_square_2d(values, off_x, off_y, weights, b)
    assert a.tobytes() == b.tobytes()


@needs_compiled
@pytest.mark.parametrize("seed", range(10))
def test_mirror_laplacian_parity(seed):
    rng = np.random.default_rng(400 + seed)
    v1 = rng.uniform(-1.0, 1.0, int(rng.integers(4, 200)))
    a1, b1 = np.empty_like(v1), np.empty_like(v1)
    _kernels_py.mirror_laplacian_1d(v1, a1)
    _kernels_cy.mirror_laplacian_1d(v1, b1)
    assert a1.tobytes() == b1.tobytes()
    v2 = rng.uniform(-1.0, 1.0, (int(rng.integers(4, 40)), int(rng.integers(4, 40))))
    a2, b2 = np.empty_like(v2), np.empty_like(v2)
    _kernels_py.mirror_laplacian_2d(v2, a2)
    _kernels_cy.mirror_laplacian_2d(v2, b2)
    assert a2.tobytes() == b2.tobytes()


@needs_compiled
def test_wide_offsets_clip_to_empty_slices():
    # offsets wider than the array must contribute nothing, not wrap
    values = np.linspace(0.0, 1.0, 8)
    offsets = np.array([-12, 12], dtype=np.intp)
    weights = np.array([1.0, 1.0])
    a = np.empty_like(values)
    b = np.empty_like(values)
    _kernels_py.stencil_apply_1d(values, offsets, weights, a)
    _kernels_cy.stencil_apply_1d(values, offsets, weights, b)
    assert np.all(a == 0.0)
    assert a.tobytes() == b.tobytes()
    _kernels_py.stencil_square_1d(values, offsets, weights, a)
    _kernels_cy.stencil_square_1d(values, offsets, weights, b)
    assert np.all(a == 0.0)
    assert a.tobytes() == b.tobytes()


def test_backend_name_valid():
    assert backend_name() in ("python", "compiled")


def test_env_forces_python_backend():
    code = "from sktlab.backend import backend_name; print(backend_name())"
    env = dict(os.environ, SKTLAB_BACKEND="python")
    proc = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "python"


def test_env_rejects_unknown_backend():
    code = "import sktlab.backend"
    env = dict(os.environ, SKTLAB_BACKEND="fortran")
    proc = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env
    )
    assert proc.returncode != 0
    assert "SKTLAB_BACKEND" in proc.stderr


@needs_compiled
def test_solver_run_matches_across_backends(tmp_path):
    # a short nonlocal run must produce byte-identical diagnostics either way
    config = """
kernel.family = polynomial_bump
kernel.radius = 1.0
kernel.dimension = 1
kernel.scale = 4
grid.dimension = 1
grid.extent = 1
grid.cells = 128
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
model.t_final = 0.01
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
    cfg = tmp_path / "run.cfg"
    cfg.write_text(config)
    outputs = {}
    for choice in ("python", "compiled"):
        out = tmp_path / choice
        env = dict(os.environ, SKTLAB_BACKEND=choice)
        proc = subprocess.run(
            [
                sys.executable,
                "-m",
                "sktlab",
                "simulate-nonlocal",
                "--config",
                str(cfg),
                "--out",
                str(out),
            ],
            capture_output=True,
            text=True,
            env=env,
        )
        assert proc.returncode == 0, proc.stderr
        outputs[choice] = (
            (out / "diagnostics.csv").read_bytes(),
            (out / "u1_final.txt").read_bytes(),
        )
    assert outputs["python"] == outputs["compiled"]
