"""Numerical lab for a two-species cross-diffusion system driven by a
rescaled convolution stencil, with a matching local solver, a dual
(backward test function) solver, and operator-level audits."""

from .backend import BACKEND, backend_name
from .config import ConfigError, StudyConfig, emit_config, parse_config
from .dual import (
    DualProblem,
    DualSolution,
    MaxIterationsError,
    NoContractionError,
    SlabSchedule,
    solve_dual,
    terminal_residual,
    terminal_test_function,
)
from .evolution import (
    NonFiniteError,
    PositivityBreachError,
    SolverError,
    Trajectory,
    richardson_rate,
)
from .grids import (
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
from .harness import (
    run_boundedness_audit,
    run_consistency_test,
    run_convergence_study,
    run_dual_solve,
    run_local_simulation,
    run_nonlocal_simulation,
)
from .kernels import (
    DiscreteKernel,
    KernelFamily,
    KernelKind,
    KernelProfile,
    MomentNormalizer,
    UnderresolvedKernelError,
    compute_c1,
    discretize,
    make_profile,
)
from .local_solver import LocalRunConfig, local_stable_dt, neumann_laplacian, run_local
from .model import ModelParams, entropy
from .nonlocal_op import NonlocalOperator, apply, dissipation, sobolev_ratio
from .nonlocal_solver import NonlocalRunConfig, run, stable_dt

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError",
    "DiscreteKernel",
    "DualProblem",
    "DualSolution",
    "Field",
    "Grid",
    "KernelFamily",
    "KernelKind",
    "KernelProfile",
    "LocalRunConfig",
    "MaxIterationsError",
    "ModelParams",
    "MomentNormalizer",
    "NoContractionError",
    "NonFiniteError",
    "NonlocalOperator",
    "NonlocalRunConfig",
    "PositivityBreachError",
    "SlabSchedule",
    "SolverError",
    "SpeciesPair",
    "StudyConfig",
    "Trajectory",
    "UnderresolvedKernelError",
    "apply",
    "backend_name",
    "compute_c1",
    "constant_field",
    "discretize",
    "dissipation",
    "emit_config",
    "entropy",
    "field_from_function",
    "local_stable_dt",
    "lq_norm_space",
    "lq_norm_spacetime",
    "make_profile",
    "min_value",
    "neumann_laplacian",
    "parse_config",
    "read_snapshot",
    "restrict_interior",
    "richardson_rate",
    "run",
    "run_boundedness_audit",
    "run_consistency_test",
    "run_convergence_study",
    "run_dual_solve",
    "run_local",
    "run_local_simulation",
    "run_nonlocal_simulation",
    "sobolev_ratio",
    "solve_dual",
    "stable_dt",
    "terminal_residual",
    "terminal_test_function",
    "total_mass",
    "write_snapshot",
]
