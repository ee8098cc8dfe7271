"""Flat key-value run configuration: parsing, validation, emission.

Files are UTF-8 text, one ``key = value`` per line, ``#`` starts a
comment.  Unknown keys are rejected (fail closed), every value is type-
and range-checked, and errors name the offending key and line.  A block
(kernel.*, grid.*, model.*, ...) is either absent or complete; commands
check for the blocks they need.  emit_config writes a file that parses
back to an equal StudyConfig.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

FLOAT_FORMAT = "%.17g"

KERNEL_FAMILIES = ("uniform", "tent", "polynomial_bump")
KERNEL_KINDS = ("rescaled", "delta")
INITIAL_KINDS = ("constant", "gaussian", "cosine")
CONSISTENCY_FUNCTIONS = ("cosine", "quadratic", "bump")


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        parts = []
        if key is not None:
            parts.append(f"key {key!r}")
        if line is not None:
            parts.append(f"line {line}")
        suffix = f" ({', '.join(parts)})" if parts else ""
        super().__init__(message + suffix)
        self.key = key
        self.line = line


@dataclass(frozen=True)
class KernelSpec:
    family: str
    radius: float
    dimension: int
    min_cells_per_radius: int = 8
    scale: int | None = None
    kind: str = "rescaled"


@dataclass(frozen=True)
class GridSpec:
    dimension: int
    extent: float
    cells: int


@dataclass(frozen=True)
class ModelSpec:
    c1: float
    c2: float
    a1: float
    a2: float
    alpha1: float
    alpha2: float
    beta11: float
    beta12: float
    beta21: float
    beta22: float
    t_final: float


@dataclass(frozen=True)
class InitialSpec:
    kind: str
    value: tuple[float, float] | None = None
    baseline: tuple[float, float] | None = None
    amplitude: tuple[float, float] | None = None
    center: tuple[float, float] | None = None
    width: tuple[float, float] | None = None
    base: tuple[float, float] | None = None
    frequency: tuple[int, int] | None = None


@dataclass(frozen=True)
class SolverSpec:
    dt_safety: float = 0.4
    positivity_tol: float = 1e-10
    diag_stride: int = 10
    max_steps: int = 10_000_000


@dataclass(frozen=True)
class StudySpec:
    n_list: tuple[int, ...] = (4, 8, 16, 32)
    q: float = 2.0
    snapshots: int = 33


@dataclass(frozen=True)
class DualSpec:
    a: float | None = None
    b: float | None = None
    c: float | None = None
    t_final: float | None = None
    picard_tol: float = 1e-8
    max_iters: int = 200
    substeps: int = 32
    decay_rate: float = 1.0


@dataclass(frozen=True)
class StudyConfig:
    kernel: KernelSpec | None = None
    grid: GridSpec | None = None
    model: ModelSpec | None = None
    initial: InitialSpec | None = None
    solver: SolverSpec = SolverSpec()
    study: StudySpec = StudySpec()
    dual: DualSpec = DualSpec()
    consistency_function: str = "cosine"
    audit_p: float = 3.0

    def require(self, block: str):
        value = getattr(self, block)
        if value is None:
            raise ConfigError(f"this command needs the {block}.* configuration block")
        return value


def _parse_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}")
    if not math.isfinite(v):
        raise ConfigError(f"expected a finite number, got {text!r}")
    return v


def _parse_int(text: str) -> int:
    try:
        return int(text, 10)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}")


def _parse_int_list(text: str) -> tuple[int, ...]:
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise ConfigError(f"expected a comma-separated integer list, got {text!r}")
    return tuple(_parse_int(s) for s in items)


def _parse_choice(choices: Iterable[str]):
    choices = tuple(choices)

    def parse(text: str) -> str:
        v = text.strip().lower()
        if v not in choices:
            raise ConfigError(f"expected one of {choices}, got {text!r}")
        return v

    return parse


def _nonneg(v: float) -> bool:
    return v >= 0.0


def _positive(v: float) -> bool:
    return v > 0.0


# key -> (parser, constraint or None, constraint description)
_SCHEMA = {
    "kernel.family": (_parse_choice(KERNEL_FAMILIES), None, ""),
    "kernel.radius": (_parse_float, _positive, "must be positive"),
    "kernel.dimension": (_parse_int, lambda v: v in (1, 2), "must be 1 or 2"),
    "kernel.min_cells_per_radius": (_parse_int, _positive, "must be positive"),
    "kernel.scale": (_parse_int, _positive, "must be positive"),
    "kernel.kind": (_parse_choice(KERNEL_KINDS), None, ""),
    "grid.dimension": (_parse_int, lambda v: v in (1, 2), "must be 1 or 2"),
    "grid.extent": (_parse_float, _positive, "must be positive"),
    "grid.cells": (_parse_int, lambda v: v >= 4, "must be at least 4"),
    "model.c1": (_parse_float, _nonneg, "must be nonnegative"),
    "model.c2": (_parse_float, _nonneg, "must be nonnegative"),
    "model.a1": (_parse_float, _nonneg, "must be nonnegative"),
    "model.a2": (_parse_float, _nonneg, "must be nonnegative"),
    "model.alpha1": (_parse_float, _nonneg, "must be nonnegative"),
    "model.alpha2": (_parse_float, _nonneg, "must be nonnegative"),
    "model.beta11": (_parse_float, _nonneg, "must be nonnegative"),
    "model.beta12": (_parse_float, _nonneg, "must be nonnegative"),
    "model.beta21": (_parse_float, _nonneg, "must be nonnegative"),
    "model.beta22": (_parse_float, _nonneg, "must be nonnegative"),
    "model.t_final": (_parse_float, _positive, "must be positive"),
    "initial.kind": (_parse_choice(INITIAL_KINDS), None, ""),
    "initial.value1": (_parse_float, _nonneg, "must be nonnegative"),
    "initial.value2": (_parse_float, _nonneg, "must be nonnegative"),
    "initial.baseline1": (_parse_float, _nonneg, "must be nonnegative"),
    "initial.baseline2": (_parse_float, _nonneg, "must be nonnegative"),
    "initial.amplitude1": (_parse_float, None, ""),
    "initial.amplitude2": (_parse_float, None, ""),
    "initial.center1": (_parse_float, None, ""),
    "initial.center2": (_parse_float, None, ""),
    "initial.width1": (_parse_float, _positive, "must be positive"),
    "initial.width2": (_parse_float, _positive, "must be positive"),
    "initial.base1": (_parse_float, _nonneg, "must be nonnegative"),
    "initial.base2": (_parse_float, _nonneg, "must be nonnegative"),
    "initial.frequency1": (_parse_int, _positive, "must be positive"),
    "initial.frequency2": (_parse_int, _positive, "must be positive"),
    "solver.dt_safety": (_parse_float, lambda v: 0.0 < v <= 1.0, "must lie in (0, 1]"),
    "solver.positivity_tol": (_parse_float, _nonneg, "must be nonnegative"),
    "solver.diag_stride": (_parse_int, _positive, "must be positive"),
    "solver.max_steps": (_parse_int, _positive, "must be positive"),
    "study.n_list": (
        _parse_int_list,
        lambda v: all(n >= 1 for n in v) and all(a < b for a, b in zip(v, v[1:])),
        "must be strictly increasing positive integers",
    ),
    "study.q": (_parse_float, lambda v: 1.0 <= v < 3.0, "must lie in [1, 3)"),
    "study.snapshots": (_parse_int, lambda v: v >= 2, "must be at least 2"),
    "consistency.function": (_parse_choice(CONSISTENCY_FUNCTIONS), None, ""),
    "audit.p": (_parse_float, lambda v: v >= 1.0, "must be at least 1"),
    "dual.a": (_parse_float, None, ""),
    "dual.b": (_parse_float, None, ""),
    "dual.c": (_parse_float, None, ""),
    "dual.t_final": (_parse_float, _positive, "must be positive"),
    "dual.picard_tol": (_parse_float, _positive, "must be positive"),
    "dual.max_iters": (_parse_int, _positive, "must be positive"),
    "dual.substeps": (_parse_int, lambda v: v >= 2, "must be at least 2"),
    "dual.lambda": (_parse_float, _nonneg, "must be nonnegative"),
}

_INITIAL_REQUIRED = {
    "constant": ("value1", "value2"),
    "gaussian": (
        "baseline1",
        "baseline2",
        "amplitude1",
        "amplitude2",
        "center1",
        "center2",
        "width1",
        "width2",
    ),
    "cosine": ("base1", "base2", "amplitude1", "amplitude2", "frequency1", "frequency2"),
}


def _read_pairs(path) -> dict[str, tuple[str, int]]:
    pairs: dict[str, tuple[str, int]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("expected 'key = value'", line=lineno)
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if not key or not value:
                raise ConfigError("expected 'key = value'", line=lineno)
            if key in pairs:
                raise ConfigError("duplicate key", key=key, line=lineno)
            pairs[key] = (value, lineno)
    return pairs


def _typed_values(pairs: dict[str, tuple[str, int]]) -> dict[str, object]:
    typed: dict[str, object] = {}
    for key, (text, lineno) in pairs.items():
        if key not in _SCHEMA:
            raise ConfigError("unknown key", key=key, line=lineno)
        parser, constraint, description = _SCHEMA[key]
        try:
            value = parser(text)
        except ConfigError as exc:
            raise ConfigError(str(exc), key=key, line=lineno) from None
        if constraint is not None and not constraint(value):
            raise ConfigError(description, key=key, line=lineno)
        typed[key] = value
    return typed


def _block(typed: dict[str, object], prefix: str) -> dict[str, object]:
    plen = len(prefix) + 1
    return {k[plen:]: v for k, v in typed.items() if k.startswith(prefix + ".")}


def _require_all(block: dict[str, object], prefix: str, names: tuple[str, ...]) -> None:
    for name in names:
        if name not in block:
            raise ConfigError("missing required key", key=f"{prefix}.{name}")


def _pair_of(block: dict[str, object], stem: str):
    return (block[f"{stem}1"], block[f"{stem}2"])


def parse_config(path) -> StudyConfig:
    """Parse and fully validate a configuration file."""
    typed = _typed_values(_read_pairs(path))

    kernel = None
    kb = _block(typed, "kernel")
    if kb:
        _require_all(kb, "kernel", ("family", "radius", "dimension"))
        kernel = KernelSpec(
            family=kb["family"],
            radius=kb["radius"],
            dimension=kb["dimension"],
            min_cells_per_radius=kb.get("min_cells_per_radius", 8),
            scale=kb.get("scale"),
            kind=kb.get("kind", "rescaled"),
        )

    grid = None
    gb = _block(typed, "grid")
    if gb:
        _require_all(gb, "grid", ("dimension", "extent", "cells"))
        grid = GridSpec(dimension=gb["dimension"], extent=gb["extent"], cells=gb["cells"])

    if kernel is not None and grid is not None and kernel.dimension != grid.dimension:
        raise ConfigError(
            f"kernel.dimension={kernel.dimension} conflicts with "
            f"grid.dimension={grid.dimension}",
            key="grid.dimension",
        )

    model = None
    mb = _block(typed, "model")
    if mb:
        names = (
            "c1",
            "c2",
            "a1",
            "a2",
            "alpha1",
            "alpha2",
            "beta11",
            "beta12",
            "beta21",
            "beta22",
            "t_final",
        )
        _require_all(mb, "model", names)
        model = ModelSpec(**{n: mb[n] for n in names})

    initial = None
    ib = _block(typed, "initial")
    if ib:
        _require_all(ib, "initial", ("kind",))
        kind = ib["kind"]
        required = _INITIAL_REQUIRED[kind]
        _require_all(ib, "initial", required)
        extras = set(ib) - set(required) - {"kind"}
        if extras:
            raise ConfigError(
                f"not used by initial.kind={kind}",
                key="initial." + sorted(extras)[0],
            )
        if kind == "constant":
            initial = InitialSpec(kind=kind, value=_pair_of(ib, "value"))
        elif kind == "gaussian":
            initial = InitialSpec(
                kind=kind,
                baseline=_pair_of(ib, "baseline"),
                amplitude=_pair_of(ib, "amplitude"),
                center=_pair_of(ib, "center"),
                width=_pair_of(ib, "width"),
            )
            if any(v < 0.0 for v in initial.amplitude):
                raise ConfigError("must be nonnegative", key="initial.amplitude1")
        else:
            initial = InitialSpec(
                kind=kind,
                base=_pair_of(ib, "base"),
                amplitude=_pair_of(ib, "amplitude"),
                frequency=_pair_of(ib, "frequency"),
            )
            for idx in (0, 1):
                if initial.base[idx] - abs(initial.amplitude[idx]) < 0.0:
                    raise ConfigError(
                        "cosine datum dips negative: need base >= |amplitude|",
                        key=f"initial.base{idx + 1}",
                    )

    sb = _block(typed, "solver")
    solver = SolverSpec(
        dt_safety=sb.get("dt_safety", 0.4),
        positivity_tol=sb.get("positivity_tol", 1e-10),
        diag_stride=sb.get("diag_stride", 10),
        max_steps=sb.get("max_steps", 10_000_000),
    )

    stb = _block(typed, "study")
    study = StudySpec(
        n_list=stb.get("n_list", (4, 8, 16, 32)),
        q=stb.get("q", 2.0),
        snapshots=stb.get("snapshots", 33),
    )

    db = _block(typed, "dual")
    core = [name for name in ("a", "b", "c", "t_final") if name in db]
    if core and len(core) != 4:
        _require_all(db, "dual", ("a", "b", "c", "t_final"))
    dual = DualSpec(
        a=db.get("a"),
        b=db.get("b"),
        c=db.get("c"),
        t_final=db.get("t_final"),
        picard_tol=db.get("picard_tol", 1e-8),
        max_iters=db.get("max_iters", 200),
        substeps=db.get("substeps", 32),
        decay_rate=db.get("lambda", 1.0),
    )

    return StudyConfig(
        kernel=kernel,
        grid=grid,
        model=model,
        initial=initial,
        solver=solver,
        study=study,
        dual=dual,
        consistency_function=typed.get("consistency.function", "cosine"),
        audit_p=typed.get("audit.p", 3.0),
    )


def _fmt(value) -> str:
    if isinstance(value, bool):
        raise TypeError("no boolean config values")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def emit_config(config: StudyConfig, path) -> None:
    """Write a config file that parses back to an equal StudyConfig."""
    lines: list[str] = []

    def put(key: str, value) -> None:
        if value is not None:
            lines.append(f"{key} = {_fmt(value)}")

    k = config.kernel
    if k is not None:
        put("kernel.family", k.family)
        put("kernel.radius", k.radius)
        put("kernel.dimension", k.dimension)
        put("kernel.min_cells_per_radius", k.min_cells_per_radius)
        put("kernel.scale", k.scale)
        put("kernel.kind", k.kind)
    g = config.grid
    if g is not None:
        put("grid.dimension", g.dimension)
        put("grid.extent", g.extent)
        put("grid.cells", g.cells)
    m = config.model
    if m is not None:
        for name in (
            "c1",
            "c2",
            "a1",
            "a2",
            "alpha1",
            "alpha2",
            "beta11",
            "beta12",
            "beta21",
            "beta22",
            "t_final",
        ):
            put(f"model.{name}", getattr(m, name))
    ini = config.initial
    if ini is not None:
        put("initial.kind", ini.kind)
        for stem in ("value", "baseline", "amplitude", "center", "width", "base"):
            pairv = getattr(ini, stem)
            if pairv is not None:
                put(f"initial.{stem}1", pairv[0])
                put(f"initial.{stem}2", pairv[1])
        if ini.frequency is not None:
            put("initial.frequency1", ini.frequency[0])
            put("initial.frequency2", ini.frequency[1])
    put("solver.dt_safety", config.solver.dt_safety)
    put("solver.positivity_tol", config.solver.positivity_tol)
    put("solver.diag_stride", config.solver.diag_stride)
    put("solver.max_steps", config.solver.max_steps)
    put("study.n_list", config.study.n_list)
    put("study.q", config.study.q)
    put("study.snapshots", config.study.snapshots)
    put("consistency.function", config.consistency_function)
    put("audit.p", config.audit_p)
    d = config.dual
    put("dual.a", d.a)
    put("dual.b", d.b)
    put("dual.c", d.c)
    put("dual.t_final", d.t_final)
    put("dual.picard_tol", d.picard_tol)
    put("dual.max_iters", d.max_iters)
    put("dual.substeps", d.substeps)
    put("dual.lambda", d.decay_rate)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
