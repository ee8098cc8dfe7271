"""Radial convolution kernels, their moment normalization, and grid discretization.

A profile J is a nonnegative radial density with unit mass and compact
support of radius r.  The rescaled family J_n(x) = c1 * n^(2+N) * J(n*x)
concentrates toward a point mass while keeping the second moment that a
Laplacian comparison requires; c1 is fixed by (c1/2) * int J(x) x_N^2 dx = 1/2,
i.e. c1 = 2 / int J(x) x_N^2 dx.

Discrete kernels sample the scaled profile at cell-center offsets
(midpoint quadrature) and renormalize to exact unit mass, so mass
neutrality of the discrete operator never depends on quadrature quality.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .grids import Grid


class KernelFamily(enum.Enum):
    UNIFORM = "uniform"
    TENT = "tent"
    POLYNOMIAL_BUMP = "polynomial_bump"


class KernelKind(enum.Enum):
    DELTA_APPROX = "delta_approx"
    RESCALED = "rescaled"


class UnderresolvedKernelError(ValueError):
    """Grid too coarse to resolve the scaled kernel support."""


# amplitude of each unit-mass profile at radius 0, for support radius 1;
# general r divides by r^N
_AMPLITUDE = {
    (KernelFamily.UNIFORM, 1): 0.5,
    (KernelFamily.UNIFORM, 2): 1.0 / math.pi,
    (KernelFamily.TENT, 1): 1.0,
    (KernelFamily.TENT, 2): 3.0 / math.pi,
    (KernelFamily.POLYNOMIAL_BUMP, 1): 15.0 / 16.0,
    (KernelFamily.POLYNOMIAL_BUMP, 2): 3.0 / math.pi,
}


@dataclass(frozen=True)
class KernelProfile:
    """Continuum radial profile: family shape, support radius, dimension."""

    family: KernelFamily
    support_radius: float
    dimension: int

    def density(self, rho):
        """Profile value at physical radius rho (scalar or array); 0 outside support."""
        r = self.support_radius
        s = np.minimum(np.asarray(rho, dtype=float) / r, 1.0)
        amp = _AMPLITUDE[(self.family, self.dimension)] / r**self.dimension
        if self.family is KernelFamily.UNIFORM:
            shape = np.ones_like(s)
        elif self.family is KernelFamily.TENT:
            shape = 1.0 - s
        else:
            shape = (1.0 - s * s) ** 2
        inside = np.asarray(rho, dtype=float) <= r
        return np.where(inside, amp * shape, 0.0)


def make_profile(family: KernelFamily, support_radius: float, dimension: int) -> KernelProfile:
    """Validated profile constructor."""
    if not isinstance(family, KernelFamily):
        raise ValueError(f"unknown kernel family: {family!r}")
    if not (support_radius > 0.0 and math.isfinite(support_radius)):
        raise ValueError(f"support_radius must be positive, got {support_radius}")
    if dimension not in (1, 2):
        raise ValueError(f"dimension must be 1 or 2, got {dimension}")
    return KernelProfile(family, float(support_radius), dimension)


@dataclass(frozen=True)
class MomentNormalizer:
    """Second-moment normalization constant c1 with a quadrature error estimate."""

    c1: float
    quadrature_error_estimate: float


def _radial_second_moment(profile: KernelProfile, resolution: int) -> float:
    # int J(x) x_N^2 dx reduced to a radial integral:
    #   1D: 2 * int_0^r Jhat(rho) rho^2 drho
    #   2D: pi * int_0^r Jhat(rho) rho^3 drho   (angular average of x_2^2)
    r = profile.support_radius
    h = r / resolution
    rho = (np.arange(resolution) + 0.5) * h
    vals = profile.density(rho)
    if profile.dimension == 1:
        return 2.0 * float(np.sum(vals * rho**2)) * h
    return math.pi * float(np.sum(vals * rho**3)) * h


def compute_c1(profile: KernelProfile, quad_resolution: int = 4096) -> MomentNormalizer:
    """Normalization constant via radial midpoint quadrature with Richardson control.

    Two resolutions give an extrapolated value and a conservative error
    estimate (their raw difference).
    """
    if quad_resolution < 64:
        raise ValueError(f"quad_resolution must be at least 64, got {quad_resolution}")
    m_coarse = _radial_second_moment(profile, quad_resolution)
    m_fine = _radial_second_moment(profile, 2 * quad_resolution)
    m_extrap = (4.0 * m_fine - m_coarse) / 3.0  # midpoint error is O(h^2)
    c1 = 2.0 / m_extrap
    estimate = abs(2.0 / m_fine - 2.0 / m_coarse)
    return MomentNormalizer(c1=c1, quadrature_error_estimate=estimate)


@dataclass(frozen=True, eq=False)
class DiscreteKernel:
    """Offset/weight stencil for one scale n on one grid spacing.

    kind DELTA_APPROX: weights renormalized to exact unit sum (point-mass
    surrogate).  kind RESCALED: the same weights multiplied by c1*n^2 (the
    diffusion-strength normalization), so total mass is exactly c1*n^2.
    """

    kind: KernelKind
    scale: int
    dimension: int
    spacing: float
    support_radius: float
    offsets: np.ndarray  # (count, dimension), intp
    weights: np.ndarray  # (count,), float64

    @property
    def band_width(self) -> float:
        """Physical interaction radius r/n of the scaled kernel."""
        return self.support_radius / self.scale

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))


def discretize(
    profile: KernelProfile,
    normalizer: MomentNormalizer,
    scale: int,
    grid: Grid,
    kind: KernelKind = KernelKind.RESCALED,
    min_cells_per_radius: int = 8,
) -> DiscreteKernel:
    """Sample the scaled profile at cell-center offsets and renormalize.

    Requires the scaled support r/n to span at least min_cells_per_radius
    cells; coarser combinations raise UnderresolvedKernelError.
    """
    if scale < 1:
        raise ValueError(f"scale must be a positive integer, got {scale}")
    if profile.dimension != grid.dimension:
        raise ValueError(
            f"profile dimension {profile.dimension} != grid dimension {grid.dimension}"
        )
    h = grid.h
    n = int(scale)
    ratio = profile.support_radius / (n * h)
    if ratio < min_cells_per_radius:
        raise UnderresolvedKernelError(
            f"support spans {ratio:.3f} cells at scale {n}, spacing {h:.6g}; "
            f"need at least {min_cells_per_radius}"
        )
    reach = int(math.floor(ratio + 1e-9))
    span = np.arange(-reach, reach + 1, dtype=np.intp)
    if grid.dimension == 1:
        offsets = span.reshape(-1, 1)
        radii = np.abs(span) * h
    else:
        ox, oy = np.meshgrid(span, span, indexing="ij")
        offsets = np.column_stack([ox.ravel(), oy.ravel()]).astype(np.intp)
        radii = np.hypot(offsets[:, 0].astype(float), offsets[:, 1].astype(float)) * h
        keep = radii <= profile.support_radius / n + 1e-9 * h
        offsets = np.ascontiguousarray(offsets[keep])
        radii = radii[keep]
    # midpoint weights h^N * n^N * J(n * |offset| * h), then exact unit sum
    weights = (n * h) ** grid.dimension * profile.density(n * radii)
    total = float(np.sum(weights))
    if not (total > 0.0):
        raise UnderresolvedKernelError("all sampled kernel weights vanish")
    weights = weights / total
    if kind is KernelKind.RESCALED:
        weights = (normalizer.c1 * n * n) * weights
    return DiscreteKernel(
        kind=kind,
        scale=n,
        dimension=grid.dimension,
        spacing=h,
        support_radius=profile.support_radius,
        offsets=offsets,
        weights=np.ascontiguousarray(weights, dtype=np.float64),
    )
