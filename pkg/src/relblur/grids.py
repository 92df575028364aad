"""Discretization grids for the forward blur framework.

The blurred center intensity of a patch is modeled as an integral over
dimensionless radius r of the patch's circular averages against the
kernel profile r*exp(-r^2/2), truncated at r = 5 (five standard
deviations, which retains all but ~2e-6 of the kernel mass).  The
integral is evaluated as an N-point Riemann sum at midpoint abscissae,
swept over M uniformly spaced candidate blur scales.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError

# Integration truncation radius in units of sigma; shared by the kernel
# builders, the convolution oracle and the patch-size rule.
TRUNCATION_RADIUS = 5.0

DEFAULT_SIGMA_COUNT = 50
DEFAULT_SIGMA_MIN = 0.1
DEFAULT_SIGMA_MAX = 5.0
DEFAULT_RADIAL_COUNT = 100


def _uniformity_slack(step: float, largest: float) -> float:
    # 1e-12 relative to the step, floored by the float granularity of the
    # grid values themselves (differences of nearby floats wobble by ulps)
    return max(1e-12 * step, 8.0 * np.finfo(np.float64).eps * abs(largest))


@dataclass(frozen=True)
class RadialGrid:
    """Midpoint abscissae r_n on (0, r_max] for the radial Riemann sum."""

    points: np.ndarray
    r_max: float
    n: int

    def __post_init__(self):
        spacing = np.diff(self.points)
        if not np.all(spacing > 0):
            raise InvalidParameterError("radial points must be strictly increasing")
        if np.ptp(spacing) > _uniformity_slack(spacing[0], self.points[-1]):
            raise InvalidParameterError("radial points must be uniformly spaced")

    @property
    def spacing(self) -> float:
        return self.r_max / self.n


@dataclass(frozen=True)
class SigmaGrid:
    """Uniformly spaced candidate blur scales, in pixel-pitch units."""

    sigmas: np.ndarray
    m: int

    def __post_init__(self):
        if self.sigmas[0] <= 0:
            raise InvalidParameterError("smallest sigma must be positive")
        spacing = np.diff(self.sigmas)
        if not np.all(spacing > 0):
            raise InvalidParameterError("sigmas must be strictly increasing")
        if np.ptp(spacing) > _uniformity_slack(spacing[0], self.sigmas[-1]):
            raise InvalidParameterError("sigmas must be uniformly spaced")

    @property
    def sigma_min(self) -> float:
        return float(self.sigmas[0])

    @property
    def sigma_max(self) -> float:
        return float(self.sigmas[-1])

    @property
    def spacing(self) -> float:
        return float(self.sigmas[1] - self.sigmas[0])


@dataclass(frozen=True)
class QuadratureVector:
    """Riemann-sum weights F(r_n) = r_max * r_n * exp(-r_n^2/2) / N.

    The weights approximate the unit mass of the radial kernel profile;
    their sum lands near 1 with an O(1/N^2) midpoint-rule overshoot
    (about +1e-4 at N=100), so consumers that need exact unit DC gain
    divide by the sum.
    """

    values: np.ndarray
    grid: RadialGrid = field(repr=False)

    @property
    def total(self) -> float:
        return float(self.values.sum())


def make_radial_grid(n: int) -> RadialGrid:
    """Build the N-point midpoint grid r_n = r_max*(n - 1/2)/N, n = 1..N."""
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise InvalidParameterError(f"radial point count must be an integer >= 2, got {n!r}")
    points = (np.arange(n, dtype=np.float64) + 0.5) * (TRUNCATION_RADIUS / n)
    return RadialGrid(points=points, r_max=TRUNCATION_RADIUS, n=int(n))


def make_sigma_grid(m: int, sigma_min: float, sigma_max: float) -> SigmaGrid:
    """Build M uniformly spaced blur scales on [sigma_min, sigma_max]."""
    if not isinstance(m, (int, np.integer)) or m < 2:
        raise InvalidParameterError(f"sigma count must be an integer >= 2, got {m!r}")
    if not (0 < sigma_min < sigma_max):
        raise InvalidParameterError(
            f"need 0 < sigma_min < sigma_max, got ({sigma_min}, {sigma_max})"
        )
    step = (sigma_max - sigma_min) / (m - 1)
    sigmas = sigma_min + step * np.arange(m, dtype=np.float64)
    return SigmaGrid(sigmas=sigmas, m=int(m))


def default_sigma_grid() -> SigmaGrid:
    return make_sigma_grid(DEFAULT_SIGMA_COUNT, DEFAULT_SIGMA_MIN, DEFAULT_SIGMA_MAX)


def default_radial_grid() -> RadialGrid:
    return make_radial_grid(DEFAULT_RADIAL_COUNT)


def make_quadrature_vector(grid: RadialGrid) -> QuadratureVector:
    """Evaluate the radial quadrature weights on the given grid."""
    r = grid.points
    values = grid.r_max * r * np.exp(-0.5 * r * r) / grid.n
    return QuadratureVector(values=values, grid=grid)


def required_patch_side(sigma_grid: SigmaGrid, radial_grid: RadialGrid) -> int:
    """Smallest odd window side covering the largest sampled circle.

    The largest circle has radius sigma_max * r_max, so the side must be
    at least ceil(2 * sigma_max * r_max) + 1, bumped to odd so the pixel
    of interest sits on the center sample.
    """
    side = int(np.ceil(2.0 * sigma_grid.sigma_max * radial_grid.r_max)) + 1
    if side % 2 == 0:
        side += 1
    return side
