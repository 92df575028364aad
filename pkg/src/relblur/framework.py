"""Forward framework: predict blurred center intensities for a patch.

Given a local window of the sharper image, the framework predicts the
center intensity of the blurrier image for every candidate blur scale
sigma_m at once, as a matrix pipeline

    candidates = ivec(W @ vec(patch), M) @ F / sum(F)

where ``vec`` column-stacks the window, W is an (M*N) x side^2 weight
matrix, and F is the N-vector of radial quadrature weights.  Each row of
W holds a sampled circular Gaussian of scale sigma_m, truncated at
radius 5*sigma_m and normalized to unit sum, so a constant window is
reproduced exactly and the pipeline agrees with direct convolution.

Rows are identical across the radial index n for a fixed m: the weight
a window pixel receives depends only on its distance to the center and
on sigma_m, so the quadrature multiply reduces to a scale factor that
the final division by sum(F) cancels.  The full M*N-row layout is kept
because it is the wire/cache format and keeps the reshape pipeline
explicit.
"""

from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    InvalidParameterError,
    MemoryCapExceededError,
    OutOfSupportError,
    ShapeError,
)
from .grids import (
    TRUNCATION_RADIUS,
    QuadratureVector,
    RadialGrid,
    SigmaGrid,
    required_patch_side,
)

DEFAULT_ENTRY_CAP = 10**8

WEIGHT_MAGIC = b"DFLW1"
_WEIGHT_HEADER = struct.Struct("<5sqqqdd")


@dataclass(frozen=True)
class Patch:
    """Square window of intensities in [0, 1] around a pixel of interest."""

    pixels: np.ndarray
    center: tuple[int, int] = (0, 0)

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ShapeError(f"patch must be square, got shape {p.shape}")
        if p.shape[0] % 2 == 0:
            raise ShapeError(f"patch side must be odd, got {p.shape[0]}")

    @property
    def side(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class CandidateVector:
    """Predicted blurred center intensities, one per candidate sigma."""

    values: np.ndarray
    sigma_grid: SigmaGrid = field(repr=False)

    def __len__(self) -> int:
        return len(self.values)

    def clamped(self) -> np.ndarray:
        """Values clamped to [0, 1]; for reporting only, never matching."""
        return np.clip(self.values, 0.0, 1.0)


@dataclass(frozen=True)
class WeightMatrix:
    """(M*N) x side^2 weight matrix with its grid provenance.

    ``entries`` is float64 in memory (each row sums to 1 to within
    1e-12); the binary dump stores float32, which still leaves orders of
    magnitude of margin under the 1e-3 pipeline tolerance.
    ``normalization`` records the per-row divisor applied to the raw
    Gaussian samples (one value per sigma since rows repeat across the
    radial index).
    """

    entries: np.ndarray
    patch_side: int
    sigma_grid: SigmaGrid = field(repr=False)
    radial_grid: RadialGrid = field(repr=False)
    normalization: np.ndarray = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def vec(a: np.ndarray) -> np.ndarray:
    """Column-stack a matrix into a vector."""
    return np.asarray(a).flatten(order="F")


def ivec(v: np.ndarray, rows: int) -> np.ndarray:
    """Inverse of :func:`vec`: rebuild a matrix with the given row count."""
    v = np.asarray(v)
    if v.size % rows != 0:
        raise ShapeError(f"vector of size {v.size} not divisible by {rows} rows")
    return v.reshape((rows, v.size // rows), order="F")


def gaussian_kernel(sigma: float, side: int | None = None) -> np.ndarray:
    """Sampled circular Gaussian of scale sigma, truncated and unit-sum.

    Samples exp(-r^2 / (2 sigma^2)) on the integer lattice, zeroes
    samples beyond radius 5*sigma, and normalizes the sum to 1.  With
    ``side`` given, the kernel is embedded centered in a side x side
    array (side must cover the truncation radius).
    """
    if sigma <= 0:
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    radius = int(np.ceil(TRUNCATION_RADIUS * sigma))
    if side is None:
        side = 2 * radius + 1
    half = side // 2
    if side % 2 == 0 or half < radius:
        raise OutOfSupportError(
            f"side {side} cannot hold a sigma={sigma} kernel (needs odd >= {2 * radius + 1})"
        )
    y, x = np.mgrid[-half : half + 1, -half : half + 1]
    r2 = (x * x + y * y).astype(np.float64)
    k = np.exp(-r2 / (2.0 * sigma * sigma))
    k[r2 > (TRUNCATION_RADIUS * sigma) ** 2] = 0.0
    return k / k.sum()


def build_weight_matrix(
    sigma_grid: SigmaGrid,
    radial_grid: RadialGrid,
    entry_cap: int = DEFAULT_ENTRY_CAP,
) -> WeightMatrix:
    """Assemble the (M*N) x side^2 weight matrix for the given grids."""
    side = required_patch_side(sigma_grid, radial_grid)
    m, n = sigma_grid.m, radial_grid.n
    n_entries = m * n * side * side
    if n_entries > entry_cap:
        raise MemoryCapExceededError(
            f"weight matrix would hold {n_entries} entries (cap {entry_cap})"
        )
    half = side // 2
    y, x = np.mgrid[-half : half + 1, -half : half + 1]
    r2 = (x * x + y * y).astype(np.float64)
    block = np.empty((m, side * side), dtype=np.float64)
    norms = np.empty(m, dtype=np.float64)
    for i, sigma in enumerate(sigma_grid.sigmas):
        k = np.exp(-r2 / (2.0 * sigma * sigma))
        k[r2 > (TRUNCATION_RADIUS * sigma) ** 2] = 0.0
        norms[i] = k.sum()
        block[i] = (k / norms[i]).flatten(order="F")
    entries = np.tile(block, (n, 1))
    return WeightMatrix(
        entries=entries,
        patch_side=side,
        sigma_grid=sigma_grid,
        radial_grid=radial_grid,
        normalization=1.0 / norms,
    )


def kernel_stack(weights: WeightMatrix) -> np.ndarray:
    """Unflatten the per-sigma rows of W into (M, side, side) kernels."""
    m, side = weights.sigma_grid.m, weights.patch_side
    flat = weights.entries[:m].astype(np.float64)
    # rows are column-stacked, so the C-order reshape needs a transpose
    return flat.reshape(m, side, side).swapaxes(1, 2)


def forward_candidates(
    patch: Patch | np.ndarray,
    weights: WeightMatrix,
    quadrature: QuadratureVector,
) -> CandidateVector:
    """Predict the blurred center intensity at every candidate sigma.

    The quadrature multiply is followed by division by sum(F) so that a
    constant window maps to itself exactly (unit DC gain); candidate
    values are not clamped so that their ordering is preserved for
    matching.
    """
    pixels = patch.pixels if isinstance(patch, Patch) else np.asarray(patch, dtype=np.float64)
    if pixels.ndim != 2 or pixels.shape[0] != pixels.shape[1]:
        raise ShapeError(f"patch must be square, got {pixels.shape}")
    if pixels.shape[0] != weights.patch_side:
        raise ShapeError(
            f"patch side {pixels.shape[0]} != weight-matrix side {weights.patch_side}"
        )
    if len(quadrature.values) != weights.radial_grid.n:
        raise ShapeError("quadrature length does not match the radial grid")
    stacked = vec(pixels).astype(np.float64)
    products = weights.entries @ stacked
    matrix = ivec(products, weights.sigma_grid.m)
    values = (matrix @ quadrature.values) / quadrature.total
    return CandidateVector(values=values, sigma_grid=weights.sigma_grid)


def radial_average(patch: Patch | np.ndarray, radius: float) -> float:
    """Angular mean of the patch on the circle of given radius.

    The circle is sampled at max(8, ceil(8*pi*radius)) equally spaced
    angles (four samples per pixel of circumference) and each sample is
    read by bilinear interpolation.  Radius 0 returns the center pixel.
    """
    pixels = patch.pixels if isinstance(patch, Patch) else np.asarray(patch, dtype=np.float64)
    side = pixels.shape[0]
    half = side // 2
    if radius < 0:
        raise InvalidParameterError(f"radius must be non-negative, got {radius}")
    if radius > half:
        raise OutOfSupportError(f"radius {radius} exceeds patch half-side {half}")
    if radius == 0:
        return float(pixels[half, half])
    n_angles = max(8, int(np.ceil(2.0 * np.pi * radius * 4.0)))
    theta = 2.0 * np.pi * np.arange(n_angles) / n_angles
    xs = half + radius * np.cos(theta)
    ys = half + radius * np.sin(theta)
    ix = np.minimum(np.floor(xs).astype(int), side - 2)
    iy = np.minimum(np.floor(ys).astype(int), side - 2)
    fx = xs - ix
    fy = ys - iy
    vals = (
        pixels[iy, ix] * (1 - fx) * (1 - fy)
        + pixels[iy, ix + 1] * fx * (1 - fy)
        + pixels[iy + 1, ix] * (1 - fx) * fy
        + pixels[iy + 1, ix + 1] * fx * fy
    )
    return float(vals.mean())


def direct_blur_oracle(patch: Patch | np.ndarray, sigma: float) -> float:
    """Blurred center intensity by direct 2-D convolution.

    Independent check for :func:`forward_candidates`: evaluates the
    center tap of the patch convolved with a sampled, sum-normalized
    circular Gaussian truncated at radius 5*sigma.
    """
    pixels = patch.pixels if isinstance(patch, Patch) else np.asarray(patch, dtype=np.float64)
    if sigma <= 0:
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    side = pixels.shape[0]
    half = side // 2
    radius = int(np.ceil(TRUNCATION_RADIUS * sigma))
    if radius > half:
        raise OutOfSupportError(
            f"patch side {side} too small for sigma={sigma} (needs >= {2 * radius + 1})"
        )
    y, x = np.mgrid[-half : half + 1, -half : half + 1]
    r2 = (x * x + y * y).astype(np.float64)
    taps = np.where(r2 <= (TRUNCATION_RADIUS * sigma) ** 2, np.exp(-r2 / (2.0 * sigma * sigma)), 0.0)
    taps /= taps.sum()
    return float((pixels * taps).sum())


def extract_patch(image: np.ndarray, row: int, col: int, side: int) -> Patch:
    """Cut the side x side window around (row, col), replicate-padded."""
    half = side // 2
    padded = np.pad(image, half, mode="edge")
    window = padded[row : row + side, col : col + side]
    return Patch(pixels=window.copy(), center=(row, col))


# --- binary dump / cache -------------------------------------------------

def save_weight_matrix(weights: WeightMatrix, path: str | Path) -> None:
    """Write W as the DFLW1 binary dump (header + row-major float32)."""
    header = _WEIGHT_HEADER.pack(
        WEIGHT_MAGIC,
        weights.sigma_grid.m,
        weights.radial_grid.n,
        weights.patch_side,
        weights.sigma_grid.sigma_min,
        weights.sigma_grid.sigma_max,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(weights.entries, dtype="<f4").tobytes())


def load_weight_matrix(
    path: str | Path,
    sigma_grid: SigmaGrid,
    radial_grid: RadialGrid,
) -> WeightMatrix:
    """Read a DFLW1 dump and validate it against the expected grids.

    Loaded entries keep the wire format's float32 precision.
    """
    with open(path, "rb") as fh:
        raw = fh.read(_WEIGHT_HEADER.size)
        magic, m, n, side, smin, smax = _WEIGHT_HEADER.unpack(raw)
        if magic != WEIGHT_MAGIC:
            raise InvalidParameterError(f"{path}: bad magic {magic!r}")
        if (m, n) != (sigma_grid.m, radial_grid.n) or not (
            np.isclose(smin, sigma_grid.sigma_min) and np.isclose(smax, sigma_grid.sigma_max)
        ):
            raise InvalidParameterError(f"{path}: header does not match requested grids")
        data = np.frombuffer(fh.read(), dtype="<f4").reshape((m * n, side * side))
    sums = data[: sigma_grid.m].astype(np.float64).sum(axis=1)
    return WeightMatrix(
        entries=data,
        patch_side=side,
        sigma_grid=sigma_grid,
        radial_grid=radial_grid,
        normalization=1.0 / sums,
    )


def cached_weight_matrix(
    sigma_grid: SigmaGrid,
    radial_grid: RadialGrid,
    cache_dir: str | Path | None = None,
) -> WeightMatrix:
    """Build W, caching the dump under RELBLUR/DEFOCUS cache dir if set."""
    if cache_dir is None:
        cache_dir = os.environ.get("DEFOCUS_CACHE_DIR")
    if cache_dir is None:
        return build_weight_matrix(sigma_grid, radial_grid)
    side = required_patch_side(sigma_grid, radial_grid)
    key = hashlib.sha256(
        repr((sigma_grid.m, radial_grid.n, sigma_grid.sigma_min, sigma_grid.sigma_max, side)).encode()
    ).hexdigest()[:16]
    path = Path(cache_dir) / f"weights-{key}.dflw"
    if path.exists():
        return load_weight_matrix(path, sigma_grid, radial_grid)
    weights = build_weight_matrix(sigma_grid, radial_grid)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_weight_matrix(weights, path)
    return weights
