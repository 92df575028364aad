"""Per-pixel blur-scale selection from the candidate intensities.

Matching compares the predicted blurred intensities against the
observed blurrier image and keeps every candidate within a tie
tolerance of the best fit; weak texture makes the fit curve flat, so
single pixels frequently admit several plausible scales.  The tie is
broken by the aggregate fit of each scale over a small neighborhood,
followed by a single 3x3 median pass over the selected field.  Pixels
whose whole neighborhood carries no intensity information at all are
reported invalid instead of being assigned a made-up value.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import uniform_filter
from scipy.signal import fftconvolve

from .errors import InvalidParameterError, ShapeError
from .framework import QuadratureVector, WeightMatrix, kernel_stack
from .grids import SigmaGrid

DEFAULT_TIE_TOL = 1e-4
DEFAULT_WINDOW = 5

BLURMAP_MAGIC = b"DFBM1"
_BLURMAP_HEADER = struct.Struct("<5s3xII")  # padded to 16 bytes


@dataclass(frozen=True)
class MatchCandidates:
    """Grid indices whose residual ties the per-pixel minimum."""

    indices: np.ndarray
    residuals: np.ndarray

    def __post_init__(self):
        if len(self.indices) == 0:
            raise InvalidParameterError("a processed pixel must keep at least one candidate")


@dataclass(frozen=True)
class BlurMap:
    """Per-pixel blur-scale estimate with validity metadata.

    ``sigma`` is NaN wherever ``valid`` is False.  ``residual`` holds the
    absolute intensity mismatch of the selected candidate, recorded
    before the median pass.  ``floored`` flags valid pixels whose match
    landed on the smallest grid scale, i.e. the true relative blur may
    lie below the grid floor.
    """

    sigma: np.ndarray
    valid: np.ndarray
    residual: np.ndarray
    floored: np.ndarray
    sigma_grid: SigmaGrid = field(repr=False)

    @property
    def coverage(self) -> float:
        return float(self.valid.mean())


@dataclass(frozen=True)
class CandidateField:
    """Dense per-pixel match data for a whole image.

    ``residuals`` has shape (M, H, W); ``ties`` marks the candidate set
    of every pixel; ``processed`` marks pixels the matcher visited
    (False outside the caller's mask).
    """

    residuals: np.ndarray
    ties: np.ndarray
    processed: np.ndarray
    sigma_grid: SigmaGrid = field(repr=False)
    tie_tol: float = DEFAULT_TIE_TOL

    def at(self, row: int, col: int) -> MatchCandidates:
        """Materialize the candidate set of one pixel."""
        mask = self.ties[:, row, col]
        idx = np.nonzero(mask)[0]
        return MatchCandidates(indices=idx, residuals=self.residuals[idx, row, col])


def match_sigma(
    candidates,
    observed: float,
    tie_tol: float = DEFAULT_TIE_TOL,
) -> MatchCandidates:
    """All candidate indices whose residual ties the minimum.

    A candidate m is kept when |values[m] - observed| is within
    ``tie_tol`` of the smallest residual, so a perfectly flat candidate
    curve (textureless window) returns every index.
    """
    values = np.asarray(getattr(candidates, "values", candidates), dtype=np.float64)
    if tie_tol < 0:
        raise InvalidParameterError(f"tie_tol must be non-negative, got {tie_tol}")
    residuals = np.abs(values - float(observed))
    keep = residuals <= residuals.min() + tie_tol
    idx = np.nonzero(keep)[0]
    return MatchCandidates(indices=idx, residuals=residuals[idx])


def predict_candidate_images(image: np.ndarray, weights: WeightMatrix) -> np.ndarray:
    """Candidate intensities for every pixel at once, shape (M, H, W).

    Applies each per-sigma row of W to the replicate-padded image as a
    global convolution.  This equals the patch pipeline at every pixel
    (up to FFT rounding): the quadrature multiply there is cancelled by
    the unit-DC division, leaving exactly the per-sigma kernels.
    """
    if image.ndim != 2:
        raise ShapeError(f"expected a 2-D image, got shape {image.shape}")
    half = weights.patch_side // 2
    padded = np.pad(np.asarray(image, dtype=np.float64), half, mode="edge")
    kernels = kernel_stack(weights)
    h, w = image.shape
    out = np.empty((weights.sigma_grid.m, h, w), dtype=np.float64)
    for m in range(weights.sigma_grid.m):
        full = fftconvolve(padded, kernels[m], mode="same")
        out[m] = full[half : half + h, half : half + w]
    return out


def match_candidate_field(
    left: np.ndarray,
    right: np.ndarray,
    weights: WeightMatrix,
    quadrature: QuadratureVector,
    mask: np.ndarray | None = None,
    tie_tol: float = DEFAULT_TIE_TOL,
) -> CandidateField:
    """Run the per-pixel matching stage over the masked-in pixels.

    This stage is purely pixel-local: shrinking the mask never changes
    the candidates of pixels that remain masked in.
    """
    left = np.asarray(left, dtype=np.float64)
    right = np.asarray(right, dtype=np.float64)
    if left.shape != right.shape:
        raise ShapeError(f"image shapes differ: {left.shape} vs {right.shape}")
    if mask is None:
        processed = np.ones(left.shape, dtype=bool)
    else:
        mask = np.asarray(mask)
        if mask.shape != left.shape:
            raise ShapeError(f"mask shape {mask.shape} != image shape {left.shape}")
        processed = mask.astype(bool)
    if len(quadrature.values) != weights.radial_grid.n:
        raise ShapeError("quadrature length does not match the weight matrix's radial grid")
    candidates = predict_candidate_images(left, weights)
    residuals = np.abs(candidates - right[None])
    min_resid = residuals.min(axis=0)
    ties = residuals <= (min_resid + tie_tol)[None]
    return CandidateField(
        residuals=residuals,
        ties=ties,
        processed=processed,
        sigma_grid=weights.sigma_grid,
        tie_tol=tie_tol,
    )


def _masked_box_sum(planes: np.ndarray, window: int) -> np.ndarray:
    size = (1,) * (planes.ndim - 2) + (window, window)
    return uniform_filter(planes, size=size, mode="constant") * (window * window)


def disambiguate(candidate_field: CandidateField, window: int = DEFAULT_WINDOW) -> BlurMap:
    """Collapse per-pixel candidate sets to a single blur scale each.

    For every pixel, each of its tied candidates is scored by the summed
    match residuals of the processed pixels in the window x window
    neighborhood, each neighbor evaluated at that candidate's scale; the
    lowest aggregate wins, exact ties going to the smallest scale.
    Pixels whose entire neighborhood is fully ambiguous (flat candidate
    curves everywhere, e.g. textureless interiors) are marked invalid.
    A single 3x3 median pass over valid pixels smooths the final field.
    """
    if window < 3 or window % 2 == 0:
        raise InvalidParameterError(f"window must be an odd integer >= 3, got {window}")
    residuals = candidate_field.residuals
    ties = candidate_field.ties
    processed = candidate_field.processed
    sigmas = candidate_field.sigma_grid.sigmas
    _, h, w = residuals.shape

    proc = processed.astype(np.float64)
    scores = _masked_box_sum(residuals * proc[None], window)
    scores = np.where(ties, scores, np.inf)
    chosen = scores.argmin(axis=0)

    fully_ambiguous = ties.all(axis=0) & processed
    amb_count = np.round(_masked_box_sum(fully_ambiguous.astype(np.float64), window))
    proc_count = np.round(_masked_box_sum(proc, window))
    valid = processed & (amb_count < proc_count)

    sigma = np.where(valid, sigmas[chosen], np.nan)
    residual = np.take_along_axis(residuals, chosen[None], axis=0)[0]
    residual = np.where(valid, residual, np.nan)
    floored = valid & (chosen == 0)

    sigma = _median_over_valid(sigma, valid)
    return BlurMap(
        sigma=sigma,
        valid=valid,
        residual=residual,
        floored=floored,
        sigma_grid=candidate_field.sigma_grid,
    )


def _median_over_valid(sigma: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """One 3x3 median pass ignoring invalid neighbors (replicate borders)."""
    h, w = sigma.shape
    padded = np.pad(np.where(valid, sigma, np.nan), 1, mode="edge")
    stack = np.stack(
        [padded[dy : dy + h, dx : dx + w] for dy in range(3) for dx in range(3)]
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN windows
        med = np.nanmedian(stack, axis=0)
    out = np.where(valid & np.isfinite(med), med, sigma)
    return np.where(valid, out, np.nan)


def estimate_blur_map(
    left: np.ndarray,
    right: np.ndarray,
    weights: WeightMatrix,
    quadrature: QuadratureVector,
    mask: np.ndarray | None = None,
    tie_tol: float = DEFAULT_TIE_TOL,
    window: int = DEFAULT_WINDOW,
) -> BlurMap:
    """Estimate the relative blur scale of ``right`` against ``left``.

    Runs candidate prediction, per-pixel matching and neighborhood
    disambiguation over the masked-in pixels (default: all).  The result
    is deterministic: identical inputs give bit-identical maps.
    """
    field_ = match_candidate_field(left, right, weights, quadrature, mask, tie_tol)
    return disambiguate(field_, window=window)


# --- serialization --------------------------------------------------------

def save_blur_map(blur: BlurMap, path: str | Path) -> None:
    """Write the sigma raster as DFBM1: 16-byte header + float32 values.

    Invalid pixels are stored as NaN.
    """
    h, w = blur.sigma.shape
    with open(path, "wb") as fh:
        fh.write(_BLURMAP_HEADER.pack(BLURMAP_MAGIC, w, h))
        fh.write(np.ascontiguousarray(blur.sigma, dtype="<f4").tobytes())


def load_blur_map_raster(path: str | Path) -> np.ndarray:
    """Read back the sigma raster of a DFBM1 file (NaN marks invalid)."""
    with open(path, "rb") as fh:
        magic, w, h = _BLURMAP_HEADER.unpack(fh.read(_BLURMAP_HEADER.size))
        if magic != BLURMAP_MAGIC:
            raise InvalidParameterError(f"{path}: bad magic {magic!r}")
        return np.frombuffer(fh.read(), dtype="<f4").reshape((h, w)).astype(np.float64)


def blur_map_to_gray(blur: BlurMap) -> np.ndarray:
    """Map sigma linearly onto [0, 1] over the grid range for display.

    Invalid pixels render as 0.
    """
    lo, hi = blur.sigma_grid.sigma_min, blur.sigma_grid.sigma_max
    scaled = (blur.sigma - lo) / (hi - lo)
    return np.where(blur.valid, np.clip(scaled, 0.0, 1.0), 0.0)
