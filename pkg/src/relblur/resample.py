"""Anti-aliased decimation with a Kaiser-windowed sinc FIR filter.

The low-pass taps are g(k) = sinc(k/D) * kaiser(2L+1, beta) for
k = -L..L, normalized to unit sum so filtering preserves constants.
Decimation applies the taps separably (rows then columns) over a
replicate-padded image and keeps every D-th sample starting at index 0,
so output sample j corresponds to input sample j*D.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.ndimage import convolve1d

from .errors import InvalidParameterError, ShapeError

DEFAULT_HALF_LENGTH = 8
DEFAULT_BETA = 10.0


@dataclass(frozen=True)
class FirFilter:
    """Linear-phase FIR taps with their design parameters."""

    taps: np.ndarray
    decimation: int
    half_length: int
    beta: float

    def __post_init__(self):
        if len(self.taps) != 2 * self.half_length + 1:
            raise InvalidParameterError("tap count must be 2L+1")


def kaiser_window(half_length: int, beta: float) -> np.ndarray:
    """Symmetric Kaiser window of 2L+1 points."""
    return np.kaiser(2 * half_length + 1, beta)


def kaiser_sinc_taps(
    decimation: int,
    half_length: int = DEFAULT_HALF_LENGTH,
    beta: float = DEFAULT_BETA,
) -> FirFilter:
    """Design the windowed-sinc low-pass for a given decimation factor.

    Taps are normalized to unit sum (unit DC gain after decimation);
    the raw windowed sinc sums to roughly D, which would scale image
    brightness by D if left unnormalized.  For D=1 the sinc zeroes at
    every nonzero integer, leaving the identity impulse.
    """
    if not isinstance(decimation, (int, np.integer)) or decimation < 1:
        raise InvalidParameterError(f"decimation factor must be an integer >= 1, got {decimation}")
    if not isinstance(half_length, (int, np.integer)) or half_length < 1:
        raise InvalidParameterError(f"half length must be an integer >= 1, got {half_length}")
    if beta < 0:
        raise InvalidParameterError(f"beta must be non-negative, got {beta}")
    k = np.arange(-half_length, half_length + 1, dtype=np.float64)
    raw = np.sinc(k / decimation) * kaiser_window(int(half_length), float(beta))
    # mirror the halves so symmetry is exact to the bit
    raw = 0.5 * (raw + raw[::-1])
    taps = raw / raw.sum()
    return FirFilter(
        taps=taps,
        decimation=int(decimation),
        half_length=int(half_length),
        beta=float(beta),
    )


def decimate(
    image: np.ndarray,
    factor: int,
    fir: FirFilter | None = None,
) -> np.ndarray:
    """Low-pass and subsample an image by an integer factor.

    Output dimensions are ceil(h/factor) x ceil(w/factor).  Kaiser
    sidelobe ringing can push values slightly outside [0, 1]; clamping
    is left to export time.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ShapeError(f"expected a 2-D image, got shape {image.shape}")
    if fir is None:
        fir = kaiser_sinc_taps(factor)
    elif fir.decimation != factor:
        raise InvalidParameterError(
            f"filter designed for factor {fir.decimation}, requested {factor}"
        )
    support = 2 * fir.half_length + 1
    if min(image.shape) < support:
        raise ShapeError(
            f"image {image.shape} smaller than the filter support {support}"
        )
    low = convolve1d(image, fir.taps, axis=1, mode="nearest")
    low = convolve1d(low, fir.taps, axis=0, mode="nearest")
    return low[:: fir.decimation, :: fir.decimation]


def frequency_response(fir: FirFilter, num_points: int = 1024) -> tuple[np.ndarray, np.ndarray]:
    """Magnitude response sampled on [0, 1] cycles/sample, in dB."""
    if num_points < 64:
        raise InvalidParameterError(f"need at least 64 points, got {num_points}")
    freqs = np.linspace(0.0, 1.0, num_points)
    k = np.arange(-fir.half_length, fir.half_length + 1)
    response = (fir.taps[None, :] * np.exp(-2j * np.pi * freqs[:, None] * k[None, :])).sum(axis=1)
    mags = np.abs(response)
    db = 20.0 * np.log10(np.maximum(mags, 1e-300))
    return freqs, db


class ResponseMetrics(NamedTuple):
    """Window/filter response summary.

    ``sidelobe_db`` is the highest response peak beyond the first null,
    relative to the zero-frequency peak.  ``mainlobe_width_3db`` is the
    two-sided -3 dB width in Nyquist-normalized frequency (Nyquist = 1).
    """

    sidelobe_db: float
    mainlobe_width_3db: float


def response_metrics(taps: np.ndarray, num_points: int = 1 << 16) -> ResponseMetrics:
    """Measure peak sidelobe and -3 dB mainlobe width of symmetric taps."""
    taps = np.asarray(taps, dtype=np.float64)
    freqs = np.linspace(0.0, 0.5, num_points)
    k = np.arange(len(taps)) - (len(taps) - 1) / 2.0
    response = (taps[None, :] * np.exp(-2j * np.pi * freqs[:, None] * k[None, :])).sum(axis=1)
    mags = np.abs(response)
    db = 20.0 * np.log10(np.maximum(mags / mags[0], 1e-300))
    # first local minimum ends the mainlobe
    i = 1
    while i < num_points - 1 and not (db[i] < db[i - 1] and db[i] <= db[i + 1]):
        i += 1
    sidelobe = float(db[i:].max()) if i < num_points - 1 else float("-inf")
    below = np.nonzero(db < -3.0)[0]
    width = 4.0 * freqs[below[0]] if below.size else float("inf")
    return ResponseMetrics(sidelobe_db=sidelobe, mainlobe_width_3db=float(width))
