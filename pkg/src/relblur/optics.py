"""Thin-lens geometry: focus distances, blur circles, and their bounds.

All lengths are handled in millimeters internally; pixel-pitch
conversions happen only at API boundaries.  The blur-circle diameter C
and the depth offset from the focal plane carry the same sign, so the
depth/blur relations form exact algebraic inverse pairs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

from .errors import (
    DivergenceError,
    InvalidParameterError,
    NoRealFocusError,
    SingularDepthError,
)

DIVERGENCE_LIMIT_MM = 1e9

# Proposed operating range for the blur-circle size in pixel pitches.
RELATIVE_SIZE_RANGE = (0.5, 5.0)


@dataclass(frozen=True)
class CameraSettings:
    """Imaging geometry: aperture, focal length, conjugate distances.

    Lengths in mm, pixel pitch in micrometers.  The f-number must equal
    focal length over aperture, and when both conjugate distances are
    set they must satisfy the thin-lens law.
    """

    aperture_a: float
    focal_f: float
    f_number: float
    focus_dist_df: float
    image_dist_di: float | None = None
    pixel_pitch_um: float | None = None

    def __post_init__(self):
        if min(self.aperture_a, self.focal_f, self.f_number, self.focus_dist_df) <= 0:
            raise InvalidParameterError("camera settings must be positive")
        if not math.isclose(self.f_number, self.focal_f / self.aperture_a, rel_tol=1e-9):
            raise InvalidParameterError(
                f"f-number {self.f_number} != focal/aperture "
                f"{self.focal_f / self.aperture_a}"
            )
        if self.focus_dist_df <= self.focal_f:
            raise NoRealFocusError("focus distance must exceed the focal length")
        if self.image_dist_di is not None:
            expected = self.focal_f * self.image_dist_di / (self.image_dist_di - self.focal_f)
            if not math.isclose(expected, self.focus_dist_df, rel_tol=1e-9):
                raise InvalidParameterError("image and focus distances violate the lens law")

    @classmethod
    def from_f_number(
        cls,
        focal_f: float,
        f_number: float,
        focus_dist_df: float,
        pixel_pitch_um: float | None = None,
    ) -> "CameraSettings":
        """Derive the aperture and image distance from f and f-number."""
        if min(focal_f, f_number, focus_dist_df) <= 0:
            raise InvalidParameterError("camera settings must be positive")
        if focus_dist_df <= focal_f:
            raise NoRealFocusError("focus distance must exceed the focal length")
        return cls(
            aperture_a=focal_f / f_number,
            focal_f=focal_f,
            f_number=f_number,
            focus_dist_df=focus_dist_df,
            image_dist_di=focal_f * focus_dist_df / (focus_dist_df - focal_f),
            pixel_pitch_um=pixel_pitch_um,
        )

    @property
    def c_zero(self) -> float:
        """Blur-circle asymptote A*f/(d_f - f) for depths at infinity."""
        return self.aperture_a * self.focal_f / (self.focus_dist_df - self.focal_f)

    def to_pitches(self, length_mm: float) -> float:
        if self.pixel_pitch_um is None:
            raise InvalidParameterError("pixel pitch not set")
        return length_mm / (self.pixel_pitch_um * 1e-3)


@dataclass(frozen=True)
class DepthScenario:
    """Admissible depth layout around the focal plane.

    ``eta`` bounds the depth offset relative to the focus distance
    (|delta/d_f| < eta); the background may be at infinity.
    """

    d_foreground: float
    d_background: float = math.inf
    eta: float | None = None

    def __post_init__(self):
        if self.d_foreground <= 0 or self.d_background <= self.d_foreground:
            raise InvalidParameterError("need 0 < foreground < background distance")
        if self.eta is not None and not (0 < self.eta < 1):
            raise InvalidParameterError(f"eta must lie in (0, 1), got {self.eta}")

    @property
    def background_at_infinity(self) -> bool:
        return math.isinf(self.d_background)


def focus_distance(focal_f: float, image_dist: float) -> float:
    """Scene distance in focus for the given image-plane distance."""
    if focal_f <= 0:
        raise InvalidParameterError(f"focal length must be positive, got {focal_f}")
    if image_dist <= focal_f:
        raise NoRealFocusError(
            f"image distance {image_dist} must exceed the focal length {focal_f}"
        )
    d_f = focal_f * image_dist / (image_dist - focal_f)
    if d_f > DIVERGENCE_LIMIT_MM:
        raise DivergenceError(f"focus distance diverged ({d_f:.3g} mm)")
    return d_f


def image_distance(focal_f: float, focus_dist: float) -> float:
    """Image-plane distance focusing the given scene distance (inverse
    of :func:`focus_distance`)."""
    if focal_f <= 0:
        raise InvalidParameterError(f"focal length must be positive, got {focal_f}")
    if focus_dist <= focal_f:
        raise NoRealFocusError(
            f"focus distance {focus_dist} must exceed the focal length {focal_f}"
        )
    return focal_f * focus_dist / (focus_dist - focal_f)


def coc_diameter(settings: CameraSettings, delta_df: float) -> float:
    """Signed blur-circle diameter for a depth offset from the focal plane.

    C = C0 * delta / (d_f + delta); the sign of C follows the sign of
    the depth offset.
    """
    d_total = settings.focus_dist_df + delta_df
    if d_total <= 0:
        raise InvalidParameterError(
            f"scene point at {d_total} mm would sit behind the lens"
        )
    return settings.c_zero * delta_df / d_total


def depth_from_coc(coc: float, settings: CameraSettings) -> float:
    """Depth offset producing a given signed blur-circle diameter.

    Exact inverse of :func:`coc_diameter`; diverges as the diameter
    approaches the asymptote ``c_zero``.
    """
    c0 = settings.c_zero
    if coc == c0:
        raise SingularDepthError("blur circle equals its asymptote: depth at infinity")
    delta = coc * settings.focus_dist_df / (c0 - coc)
    if abs(delta) > DIVERGENCE_LIMIT_MM:
        raise DivergenceError(f"depth offset diverged ({delta:.3g} mm)")
    return delta


def c_max_bounded(settings: CameraSettings, eta: float) -> float:
    """Largest |C| over relative depths bounded by |delta/d_f| < eta."""
    if not (0 < eta < 1):
        raise InvalidParameterError(f"eta must lie in (0, 1), got {eta}")
    return eta / (1.0 - eta) * settings.c_zero


class ForegroundCocBound(NamedTuple):
    """Exact and second-order-approximate blur-circle maxima (mm)."""

    exact: float
    approx: float


def c_max_foreground(
    d_foreground: float,
    d_background: float,
    focal_f: float,
    f_number: float,
) -> ForegroundCocBound:
    """Largest blur circle when focused on the foreground.

    Returns the exact expression ((d_B - d_F)/d_B) * A*f/(d_F - f) and
    its second-order approximation f^2 / (f_number * d_F), valid when
    f << d_F << d_B.  The background may be ``math.inf``.  Focusing on
    the background instead yields the same bound.
    """
    if not (0 < focal_f < d_foreground):
        raise InvalidParameterError("need 0 < focal length < foreground distance")
    if d_background <= d_foreground:
        raise InvalidParameterError("background must lie beyond the foreground")
    if f_number <= 0:
        raise InvalidParameterError(f"f-number must be positive, got {f_number}")
    aperture = focal_f / f_number
    scale = aperture * focal_f / (d_foreground - focal_f)
    if math.isinf(d_background):
        exact = scale
    else:
        exact = (d_background - d_foreground) / d_background * scale
    approx = focal_f * focal_f / (f_number * d_foreground)
    return ForegroundCocBound(exact=exact, approx=approx)


def solve_focal_length(c_m: float, f_number: float, focus_dist: float) -> float:
    """Positive focal length with blur-circle budget c_m at the given focus.

    Solves f^2 + c_m*f_n*f - c_m*f_n*d_f = 0 for its positive root, in
    the cancellation-free form 2*d_f / (1 + sqrt(1 + 4*d_f/(c_m*f_n))).
    """
    if min(c_m, f_number, focus_dist) <= 0:
        raise InvalidParameterError("c_m, f-number and focus distance must be positive")
    b = c_m * f_number
    return 2.0 * focus_dist / (1.0 + math.sqrt(1.0 + 4.0 * focus_dist / b))


def recommend_decimation(c_max_pitches: float) -> int:
    """Smallest decimation factor putting the blur circle under range.

    Returns the smallest integer D >= 1 with c_max_pitches / D < 5;
    warns when the scaled size falls below the 0.5-pitch detection
    floor.
    """
    if c_max_pitches <= 0:
        raise InvalidParameterError(f"c_max must be positive, got {c_max_pitches}")
    upper = RELATIVE_SIZE_RANGE[1]
    factor = max(1, int(math.floor(c_max_pitches / upper)) + 1)
    if c_max_pitches / factor < RELATIVE_SIZE_RANGE[0]:
        warnings.warn(
            f"decimated blur circle {c_max_pitches / factor:.3g} pitches is below "
            f"the {RELATIVE_SIZE_RANGE[0]}-pitch detection floor",
            stacklevel=2,
        )
    return factor
