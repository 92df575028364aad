"""Grayscale image loading and saving (PNG/PGM) on the [0, 1] scale."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageIOError, InvalidParameterError

LUMA_WEIGHTS = (0.299, 0.587, 0.114)

_SUPPORTED_SUFFIXES = {".png", ".pgm"}


def load_gray(path: str | Path) -> np.ndarray:
    """Read an 8- or 16-bit PNG/PGM as float64 intensities in [0, 1].

    Color inputs are converted with the 0.299/0.587/0.114 luma weights
    before scaling by the maximum code value.
    """
    path = Path(path)
    if path.suffix.lower() not in _SUPPORTED_SUFFIXES:
        raise ImageIOError(f"{path}: unsupported format (need PNG or PGM)")
    try:
        with Image.open(path) as img:
            img.load()
            mode = img.mode
            data = np.asarray(img)
    except (FileNotFoundError, UnidentifiedImageError, OSError) as exc:
        raise ImageIOError(f"{path}: {exc}") from exc
    if mode in ("RGB", "RGBA"):
        rgb = data[..., :3].astype(np.float64)
        gray = rgb @ np.array(LUMA_WEIGHTS)
        return gray / 255.0
    if mode == "L":
        return data.astype(np.float64) / 255.0
    if mode in ("I", "I;16", "I;16B", "I;16L"):
        return data.astype(np.float64) / 65535.0
    if mode == "F":
        return data.astype(np.float64)
    raise ImageIOError(f"{path}: unsupported image mode {mode!r}")


def save_gray(image: np.ndarray, path: str | Path) -> None:
    """Write intensities in [0, 1] as an 8-bit PNG/PGM.

    Quantization rounds half up (0.5 maps to code 128).  Out-of-range
    values are an error, not a silent clamp; clamp explicitly first when
    overshoot is expected.
    """
    path = Path(path)
    if path.suffix.lower() not in _SUPPORTED_SUFFIXES:
        raise ImageIOError(f"{path}: unsupported format (need PNG or PGM)")
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise InvalidParameterError(f"expected a 2-D image, got shape {image.shape}")
    if not np.all(np.isfinite(image)):
        raise InvalidParameterError("image contains non-finite values")
    if image.min() < 0.0 or image.max() > 1.0:
        raise InvalidParameterError(
            f"intensities outside [0, 1] (min {image.min():.4g}, max {image.max():.4g})"
        )
    codes = np.floor(image * 255.0 + 0.5).astype(np.uint8)
    try:
        Image.fromarray(codes, mode="L").save(path)
    except OSError as exc:
        raise ImageIOError(f"{path}: {exc}") from exc
