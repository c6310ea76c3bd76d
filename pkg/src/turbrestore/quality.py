"""Per-frame quality measures: Laplacian sharpness and total variation."""

from __future__ import annotations

import warnings

import numpy as np
from scipy import ndimage

# Standard 5-point discrete Laplacian.
LAPLACIAN_KERNEL = np.array(
    [[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]]
)


def laplacian_l1(frame: np.ndarray) -> float:
    """L1 norm of the 5-point Laplacian with replicate boundary handling.

    Larger for sharper frames; exactly zero on constant frames.
    """
    frame = np.asarray(frame, dtype=np.float64)
    lap = ndimage.convolve(frame, LAPLACIAN_KERNEL, mode="nearest")
    return float(np.abs(lap).sum())


def normalize_sharpness(raw: np.ndarray) -> np.ndarray:
    """Affine map of raw sharpness values: sharpest (max) -> 0, blurriest (min) -> 1.

    If all values coincide the sequence carries no sharpness information; a
    zero vector is returned with a warning.
    """
    raw = np.asarray(raw, dtype=np.float64)
    hi = raw.max()
    lo = raw.min()
    if hi == lo:
        if raw.size > 1:
            warnings.warn(
                "all frames have identical sharpness; quality set to zero",
                RuntimeWarning,
                stacklevel=2,
            )
        return np.zeros_like(raw)
    return (hi - raw) / (hi - lo)


def grad_x(frame: np.ndarray) -> np.ndarray:
    """Forward difference along columns; last column is zero (replicate)."""
    out = np.zeros_like(frame)
    out[:, :-1] = frame[:, 1:] - frame[:, :-1]
    return out


def grad_y(frame: np.ndarray) -> np.ndarray:
    """Forward difference along rows; last row is zero (replicate)."""
    out = np.zeros_like(frame)
    out[:-1, :] = frame[1:, :] - frame[:-1, :]
    return out


def tv_value(frame: np.ndarray, variant: str = "aniso") -> float:
    """Discrete total variation with forward differences.

    ``aniso`` sums |grad_x| + |grad_y|; ``iso`` sums the pointwise Euclidean
    gradient magnitude.
    """
    frame = np.asarray(frame, dtype=np.float64)
    gx = grad_x(frame)
    gy = grad_y(frame)
    if variant == "aniso":
        return float(np.abs(gx).sum() + np.abs(gy).sum())
    if variant == "iso":
        return float(np.sqrt(gx * gx + gy * gy).sum())
    raise ValueError(f"unknown TV variant {variant!r}")


def sharpness_quality(frames: np.ndarray) -> np.ndarray:
    """Normalized Laplacian quality vector for an (n, r, s) array of frames."""
    raw = np.array([laplacian_l1(f) for f in frames])
    return normalize_sharpness(raw)


def tv_quality(frames: np.ndarray, variant: str = "aniso") -> np.ndarray:
    """Raw TV quality vector for an (n, r, s) array of frames."""
    return np.array([tv_value(f, variant) for f in frames])
