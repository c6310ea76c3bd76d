"""Frame stack I/O: PNG/PGM directories of grayscale frames, [0, 1] floats."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .core import FrameStack

FRAME_EXTENSIONS = (".png", ".pgm")

# Rec. 601 luma weights for color inputs.
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def load_frame(path: str | Path) -> np.ndarray:
    """Load one image as a grayscale float frame in [0, 1]."""
    with Image.open(path) as img:
        arr = np.asarray(img)
    if arr.ndim == 3:
        arr = arr[..., :3] @ LUMA_WEIGHTS
    arr = arr.astype(np.float64)
    if arr.max() > 1.0:
        arr = arr / 255.0
    return np.clip(arr, 0.0, 1.0)


def save_frame(path: str | Path, frame: np.ndarray) -> None:
    """Write a [0, 1] frame as an 8-bit grayscale PNG (values rounded)."""
    data = np.clip(np.asarray(frame, dtype=np.float64), 0.0, 1.0)
    eight_bit = np.rint(data * 255.0).astype(np.uint8)
    Image.fromarray(eight_bit, mode="L").save(path)


def load_stack(directory: str | Path) -> FrameStack:
    """Load all PNG/PGM frames from a directory; lexicographic order = frame order."""
    directory = Path(directory)
    paths = sorted(
        p for p in directory.iterdir()
        if p.suffix.lower() in FRAME_EXTENSIONS and p.is_file()
    )
    if not paths:
        raise FileNotFoundError(f"no frame files (*.png, *.pgm) in {directory}")
    frames = [load_frame(p) for p in paths]
    shapes = {f.shape for f in frames}
    if len(shapes) > 1:
        offenders = {str(p): frames[i].shape for i, p in enumerate(paths)}
        raise ValueError(f"mixed frame dimensions: {offenders}")
    return FrameStack(np.stack(frames))


def save_stack(directory: str | Path, frames: np.ndarray) -> list[Path]:
    """Write frames as zero-padded numbered PNGs (frame_0001.png, ...)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, frame in enumerate(frames, start=1):
        path = directory / f"frame_{k:04d}.png"
        save_frame(path, frame)
        paths.append(path)
    return paths
