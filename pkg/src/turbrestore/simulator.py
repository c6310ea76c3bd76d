"""Synthetic turbulence-degraded sequence generation.

Each frame is produced from a single ground-truth image by (1) summing
randomly placed, Gaussian-smoothed uniform motion-vector patches into a global
displacement field scaled by a per-frame distorting strength, (2) backward
warping the truth through that field, (3) Gaussian blurring, and (4) optional
additive Gaussian noise. Strengths are drawn from a "severe" or "mild" range
according to an exact severe/mild partition of the frame indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import ndimage
from scipy.special import erf

from .core import FrameStack


@dataclass
class TurbulenceConfig:
    n_frames: int = 100
    severe_fraction: float = 0.7
    severe_strength_range: tuple[float, float] = (1.0, 1.5)
    mild_strength_range: tuple[float, float] = (0.2, 0.3)
    patch_size: int = 65
    patch_density_divisor: int = 250
    smoothing_sigma: float | None = None  # None -> patch_size / 6
    jitter: float = 2.0  # uniform mean shift of the smoothing kernel, in pixels
    blur_sigma: float = 1.0
    noise_sigma: float = 0.0
    noise_sigma_severe: float | None = None  # None -> same as noise_sigma
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_frames < 1:
            raise ValueError("need at least one frame")
        if not 0.0 <= self.severe_fraction <= 1.0:
            raise ValueError("severe_fraction must lie in [0, 1]")
        for lo, hi in (self.severe_strength_range, self.mild_strength_range):
            if lo < 0 or hi < lo:
                raise ValueError("strength ranges must satisfy 0 <= lo <= hi")
        if self.patch_size < 3 or self.patch_size % 2 == 0:
            raise ValueError("patch_size must be odd and >= 3")

    @property
    def patch_sigma(self) -> float:
        return self.patch_size / 6.0 if self.smoothing_sigma is None else self.smoothing_sigma

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class MotionField:
    """Pixel displacements: u horizontal (columns), v vertical (rows)."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.u.shape != self.v.shape:
            raise ValueError("u and v must share dimensions")
        if not (np.isfinite(self.u).all() and np.isfinite(self.v).all()):
            raise ValueError("non-finite displacement entries")


@dataclass
class SimulatedSequence:
    stack: FrameStack
    fields: list[MotionField]
    severe_mask: np.ndarray  # boolean, one entry per frame
    strengths: np.ndarray


def _patch_envelope(coords: np.ndarray, center: float, half: float, sigma: float) -> np.ndarray:
    """1-D profile of a uniform patch smoothed with a Gaussian of width sigma.

    Box-Gaussian convolution in closed form via erf; peak ~1 inside the patch.
    """
    a = (coords - (center - half)) / (np.sqrt(2.0) * sigma)
    b = (coords - (center + half)) / (np.sqrt(2.0) * sigma)
    return 0.5 * (erf(a) - erf(b))


def generate_motion_field(
    r: int,
    s: int,
    strength: float,
    config: TurbulenceConfig,
    rng: np.random.Generator,
    centers: list[tuple[float, float]] | None = None,
    jitter: bool = True,
) -> MotionField:
    """Accumulate random smoothed vector patches into one displacement field.

    Patches extending past the image are cropped at the borders. The field is
    exactly linear in `strength`. `centers` overrides the random patch
    placement (used by tests to pin a patch at a known location).
    """
    if strength < 0:
        raise ValueError("strength must be nonnegative")
    u = np.zeros((r, s))
    v = np.zeros((r, s))
    if centers is None:
        n_patches = (r * s) // config.patch_density_divisor
        centers = [
            (rng.uniform(0, r), rng.uniform(0, s)) for _ in range(n_patches)
        ]
    half = config.patch_size / 2.0
    sigma = config.patch_sigma
    rows = np.arange(r, dtype=np.float64)
    cols = np.arange(s, dtype=np.float64)
    for cy, cx in centers:
        vec = rng.standard_normal(2)
        if jitter and config.jitter > 0:
            jy, jx = rng.uniform(-config.jitter, config.jitter, size=2)
        else:
            jy = jx = 0.0
        envelope = np.outer(
            _patch_envelope(rows, cy + jy, half, sigma),
            _patch_envelope(cols, cx + jx, half, sigma),
        )
        u += vec[0] * envelope
        v += vec[1] * envelope
    return MotionField(u=strength * u, v=strength * v)


def warp(image: np.ndarray, motion: MotionField) -> np.ndarray:
    """Backward warp with bilinear interpolation and replicate boundary.

    output(x) = image(x + field(x)); a zero field reproduces the input.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.shape != motion.u.shape:
        raise ValueError("field dimensions must match the image")
    r, s = image.shape
    rows, cols = np.meshgrid(np.arange(r), np.arange(s), indexing="ij")
    coords = np.stack([rows + motion.v, cols + motion.u])
    return ndimage.map_coordinates(image, coords, order=1, mode="nearest")


def severe_mild_partition(config: TurbulenceConfig) -> np.ndarray:
    """Boolean mask: exactly floor(severe_fraction * n) severe frames, shuffled by seed."""
    n = config.n_frames
    n_severe = int(np.floor(config.severe_fraction * n))
    mask = np.zeros(n, dtype=bool)
    mask[:n_severe] = True
    np.random.default_rng(config.rng_seed).shuffle(mask)
    return mask


def simulate_sequence(ground_truth: np.ndarray, config: TurbulenceConfig) -> SimulatedSequence:
    """Generate a turbulence-degraded stack from one ground-truth frame.

    Deterministic for a fixed (config, seed): each frame draws from its own
    seeded substream, so per-frame generation order does not matter.
    """
    truth = np.asarray(ground_truth, dtype=np.float64)
    if truth.ndim != 2:
        raise ValueError("ground truth must be a single 2-D frame")
    r, s = truth.shape
    mask = severe_mild_partition(config)
    frames = np.empty((config.n_frames, r, s))
    fields: list[MotionField] = []
    strengths = np.empty(config.n_frames)
    noise_mild = config.noise_sigma
    noise_severe = (
        noise_mild if config.noise_sigma_severe is None else config.noise_sigma_severe
    )
    for k in range(config.n_frames):
        rng = np.random.default_rng([config.rng_seed, k])
        lo, hi = (
            config.severe_strength_range if mask[k] else config.mild_strength_range
        )
        strength = rng.uniform(lo, hi)
        strengths[k] = strength
        motion = generate_motion_field(r, s, strength, config, rng)
        frame = warp(truth, motion)
        if config.blur_sigma > 0:
            frame = ndimage.gaussian_filter(frame, config.blur_sigma, mode="nearest")
        sigma_n = noise_severe if mask[k] else noise_mild
        if sigma_n > 0:
            frame = frame + sigma_n * rng.standard_normal(frame.shape)
        frames[k] = np.clip(frame, 0.0, 1.0)
        fields.append(motion)
    return SimulatedSequence(
        stack=FrameStack(frames), fields=fields, severe_mask=mask, strengths=strengths
    )
