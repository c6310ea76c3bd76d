"""Frame-stack container, matrix views, temporal means and energy bookkeeping.

Conventions used throughout the package:

* intensities are floats in [0, 1] (8-bit inputs are divided by 255 on load),
* ``||.||_2^2`` of an image is a plain sum of squared pixel values (no
  pixel-count averaging),
* frame indices are 1-based, matching the usual sequence numbering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MODELS = ("iris", "liris", "tviris-aniso", "tviris-iso")


class FrameStack:
    """An ordered sequence of n grayscale frames of identical size r x s.

    Internally stored as one (n, r, s) float64 array. The column-stacked
    rs x n matrix view is produced by :func:`stack_matrix`.
    """

    def __init__(self, frames: Iterable[np.ndarray] | np.ndarray):
        data = np.asarray(frames, dtype=np.float64)
        if data.ndim != 3:
            raise ValueError("expected n frames of shape (r, s)")
        if data.shape[0] < 1:
            raise ValueError("need at least one frame")
        if not np.isfinite(data).all():
            raise ValueError("frames contain non-finite values")
        if data.min() < 0.0 or data.max() > 1.0:
            raise ValueError("intensities must lie in [0, 1]")
        self.data = data

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def r(self) -> int:
        return self.data.shape[1]

    @property
    def s(self) -> int:
        return self.data.shape[2]

    def frame(self, index: int) -> np.ndarray:
        """Frame by 1-based index."""
        if not 1 <= index <= self.n:
            raise IndexError(f"frame index {index} out of range 1..{self.n}")
        return self.data[index - 1]

    def __len__(self) -> int:
        return self.n

    def __iter__(self):
        return iter(self.data)


class SubsampleSet:
    """A nonempty, strictly increasing set of 1-based frame indices."""

    def __init__(self, indices: Sequence[int], n: int | None = None):
        idx = tuple(int(i) for i in indices)
        if len(idx) == 0:
            raise ValueError("empty subsample")
        if any(i < 1 for i in idx):
            raise ValueError("indices are 1-based and must be >= 1")
        if len(set(idx)) != len(idx):
            raise ValueError("duplicate indices in subsample")
        if tuple(sorted(idx)) != idx:
            idx = tuple(sorted(idx))
        if n is not None and idx[-1] > n:
            raise ValueError(f"index {idx[-1]} exceeds stack size {n}")
        self.indices = idx

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __eq__(self, other) -> bool:
        if isinstance(other, SubsampleSet):
            return self.indices == other.indices
        return self.indices == tuple(other)

    def __hash__(self) -> int:
        return hash(self.indices)

    def __repr__(self) -> str:
        return f"SubsampleSet({list(self.indices)})"

    def as_zero_based(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp) - 1


@dataclass
class ModelParams:
    """Weights and tolerances for the three energy models.

    ``tau=None`` asks the driver to derive the subsample-size reward weight
    from the first-iteration per-frame energies (their median).
    """

    lam: float = 300.0
    tau: float | None = None
    rho: float = 0.1
    mu: float = 0.5
    gamma: float = 1.0
    beta: float | None = None
    alpha0: float | None = None
    epsilon: float = 1e-5
    model: str = "iris"
    max_outer: int = 100
    tv_inner_tol: float = 1e-6
    tv_max_inner: int = 200
    dual_step: float | None = None
    rpca_tol: float = 1e-7
    rpca_max_iter: int = 500

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.lam < 0 or (self.tau is not None and self.tau < 0):
            raise ValueError("lam and tau must be nonnegative")
        if self.model.startswith("tviris") and self.gamma <= 0:
            raise ValueError("gamma must be positive for the TV model")

    @property
    def tv_variant(self) -> str:
        return "iso" if self.model == "tviris-iso" else "aniso"


@dataclass
class TraceRecord:
    iteration: int
    total_energy: float
    mean_fidelity: float
    mean_quality: float
    reward: float
    j_size: int


@dataclass
class EnergyTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def append(self, record: TraceRecord) -> None:
        if self.records and record.iteration <= self.records[-1].iteration:
            raise ValueError("iteration indices must strictly increase")
        self.records.append(record)

    def totals(self) -> np.ndarray:
        return np.array([rec.total_energy for rec in self.records])

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def stack_matrix(stack: FrameStack) -> np.ndarray:
    """The rs x n matrix whose column k is frame k flattened column-major."""
    n = stack.n
    out = np.empty((stack.r * stack.s, n))
    for k in range(n):
        out[:, k] = stack.data[k].ravel(order="F")
    return out


def unstack_matrix(matrix: np.ndarray, r: int, s: int) -> np.ndarray:
    """Inverse of :func:`stack_matrix`; returns an (n, r, s) array."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape[0] != r * s:
        raise ValueError("matrix row count does not match r*s")
    n = matrix.shape[1]
    out = np.empty((n, r, s))
    for k in range(n):
        out[k] = matrix[:, k].reshape((r, s), order="F")
    return out


def temporal_mean(stack: FrameStack, subset: SubsampleSet | None = None) -> np.ndarray:
    """Pixelwise mean over the selected frames (all frames if subset is None)."""
    if subset is None:
        return stack.data.mean(axis=0)
    if len(subset) == 0:
        raise ValueError("empty subsample")
    return stack.data[subset.as_zero_based()].mean(axis=0)


def subsample_reward(size: int, tau: float, rho: float) -> float:
    """Concave subsample-size reward tau * (1 - exp(-rho * size))."""
    if size < 0:
        raise ValueError("size must be nonnegative")
    return tau * (1.0 - np.exp(-rho * size))


def frame_fidelity(image: np.ndarray, frame: np.ndarray) -> float:
    """Squared L2 discrepancy, summed over pixels."""
    d = image - frame
    return float(np.dot(d.ravel(), d.ravel()))


def model_energy(
    stack: FrameStack,
    subset: SubsampleSet,
    image: np.ndarray,
    params: ModelParams,
    per_frame_quality: np.ndarray,
    model_fidelity: np.ndarray | None = None,
    return_parts: bool = False,
):
    """Total energy of the current (image, subsample) pair.

    ``per_frame_quality`` holds one quality value per frame of the full stack;
    ``model_fidelity``, when given, holds one fidelity value per *selected*
    frame (in subset order) and overrides the plain L2 fidelity against the
    stack frames. The image-regularity term mu*TV(I) only enters for the TV
    model.
    """
    if len(subset) == 0:
        raise ValueError("empty subsample")
    idx = subset.as_zero_based()
    if model_fidelity is None:
        fid = np.array([frame_fidelity(image, stack.data[k]) for k in idx])
    else:
        fid = np.asarray(model_fidelity, dtype=np.float64)
        if fid.shape != (len(subset),):
            raise ValueError("model_fidelity must have one entry per selected frame")
    quality = np.asarray(per_frame_quality, dtype=np.float64)[idx]

    mean_fid = float(fid.mean())
    mean_quality = float(params.lam * quality.mean())
    if params.model.startswith("tviris"):
        from .quality import tv_value

        reg = float(params.mu * tv_value(image, params.tv_variant))
    else:
        reg = 0.0
    tau = 0.0 if params.tau is None else params.tau
    reward = subsample_reward(len(subset), tau, params.rho)
    total = mean_fid + mean_quality + reg - reward
    if return_parts:
        return total, mean_fid, mean_quality, reg, reward
    return total
