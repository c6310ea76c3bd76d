"""The outer alternating-minimization loops for the three energy models.

Each driver alternates a frame-selection step (sorted prefix scan over
per-frame energies) with an image step:

* ``iris``  — L2 fidelity against the frames; image step is the temporal mean.
* ``liris`` — L2 fidelity against the low-rank part of the frame matrix; the
  selection step uses the full-sequence low-rank columns (the relaxed
  subproblem) and the image step re-runs robust PCA on the selected columns.
* ``tviris`` — L2 fidelity plus TV penalties; image step is a TV restoration
  of the selected frames' mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    EnergyTrace,
    FrameStack,
    ModelParams,
    SubsampleSet,
    TraceRecord,
    frame_fidelity,
    model_energy,
    stack_matrix,
    temporal_mean,
    unstack_matrix,
)
from .quality import sharpness_quality, tv_quality
from .rpca import rpca_ealm
from .selector import select_subsample
from .tvsolver import tv_restore


@dataclass
class RestorationResult:
    image: np.ndarray
    subsample: SubsampleSet
    trace: EnergyTrace
    iterations: int
    converged: bool


def _resolve_tau(params: ModelParams, energies: np.ndarray) -> float:
    """tau falls back to the median first-iteration per-frame energy.

    A degenerate all-zero energy vector (e.g. identical frames) gets a
    vanishing positive reward so ties resolve toward keeping every frame.
    """
    if params.tau is not None:
        return params.tau
    med = float(np.median(energies))
    return med if med > 0.0 else 1e-8


def _snap_ties(energies: np.ndarray) -> np.ndarray:
    """Quantize energies at 1e-12 relative so float noise cannot split ties."""
    tol = 1e-12 * max(1.0, float(np.max(np.abs(energies))))
    return np.round(energies / tol) * tol


def _fidelity_vector(image: np.ndarray, frames: np.ndarray) -> np.ndarray:
    return np.array([frame_fidelity(image, f) for f in frames])


def _initial_energy(
    stack: FrameStack,
    image: np.ndarray,
    params: ModelParams,
    quality: np.ndarray,
    tau: float,
    model_fidelity: np.ndarray | None = None,
) -> float:
    """Energy of the initializer paired with the full index set."""
    eff = ModelParams(**{**params.__dict__, "tau": tau})
    full = SubsampleSet(range(1, stack.n + 1), stack.n)
    return model_energy(stack, full, image, eff, quality, model_fidelity)


def _record(
    trace: EnergyTrace,
    iteration: int,
    stack: FrameStack,
    subset: SubsampleSet,
    image: np.ndarray,
    params: ModelParams,
    quality: np.ndarray,
    tau: float,
    model_fidelity: np.ndarray | None = None,
) -> float:
    eff = ModelParams(**{**params.__dict__, "tau": tau})
    total, mean_fid, mean_q, reg, reward = model_energy(
        stack, subset, image, eff, quality, model_fidelity, return_parts=True
    )
    trace.append(
        TraceRecord(
            iteration=iteration,
            total_energy=total,
            mean_fidelity=mean_fid,
            mean_quality=mean_q + reg,
            reward=reward,
            j_size=len(subset),
        )
    )
    return total


def iris(stack: FrameStack, params: ModelParams) -> RestorationResult:
    """Alternating frame selection and temporal-mean extraction (Model 1)."""
    quality = sharpness_quality(stack.data)
    image = temporal_mean(stack)
    trace = EnergyTrace()
    tau: float | None = None
    prev_energy = np.inf
    subset = SubsampleSet(range(1, stack.n + 1), stack.n)
    converged = False
    iterations = 0
    for iterations in range(1, params.max_outer + 1):
        energies = _snap_ties(
            _fidelity_vector(image, stack.data) + params.lam * quality
        )
        if tau is None:
            tau = _resolve_tau(params, energies)
            prev_energy = _initial_energy(stack, image, params, quality, tau)
        subset, _ = select_subsample(energies, tau, params.rho)
        image = temporal_mean(stack, subset)
        energy = _record(trace, iterations, stack, subset, image, params, quality, tau)
        # Algorithm stops when the (nonnegative) decrease falls below epsilon.
        if prev_energy - energy <= params.epsilon:
            converged = True
            break
        prev_energy = energy
    return RestorationResult(
        image=np.clip(image, 0.0, 1.0),
        subsample=subset,
        trace=trace,
        iterations=iterations,
        converged=converged,
    )


def liris(stack: FrameStack, params: ModelParams) -> RestorationResult:
    """Low-rank fidelity variant (Model 2).

    The selection step scores frames against the low-rank columns of the full
    sequence; the image step decomposes the selected columns and averages
    their low-rank parts.
    """
    quality = sharpness_quality(stack.data)
    if stack.n == 1:
        # nothing to select or decompose; the frame is its own low-rank part
        subset = SubsampleSet([1], 1)
        image = stack.data[0].copy()
        trace = EnergyTrace()
        tau = params.tau if params.tau is not None else 0.0
        _record(trace, 1, stack, subset, image, params, quality, tau, np.zeros(1))
        return RestorationResult(
            image=image, subsample=subset, trace=trace, iterations=1, converged=True
        )
    matrix = stack_matrix(stack)
    full = rpca_ealm(
        matrix, beta=params.beta, tol=params.rpca_tol,
        max_iter=params.rpca_max_iter, alpha0=params.alpha0,
    )
    low_full = unstack_matrix(full.L, stack.r, stack.s)
    image = low_full.mean(axis=0)
    rpca_converged = full.converged

    trace = EnergyTrace()
    tau: float | None = None
    prev_energy = np.inf
    subset = SubsampleSet(range(1, stack.n + 1), stack.n)
    cache: dict[tuple[int, ...], np.ndarray] = {}
    converged = False
    iterations = 0
    for iterations in range(1, params.max_outer + 1):
        energies = _snap_ties(
            _fidelity_vector(image, low_full) + params.lam * quality
        )
        if tau is None:
            tau = _resolve_tau(params, energies)
            prev_energy = _initial_energy(
                stack, image, params, quality, tau,
                _fidelity_vector(image, low_full),
            )
        subset, _ = select_subsample(energies, tau, params.rho)

        key = subset.indices
        if key not in cache:
            sub = rpca_ealm(
                matrix[:, subset.as_zero_based()], beta=params.beta,
                tol=params.rpca_tol, max_iter=params.rpca_max_iter,
                alpha0=params.alpha0,
            )
            rpca_converged = rpca_converged and sub.converged
            cache[key] = unstack_matrix(sub.L, stack.r, stack.s)
        low_sub = cache[key]
        image = low_sub.mean(axis=0)

        fid = _fidelity_vector(image, low_sub)
        energy = _record(
            trace, iterations, stack, subset, image, params, quality, tau, fid
        )
        if abs(prev_energy - energy) <= params.epsilon:
            converged = True
            break
        prev_energy = energy
    return RestorationResult(
        image=np.clip(image, 0.0, 1.0),
        subsample=subset,
        trace=trace,
        iterations=iterations,
        converged=converged and rpca_converged,
    )


def tviris(stack: FrameStack, params: ModelParams) -> RestorationResult:
    """TV-regularized variant (Model 3) for noisy sequences."""
    variant = params.tv_variant
    quality = tv_quality(stack.data, variant)
    image = temporal_mean(stack)
    trace = EnergyTrace()
    tau: float | None = None
    prev_energy = np.inf
    subset = SubsampleSet(range(1, stack.n + 1), stack.n)
    converged = False
    tv_converged = True
    iterations = 0
    for iterations in range(1, params.max_outer + 1):
        energies = _snap_ties(
            _fidelity_vector(image, stack.data) + params.lam * quality
        )
        if tau is None:
            tau = _resolve_tau(params, energies)
            prev_energy = _initial_energy(stack, image, params, quality, tau)
        subset, _ = select_subsample(energies, tau, params.rho)
        restored = tv_restore(
            temporal_mean(stack, subset),
            mu=params.mu,
            gamma=params.gamma,
            variant=variant,
            inner_tol=params.tv_inner_tol,
            max_inner=params.tv_max_inner,
            dual_step=params.dual_step,
        )
        tv_converged = tv_converged and restored.converged
        image = restored.image
        energy = _record(trace, iterations, stack, subset, image, params, quality, tau)
        if abs(prev_energy - energy) <= params.epsilon:
            converged = True
            break
        prev_energy = energy
    return RestorationResult(
        image=np.clip(image, 0.0, 1.0),
        subsample=subset,
        trace=trace,
        iterations=iterations,
        converged=converged,
    )


def restore(stack: FrameStack, params: ModelParams) -> RestorationResult:
    """Dispatch on params.model."""
    if params.model == "iris":
        return iris(stack, params)
    if params.model == "liris":
        return liris(stack, params)
    return tviris(stack, params)
