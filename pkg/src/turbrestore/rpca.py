"""Robust PCA: nuclear-norm + L1 decomposition by an augmented Lagrangian solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Decomposition:
    """Low-rank + sparse split of a matrix, L + S ~= M."""

    L: np.ndarray
    S: np.ndarray
    iterations: int
    residual: float
    converged: bool


def shrink(x: np.ndarray, kappa: float) -> np.ndarray:
    """Entrywise soft threshold sign(x) * max(|x| - kappa, 0)."""
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    return np.sign(x) * np.maximum(np.abs(x) - kappa, 0.0)


def svt(matrix: np.ndarray, threshold: float) -> np.ndarray:
    """Singular value thresholding: soft-threshold the spectrum at `threshold`."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    u, sig, vt = np.linalg.svd(np.asarray(matrix, dtype=np.float64), full_matrices=False)
    sig = np.maximum(sig - threshold, 0.0)
    keep = sig > 0
    if not keep.any():
        return np.zeros_like(matrix, dtype=np.float64)
    return (u[:, keep] * sig[keep]) @ vt[keep]


def rpca_ealm(
    matrix: np.ndarray,
    beta: float | None = None,
    tol: float = 1e-7,
    max_iter: int = 500,
    alpha0: float | None = None,
    growth: float = 1.6,
    alpha_max: float = 1e7,
) -> Decomposition:
    """Decompose M into low-rank L and sparse S by minimizing ||L||_* + beta*||S||_1.

    Alternates singular value thresholding for L with entrywise shrinkage for
    S on the augmented Lagrangian, updating the multiplier and growing the
    penalty until the relative Frobenius residual of L + S - M meets `tol`.
    """
    m_mat = np.asarray(matrix, dtype=np.float64)
    if m_mat.ndim != 2 or m_mat.shape[1] < 1:
        raise ValueError("expected a 2-D matrix with at least one column")
    if not np.isfinite(m_mat).all():
        raise ValueError("matrix contains non-finite entries")

    if beta is None:
        beta = 1.0 / np.sqrt(max(m_mat.shape))
    if beta <= 0:
        raise ValueError("beta must be positive")

    norm_f = np.linalg.norm(m_mat)
    if norm_f == 0.0:
        z = np.zeros_like(m_mat)
        return Decomposition(L=z, S=z.copy(), iterations=1, residual=0.0, converged=True)

    alpha = alpha0 if alpha0 is not None else 1.25 / np.linalg.norm(m_mat, 2)
    lam = np.zeros_like(m_mat)
    s_mat = np.zeros_like(m_mat)
    l_mat = np.zeros_like(m_mat)
    residual = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        # inner alternation to (approximate) convergence before the dual update
        for _ in range(500):
            l_new = svt(m_mat - s_mat + lam / alpha, 1.0 / alpha)
            s_new = shrink(m_mat - l_new + lam / alpha, beta / alpha)
            moved = max(
                np.linalg.norm(l_new - l_mat), np.linalg.norm(s_new - s_mat)
            )
            l_mat, s_mat = l_new, s_new
            if moved <= 1e-9 * norm_f:
                break
        gap = m_mat - l_mat - s_mat
        lam = lam + alpha * gap
        residual = np.linalg.norm(gap) / norm_f
        if residual <= tol:
            return Decomposition(
                L=l_mat, S=s_mat, iterations=iterations, residual=float(residual),
                converged=True,
            )
        alpha = min(alpha * growth, alpha_max)
    return Decomposition(
        L=l_mat, S=s_mat, iterations=iterations, residual=float(residual),
        converged=False,
    )
