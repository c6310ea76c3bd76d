"""The J-subproblem: optimal subsample selection by sorted prefix averages.

Sorting per-frame energies ascending and scanning prefix means is globally
optimal: for a fixed cardinality p, the minimizer of the average energy is the
set of the p smallest energies, and scanning p = 1..n covers all cardinalities.
A brute-force enumerator over all nonempty subsets is kept as an oracle, along
with the separation diagnostics that certify when the relaxed low-rank J-step
agrees with exhaustive per-subset search.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import SubsampleSet, subsample_reward

BRUTE_FORCE_LIMIT = 20


def select_subsample(
    energies: np.ndarray, tau: float, rho: float
) -> tuple[SubsampleSet, float]:
    """Globally optimal nonempty subsample for prefix-mean energies minus reward.

    Ties between equal energies are broken by original frame index (stable
    sort); ties between prefix scores by the smaller cardinality.
    """
    energies = np.asarray(energies, dtype=np.float64)
    if energies.ndim != 1 or energies.size < 1:
        raise ValueError("energies must be a nonempty vector")
    if not np.isfinite(energies).all():
        raise ValueError("energies must be finite")
    n = energies.size
    order = np.argsort(energies, kind="stable")
    sizes = np.arange(1, n + 1)
    prefix_means = np.cumsum(energies[order]) / sizes
    scores = prefix_means - tau * (1.0 - np.exp(-rho * sizes))
    j_best = int(np.argmin(scores))  # argmin returns the first minimizer
    chosen = np.sort(order[: j_best + 1]) + 1
    return SubsampleSet(chosen.tolist(), n), float(scores[j_best])


def brute_force_select(
    energies: np.ndarray, tau: float, rho: float
) -> tuple[SubsampleSet, float]:
    """Exhaustive minimizer over all nonempty subsets (oracle, n <= 20)."""
    energies = np.asarray(energies, dtype=np.float64)
    n = energies.size
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError("oracle size limit")
    best_set: tuple[int, ...] | None = None
    best_energy = math.inf
    for p in range(1, n + 1):
        reward = subsample_reward(p, tau, rho)
        for combo in itertools.combinations(range(n), p):
            e = energies[list(combo)].mean() - reward
            # ties go to the lexicographically smallest index tuple
            if e < best_energy or (e == best_energy and combo < best_set):
                best_energy = e
                best_set = combo
    assert best_set is not None
    indices = [i + 1 for i in best_set]
    return SubsampleSet(indices, n), float(best_energy)


@dataclass
class SeparationDiagnostics:
    """Separation gaps certifying the relaxed low-rank selection.

    d_e: minimum gap between sorted per-frame energies.
    d_s: minimum gap between sorted accumulated prefix scores.
    m: maximum column residual ||I - L_col||_2.
    l: supplied low-rank column perturbation bound.
    certified: whether l < d_s / (4 m).
    """

    d_e: float
    d_s: float
    m: float
    l: float
    certified: bool


def separation_diagnostics(
    reference: np.ndarray,
    full_lowrank: np.ndarray,
    per_subset_lowrank_bound: float,
    energies: np.ndarray,
    tau: float = 0.0,
    rho: float = 0.1,
) -> SeparationDiagnostics:
    """Gap statistics used by the exhaustive-equivalence certificates.

    ``full_lowrank`` is an rs x m matrix of low-rank columns; ``reference`` is
    the current restored image whose column residuals bound M. The prefix
    scores use the same reward weights as the selector.
    """
    energies = np.asarray(energies, dtype=np.float64)
    n = energies.size
    ref = np.asarray(reference, dtype=np.float64).ravel(order="F")
    cols = np.asarray(full_lowrank, dtype=np.float64)
    if cols.shape[0] != ref.size:
        raise ValueError("low-rank matrix rows must match reference pixels")
    m_bound = float(np.max(np.linalg.norm(cols - ref[:, None], axis=0)))

    if n < 2:
        d_e = math.inf
        d_s = math.inf
    else:
        se = np.sort(energies)
        d_e = float(np.min(np.diff(se)))
        sizes = np.arange(1, n + 1)
        prefix = np.cumsum(se) / sizes - tau * (1.0 - np.exp(-rho * sizes))
        d_s = float(np.min(np.diff(np.sort(prefix))))

    l = float(per_subset_lowrank_bound)
    certified = m_bound > 0 and l < d_s / (4.0 * m_bound)
    return SeparationDiagnostics(d_e=d_e, d_s=d_s, m=m_bound, l=l, certified=certified)
