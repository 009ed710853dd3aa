"""Covariance model and exact sampler for tree-indexed Brownian fields.

A zero-mean Gaussian field indexed by a tree metric is pinned down by its
root O (where the field is zero) and the covariance
``0.5 * (d(O,x) + d(O,y) - d(x,y))``.  Tree metrics are of negative type,
so this kernel is positive semidefinite; the semidefinite Cholesky
factorization doubles as the oracle sampler the increment simulators are
validated against, and a failed factorization is the practical witness
that a distance function is not of negative type.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import DEFAULT_TOL, Tolerance, as_point, as_rows
from .metrics import MetricKind, distance, distance_matrix, distance_rows

__all__ = [
    "CholeskyFactor",
    "CovMatrix",
    "NotPSD",
    "SampleBatch",
    "cholesky_psd",
    "covariance_matrix",
    "field_generator",
    "increment_covariance",
    "increment_indep_member",
    "increment_indep_rows",
    "sample_exact",
    "tree_covariance",
]


@dataclass(frozen=True, eq=False)
class CovMatrix:
    """Covariance of the field over a finite point list, rooted at ``root``."""

    entries: np.ndarray
    root: np.ndarray
    points: np.ndarray

    def __post_init__(self) -> None:
        e = np.asarray(self.entries, dtype=float)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {e.shape}")
        if not np.array_equal(e, e.T):
            raise ValueError("covariance must be symmetric as stored")
        object.__setattr__(self, "entries", e)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class CholeskyFactor:
    """Lower-triangular factor with L @ L.T reproducing the covariance; rank <= n."""

    lower: np.ndarray
    rank: int


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Seeded, reproducible matrix of simulated field values (reps x points)."""

    seed: int
    reps: int
    values: np.ndarray
    points: np.ndarray | None = None


class NotPSD(ValueError):
    """The matrix is not positive semidefinite at the pivot tolerance."""

    def __init__(self, index: int, pivot: float):
        super().__init__(f"not positive semidefinite: pivot {pivot:.6e} at index {index}")
        self.index = index
        self.pivot = pivot


def tree_covariance(kind: MetricKind, o, x, y, tol: Tolerance = DEFAULT_TOL) -> float:
    """Covariance of the field values at x and y for the field rooted at o."""
    return 0.5 * (
        distance(kind, o, x, tol) + distance(kind, o, y, tol) - distance(kind, x, y, tol)
    )


def covariance_matrix(kind: MetricKind, o, points, tol: Tolerance = DEFAULT_TOL) -> CovMatrix:
    """Pairwise field covariances; diagonal equals the distances to the root."""
    root = as_point(o)
    P = as_rows(points)
    d_root = distance_rows(kind, P, root, tol)
    D = distance_matrix(kind, P, tol).entries
    entries = 0.5 * (d_root[:, None] + d_root[None, :] - D)
    return CovMatrix(entries=entries, root=root, points=P)


def cholesky_psd(cov: CovMatrix, pivot_tol: float | None = None) -> CholeskyFactor:
    """Semidefinite Cholesky factorization tolerant of zero-variance points.

    Pivots below ``-pivot_tol`` raise NotPSD; pivots within the tolerance
    of zero are treated as exact zeros, which requires the remaining column
    to vanish too (it does for any true PSD matrix).  Default pivot
    tolerance is 1e-10 times the largest diagonal entry.
    """
    A = np.array(cov.entries, dtype=float)
    n = A.shape[0]
    max_diag = float(A.diagonal().max()) if n else 0.0
    if pivot_tol is None:
        pivot_tol = 1e-10 * max_diag
    resid_tol = np.sqrt(max(pivot_tol, 0.0) * max(max_diag, 0.0))
    L = np.zeros_like(A)
    rank = 0
    for j in range(n):
        pivot = A[j, j] - L[j, :j] @ L[j, :j]
        col = A[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]
        if pivot < -pivot_tol:
            raise NotPSD(j, float(pivot))
        if pivot <= pivot_tol:
            if col.size and float(np.max(np.abs(col))) > resid_tol:
                raise NotPSD(j, float(pivot))
            continue
        L[j, j] = np.sqrt(pivot)
        L[j + 1 :, j] = col / L[j, j]
        rank += 1
    return CholeskyFactor(lower=L, rank=rank)


def field_generator(seed: int) -> np.random.Generator:
    """The package-wide deterministic RNG family: Philox keyed by the seed.

    One counter-based stream per batch; a replicate's draws occupy a fixed
    prefix of the stream, so row r of any batch depends only on (seed, r)
    and the point count.
    """
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    return np.random.Generator(np.random.Philox(key=int(seed)))


def sample_exact(factor: CholeskyFactor, seed: int, reps: int, points=None) -> SampleBatch:
    """Oracle sampler: each replicate is L @ z with z standard normal."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    n = factor.lower.shape[0]
    z = field_generator(seed).standard_normal((int(reps), n))
    return SampleBatch(seed=int(seed), reps=int(reps), values=z @ factor.lower.T, points=points)


def increment_covariance(kind: MetricKind, x, y, p1, p2, tol: Tolerance = DEFAULT_TOL) -> float:
    """Cov(B(x) - B(y), B(p1) - B(p2)); the root cancels, so none is taken."""
    return 0.5 * (
        distance(kind, x, p2, tol)
        + distance(kind, y, p1, tol)
        - distance(kind, x, p1, tol)
        - distance(kind, y, p2, tol)
    )


def increment_indep_rows(kind: MetricKind, p1, p2, probes, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Rowwise: is B(a) - B(p2) uncorrelated with B(p1) - B(p2)?

    Same three-term residual as the beyond-set identity, so the two
    predicates agree decision-for-decision.
    """
    A = as_rows(probes)
    d_ap1 = distance_rows(kind, A, p1, tol)
    d_ap2 = distance_rows(kind, A, p2, tol)
    d_12 = distance(kind, p1, p2, tol)
    return np.abs(d_ap1 - d_ap2 - d_12) <= tol.eps_abs + tol.eps_rel * d_ap1


def increment_indep_member(kind: MetricKind, p1, p2, a, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Membership in the uncorrelated-increment set of the pair (p1, p2)."""
    return bool(increment_indep_rows(kind, p1, p2, as_point(a), tol)[0])
