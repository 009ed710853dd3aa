"""Deterministic and Monte-Carlo verification harnesses.

The deterministic checks compare the simulators' induced covariances
entrywise against the covariance model and factor the model matrix; the
Monte-Carlo check compares an empirical covariance against theory at five
standard errors of the Gaussian covariance estimator, which keeps the
aggregate false-failure rate of a default verification run well under a
percent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import (
    CovMatrix,
    NotPSD,
    SampleBatch,
    cholesky_psd,
    covariance_matrix,
    increment_indep_rows,
    sample_exact,
)
from .geometry import DEFAULT_TOL, Tolerance
from .metrics import RADIAL, RIVER, MetricKind
from .regions import beyond_member_rows
from .simulate import (
    induced_covariance_radial,
    induced_covariance_river,
    radial_plan,
    river_closure,
    river_plan,
    simulate_radial,
    simulate_river,
)

__all__ = [
    "PASS",
    "FAIL",
    "SKIPPED",
    "VerifyReport",
    "compare_covariances",
    "independence_sets_report",
    "mc_covariance_test",
    "oracle_batch",
    "psd_report",
    "run_verify_suite",
]

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"

MIN_MC_REPS = 1000
MC_SIGMA = 5.0
INDUCED_ATOL = 1e-9


@dataclass(frozen=True)
class VerifyReport:
    """Outcome of one verification check."""

    name: str
    status: str
    max_deviation: float = 0.0
    tolerance: float = 0.0
    witness: tuple | None = None

    def __post_init__(self) -> None:
        if self.status == FAIL and self.witness is None:
            raise ValueError("a failing report must carry a witness")

    def line(self) -> str:
        text = f"{self.name}: {self.status.upper()}"
        if self.status != SKIPPED:
            text += f" (max deviation {self.max_deviation:.3e}, tolerance {self.tolerance:.3e})"
        if self.witness is not None:
            text += f" witness={self.witness}"
        return text


def compare_covariances(name: str, got: np.ndarray, want: np.ndarray, atol: float) -> VerifyReport:
    """Entrywise comparison with an absolute tolerance; witness is the argmax entry."""
    dev = np.abs(np.asarray(got) - np.asarray(want))
    worst = float(dev.max(initial=0.0))
    if worst <= atol:
        return VerifyReport(name, PASS, max_deviation=worst, tolerance=atol)
    i, j = np.unravel_index(int(dev.argmax()), dev.shape)
    return VerifyReport(name, FAIL, max_deviation=worst, tolerance=atol, witness=(int(i), int(j)))


def mc_covariance_test(batch: SampleBatch, theory: CovMatrix, min_reps: int = MIN_MC_REPS) -> VerifyReport:
    """Empirical covariance (zero-mean estimator, divisor reps) vs theory.

    Per-entry threshold is MC_SIGMA standard errors of the estimator,
    sqrt((C_ii C_jj + C_ij^2) / reps); rows of zero-variance points must
    match exactly.  Batches below ``min_reps`` are reported as skipped.
    """
    reps = batch.reps
    name = "mc-covariance"
    if reps < min_reps:
        return VerifyReport(name, SKIPPED)
    emp = batch.values.T @ batch.values / reps
    want = theory.entries
    se = np.sqrt((np.outer(np.diagonal(want), np.diagonal(want)) + want**2) / reps)
    threshold = MC_SIGMA * se
    dev = np.abs(emp - want)
    bad = dev > threshold
    if not bad.any():
        worst = int(np.argmax(dev - threshold))
        i, j = np.unravel_index(worst, dev.shape)
        return VerifyReport(name, PASS, max_deviation=float(dev[i, j]), tolerance=float(threshold[i, j]))
    excess = np.where(bad, dev - threshold, -np.inf)
    i, j = np.unravel_index(int(np.argmax(excess)), dev.shape)
    return VerifyReport(
        name,
        FAIL,
        max_deviation=float(dev[i, j]),
        tolerance=float(threshold[i, j]),
        witness=(int(i), int(j)),
    )


def psd_report(theory: CovMatrix) -> VerifyReport:
    """Factor the covariance; failure reports the offending pivot."""
    try:
        factor = cholesky_psd(theory)
    except NotPSD as err:
        return VerifyReport(
            "cholesky-psd", FAIL, max_deviation=-err.pivot, tolerance=0.0, witness=(err.index,)
        )
    recon = float(np.max(np.abs(factor.lower @ factor.lower.T - theory.entries), initial=0.0))
    return VerifyReport("cholesky-psd", PASS, max_deviation=recon, tolerance=INDUCED_ATOL)


def independence_sets_report(
    kind: MetricKind, points: np.ndarray, tol: Tolerance = DEFAULT_TOL, max_pairs: int = 60
) -> VerifyReport:
    """Uncorrelated-increment membership must match beyond-set membership.

    Probes every point against the first ``max_pairs`` ordered point pairs
    (deterministic order).
    """
    n = len(points)
    name = "independence-sets"
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j][:max_pairs]
    mismatches = 0
    witness = None
    for i, j in pairs:
        fb = increment_indep_rows(kind, points[i], points[j], points, tol)
        cd = beyond_member_rows(kind, points[i], points[j], points, tol)
        bad = np.nonzero(fb != cd)[0]
        if bad.size:
            mismatches += int(bad.size)
            if witness is None:
                witness = (i, j, int(bad[0]))
    if mismatches:
        return VerifyReport(name, FAIL, max_deviation=float(mismatches), tolerance=0.0, witness=witness)
    return VerifyReport(name, PASS, max_deviation=0.0, tolerance=0.0)


def run_verify_suite(
    kind: MetricKind,
    points: np.ndarray,
    seed: int,
    reps: int,
    tol: Tolerance = DEFAULT_TOL,
) -> list[VerifyReport]:
    """Induced-vs-model covariance, PSD factorization, Monte-Carlo, independence sets.

    For the river kind the suite operates on the closure of the input
    points, since that is the index set the simulator realizes.
    """
    if kind.variant == RADIAL:
        plan = radial_plan(points, tol)
        index_points = plan.points
        theory = covariance_matrix(kind, np.zeros(index_points.shape[1]), index_points, tol)
        induced = induced_covariance_radial(plan)
        batch = simulate_radial(plan, seed, reps) if reps >= 1 else None
    elif kind.variant == RIVER:
        labelled = river_closure(points, tol)
        plan = river_plan(labelled, tol)
        index_points = labelled
        theory = covariance_matrix(kind, np.zeros(2), labelled, tol)
        induced = induced_covariance_river(plan)
        batch = simulate_river(plan, seed, reps) if reps >= 1 else None
    else:
        raise ValueError("the verification suite covers the radial and river kinds")

    reports = [
        compare_covariances("induced-covariance", induced.entries, theory.entries, INDUCED_ATOL),
        psd_report(theory),
    ]
    if batch is None:
        reports.append(VerifyReport("mc-covariance", SKIPPED))
    else:
        reports.append(mc_covariance_test(batch, theory))
    reports.append(independence_sets_report(kind, index_points, tol))
    return reports


def oracle_batch(kind: MetricKind, points: np.ndarray, seed: int, reps: int, tol: Tolerance = DEFAULT_TOL) -> SampleBatch:
    """Cholesky-oracle batch for any kind whose covariance factors."""
    root = np.zeros(np.atleast_2d(points).shape[1])
    theory = covariance_matrix(kind, root, points, tol)
    return sample_exact(cholesky_psd(theory), seed, reps, points=theory.points)
