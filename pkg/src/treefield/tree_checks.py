"""Finite-set certification of tree-metric structure.

A distance matrix is certified by exhaustive scans: triangle inequality
over triples, the four-point condition over quadruples, optionally the
strong (ultrametric) triangle inequality, and — given coordinates and a
metric kind — the existence of a common branch point for every triple.
Scans report the lexicographically first violation so results are
deterministic regardless of internal evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .geometry import DEFAULT_TOL, Tolerance, as_point, as_rows
from .metrics import (
    RADIAL,
    RIVER,
    DistanceMatrix,
    MedianError,
    MetricKind,
    _gromov_median_prepared,
    distance,
    distance_matrix,
)

__all__ = [
    "CONDITION_B",
    "FOUR_POINT",
    "TRIANGLE",
    "ULTRAMETRIC",
    "ViolationReport",
    "check_condition_b",
    "four_point_holds",
    "four_point_slacks",
    "is_tree_metric",
    "is_ultrametric",
    "ultrametric_violation",
]

FOUR_POINT = "four-point"
TRIANGLE = "triangle"
ULTRAMETRIC = "ultrametric"
CONDITION_B = "condition-b"


@dataclass(frozen=True)
class ViolationReport:
    """Witness of a failed inequality: which check, which indices, by how much."""

    kind: str
    witness: tuple[int, ...]
    slack: float

    def __post_init__(self) -> None:
        if not self.slack > 0.0:
            raise ValueError("a violation must have positive slack")
        if len(set(self.witness)) != len(self.witness):
            raise ValueError("witness indices must be distinct")


def four_point_slacks(entries: np.ndarray, quads: np.ndarray) -> np.ndarray:
    """Largest-minus-second pairing sums for each index quadruple.

    A quadruple satisfies the four-point condition exactly when its slack
    is <= 0 (up to the caller's band): the two largest of the three
    pairing sums must tie.
    """
    quads = np.asarray(quads, dtype=np.intp)
    i, j, k, l = quads.T
    sums = np.stack(
        (
            entries[i, j] + entries[k, l],
            entries[i, k] + entries[j, l],
            entries[i, l] + entries[j, k],
        )
    )
    sums.sort(axis=0)
    return sums[2] - sums[1]


def four_point_holds(dm: DistanceMatrix, quad, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Check the four-point condition for one quadruple of indices."""
    i, j, k, l = (int(q) for q in quad)
    if len({i, j, k, l}) != 4:
        raise IndexError("quadruple indices must be distinct")
    for q in (i, j, k, l):
        if not 0 <= q < dm.n:
            raise IndexError(f"index {q} out of range for n={dm.n}")
    e = dm.entries
    sums = sorted((e[i, j] + e[k, l], e[i, k] + e[j, l], e[i, l] + e[j, k]))
    return sums[2] - sums[1] <= tol.band(sums[2])


def _first_triangle_violation(entries: np.ndarray, tol: Tolerance) -> ViolationReport | None:
    n = entries.shape[0]
    if n < 3:
        return None
    trips = np.array(list(combinations(range(n), 3)), dtype=np.intp)
    i, j, k = trips.T
    # Roles: which pair plays the long side, witness ordered (x, y, via).
    roles = (
        (entries[i, j] - entries[i, k] - entries[k, j], entries[i, j], (i, j, k)),
        (entries[i, k] - entries[i, j] - entries[j, k], entries[i, k], (i, k, j)),
        (entries[j, k] - entries[j, i] - entries[i, k], entries[j, k], (j, k, i)),
    )
    best: tuple[int, int] | None = None
    for role, (slack, long_side, _) in enumerate(roles):
        bad = np.nonzero(slack > tol.eps_abs + tol.eps_rel * long_side)[0]
        if bad.size and (best is None or bad[0] < best[1]):
            best = (role, int(bad[0]))
    if best is None:
        return None
    role, row = best
    slack, _, witness = roles[role]
    return ViolationReport(
        TRIANGLE,
        tuple(int(w[row]) for w in witness),
        float(slack[row]),
    )


def _first_four_point_violation(entries: np.ndarray, tol: Tolerance) -> ViolationReport | None:
    n = entries.shape[0]
    if n < 4:
        return None
    quads = np.array(list(combinations(range(n), 4)), dtype=np.intp)
    slacks = four_point_slacks(entries, quads)
    i, j, k, l = quads.T
    hi = np.maximum(
        entries[i, j] + entries[k, l],
        np.maximum(entries[i, k] + entries[j, l], entries[i, l] + entries[j, k]),
    )
    bad = np.nonzero(slacks > tol.eps_abs + tol.eps_rel * hi)[0]
    if not bad.size:
        return None
    row = int(bad[0])
    return ViolationReport(FOUR_POINT, tuple(int(q) for q in quads[row]), float(slacks[row]))


def is_tree_metric(
    dm: DistanceMatrix, tol: Tolerance = DEFAULT_TOL
) -> tuple[bool, ViolationReport | None]:
    """Exhaustive triangle and four-point scan; first violation is the witness."""
    report = _first_triangle_violation(dm.entries, tol)
    if report is None:
        report = _first_four_point_violation(dm.entries, tol)
    return report is None, report


def ultrametric_violation(dm: DistanceMatrix, tol: Tolerance = DEFAULT_TOL) -> ViolationReport | None:
    """First triple breaking the strong triangle inequality, if any."""
    entries = dm.entries
    n = dm.n
    if n < 3:
        return None
    trips = np.array(list(combinations(range(n), 3)), dtype=np.intp)
    i, j, k = trips.T
    roles = (
        (entries[i, j] - np.maximum(entries[i, k], entries[j, k]), entries[i, j], (i, j, k)),
        (entries[i, k] - np.maximum(entries[i, j], entries[j, k]), entries[i, k], (i, k, j)),
        (entries[j, k] - np.maximum(entries[j, i], entries[i, k]), entries[j, k], (j, k, i)),
    )
    best: tuple[int, int] | None = None
    for role, (slack, long_side, _) in enumerate(roles):
        bad = np.nonzero(slack > tol.eps_abs + tol.eps_rel * long_side)[0]
        if bad.size and (best is None or bad[0] < best[1]):
            best = (role, int(bad[0]))
    if best is None:
        return None
    role, row = best
    slack, _, witness = roles[role]
    return ViolationReport(
        ULTRAMETRIC,
        tuple(int(w[row]) for w in witness),
        float(slack[row]),
    )


def is_ultrametric(dm: DistanceMatrix, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Strong triangle inequality over all triples."""
    return ultrametric_violation(dm, tol) is None


def _search_common_point(kind: MetricKind, a, b, c, tol: Tolerance):
    """Numeric fallback for kinds without a closed-form branch point.

    Minimizes the squared defect of the three half-perimeter identities
    from several starts; returns the best candidate and its worst identity
    residual.
    """
    from scipy.optimize import minimize

    dab = distance(kind, a, b, tol)
    dac = distance(kind, a, c, tol)
    dbc = distance(kind, b, c, tol)
    targets = (
        (a, 0.5 * (dab + dac - dbc)),
        (b, 0.5 * (dab + dbc - dac)),
        (c, 0.5 * (dac + dbc - dab)),
    )

    def cost(o):
        return sum((distance(kind, o, p, tol) - want) ** 2 for p, want in targets)

    def worst(o):
        return max(abs(distance(kind, o, p, tol) - want) for p, want in targets)

    starts = [a, b, c, (a + b + c) / 3.0, np.zeros_like(a)]
    best_o, best_resid = None, np.inf
    for start in starts:
        res = minimize(
            cost,
            start,
            method="Nelder-Mead",
            options={"xatol": 1e-11, "fatol": 1e-22, "maxiter": 800},
        )
        resid = worst(res.x)
        if resid < best_resid:
            best_o, best_resid = res.x, resid
        if best_resid < 1e-10:
            break
    return best_o, best_resid


def check_condition_b(
    kind: MetricKind, points, tol: Tolerance = DEFAULT_TOL
) -> tuple[bool, ViolationReport | None]:
    """Does every triple admit a common point of its three metric segments?

    For the radial and river kinds the closed-form branch point is used and
    re-verified; other kinds fall back to a numeric search.  The first
    failing triple (lexicographic) is reported.
    """
    P = as_rows(points)
    closed_form = kind.variant in (RADIAL, RIVER)
    entries = distance_matrix(kind, P, tol).entries if closed_form else None
    for i, j, k in combinations(range(len(P)), 3):
        a, b, c = P[i], P[j], P[k]
        if closed_form:
            # The prepared median re-verifies identities and memberships.
            try:
                _gromov_median_prepared(
                    kind, a, b, c, tol, (entries[i, j], entries[i, k], entries[j, k])
                )
            except MedianError as err:
                return False, ViolationReport(CONDITION_B, (i, j, k), err.residual)
            continue
        o, resid = _search_common_point(kind, a, b, c, tol)
        scale = max(distance(kind, x, y, tol) for x, y in ((a, b), (a, c), (b, c)))
        if resid > 10.0 * tol.band(scale):
            return False, ViolationReport(CONDITION_B, (i, j, k), float(resid))
        for x, y in ((a, b), (a, c), (b, c)):
            dxy = distance(kind, x, y, tol)
            defect = distance(kind, x, o, tol) + distance(kind, o, y, tol) - dxy
            if defect > 10.0 * tol.band(dxy):
                return False, ViolationReport(CONDITION_B, (i, j, k), float(defect))
    return True, None
