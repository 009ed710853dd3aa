"""Distance functions on R^n that branch at the origin or along a river axis.

The radial metric measures straight-line distance when two points share a
line through the origin and ``|a| + |b|`` otherwise.  The river metric
(plane only) walks down to the horizontal axis, along it, and back up.
Rescaled variants apply a positive profile function to every leg, which
lets identification tests probe distance functions that share the branch
structure without being the base metric.  Profiles may break the triangle
inequality; nothing here assumes metric axioms — classification is the
job of ``tree_checks``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    DEFAULT_TOL,
    DimensionError,
    Tolerance,
    as_point,
    as_rows,
    check_same_dim,
    collinear_rows,
    same_ray_rows,
)

__all__ = [
    "DistanceMatrix",
    "LinearFamily",
    "MedianError",
    "MetricKind",
    "PowerFamily",
    "distance",
    "distance_matrix",
    "distance_rows",
    "gromov_median",
    "radial_distance",
    "river_distance",
    "segment_contains",
]

RADIAL = "radial"
RIVER = "river"
EUCLIDEAN = "euclidean"
PARAMETRIC_RADIAL = "parametric-radial"
PARAMETRIC_RIVER = "parametric-river"
_VARIANTS = (RADIAL, RIVER, EUCLIDEAN, PARAMETRIC_RADIAL, PARAMETRIC_RIVER)


@dataclass(frozen=True)
class PowerFamily:
    """Leg profile u -> u**exponent; maps 1 to 1 for every exponent."""

    exponent: float

    def __post_init__(self) -> None:
        if not self.exponent > 0.0:
            raise ValueError("power profile needs a positive exponent")

    def __call__(self, u):
        return np.power(u, self.exponent)

    def label(self) -> str:
        return f"power(p={self.exponent:g})"


@dataclass(frozen=True)
class LinearFamily:
    """Leg profile u -> slope * u; normalized (slope 1) only when asserted by callers."""

    slope: float

    def __post_init__(self) -> None:
        if not self.slope > 0.0:
            raise ValueError("linear profile needs a positive slope")

    def __call__(self, u):
        return self.slope * np.asarray(u, dtype=float)

    def label(self) -> str:
        return f"linear(c={self.slope:g})"


@dataclass(frozen=True)
class MetricKind:
    """Selector for the distance function: base metrics or profiled variants.

    ``family`` is the profile applied on rays (radial) or verticals (river);
    ``axis_family`` is the river-axis profile and defaults to ``family``.
    """

    variant: str
    family: PowerFamily | LinearFamily | None = None
    axis_family: PowerFamily | LinearFamily | None = None

    def __post_init__(self) -> None:
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown metric variant {self.variant!r}")
        parametric = self.variant in (PARAMETRIC_RADIAL, PARAMETRIC_RIVER)
        if parametric and self.family is None:
            raise ValueError(f"{self.variant} requires a profile family")
        if not parametric and (self.family is not None or self.axis_family is not None):
            raise ValueError(f"{self.variant} takes no profile family")
        if self.variant == PARAMETRIC_RIVER and self.axis_family is None:
            object.__setattr__(self, "axis_family", self.family)

    @classmethod
    def radial(cls) -> "MetricKind":
        return cls(RADIAL)

    @classmethod
    def river(cls) -> "MetricKind":
        return cls(RIVER)

    @classmethod
    def euclidean(cls) -> "MetricKind":
        return cls(EUCLIDEAN)

    @classmethod
    def parametric_radial(cls, family) -> "MetricKind":
        return cls(PARAMETRIC_RADIAL, family=family)

    @classmethod
    def parametric_river(cls, family, axis_family=None) -> "MetricKind":
        return cls(PARAMETRIC_RIVER, family=family, axis_family=axis_family)

    @property
    def radial_structured(self) -> bool:
        return self.variant in (RADIAL, PARAMETRIC_RADIAL)

    @property
    def river_structured(self) -> bool:
        return self.variant in (RIVER, PARAMETRIC_RIVER)

    def label(self) -> str:
        if self.family is None:
            return self.variant
        extra = self.family.label()
        if self.variant == PARAMETRIC_RIVER and self.axis_family != self.family:
            extra += f"/{self.axis_family.label()}"
        return f"{self.variant}[{extra}]"


def _radial_rows(A, B, tol, family=None):
    on_line = collinear_rows(A, B, tol)
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    gap = np.linalg.norm(A - B, axis=1)
    if family is None:
        return np.where(on_line, gap, na + nb)
    return np.where(on_line, family(gap), family(na) + family(nb))


def _river_rows(A, B, tol, family=None, axis_family=None):
    if A.shape[1] != 2:
        raise DimensionError("river metric requires dimension 2")
    dx = np.abs(A[:, 0] - B[:, 0])
    same_vertical = dx <= tol.eps_abs + tol.eps_rel * (np.abs(A[:, 0]) + np.abs(B[:, 0]))
    dy = np.abs(A[:, 1] - B[:, 1])
    ya = np.abs(A[:, 1])
    yb = np.abs(B[:, 1])
    # Sum the two vertical legs first so the result is exactly symmetric.
    if family is None:
        return np.where(same_vertical, dy, (ya + yb) + dx)
    return np.where(same_vertical, family(dy), (family(ya) + family(yb)) + axis_family(dx))


def distance_rows(kind: MetricKind, a, b, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Rowwise distances between broadcast stacks of points."""
    A = as_rows(a)
    B = as_rows(b)
    check_same_dim(A, B)
    A, B = np.broadcast_arrays(A, B)
    if kind.variant == RADIAL:
        return _radial_rows(A, B, tol)
    if kind.variant == PARAMETRIC_RADIAL:
        return _radial_rows(A, B, tol, kind.family)
    if kind.variant == RIVER:
        return _river_rows(A, B, tol)
    if kind.variant == PARAMETRIC_RIVER:
        return _river_rows(A, B, tol, kind.family, kind.axis_family)
    return np.linalg.norm(A - B, axis=1)


def _scalar_collinear(a, b, na, nb, tol: Tolerance) -> bool:
    # Same residual as collinear_rows, written out flat: scalar distance is
    # the hot path of the median and certification scans.
    if min(na, nb) <= tol.eps_abs:
        return True
    if na <= nb:
        short, n_short, longer = a, na, b
    else:
        short, n_short, longer = b, nb, a
    unit = short / n_short
    coeff = longer @ unit
    resid = float(np.linalg.norm(longer - coeff * unit))
    return resid <= tol.eps_abs + tol.eps_rel * (na + nb)


def distance(kind: MetricKind, a, b, tol: Tolerance = DEFAULT_TOL) -> float:
    """Distance between two points under the selected metric."""
    a = as_point(a)
    b = as_point(b)
    check_same_dim(a, b)
    variant = kind.variant
    if variant in (RADIAL, PARAMETRIC_RADIAL):
        na = float(np.linalg.norm(a))
        nb = float(np.linalg.norm(b))
        if _scalar_collinear(a, b, na, nb, tol):
            gap = float(np.linalg.norm(a - b))
            return gap if kind.family is None else float(kind.family(gap))
        if kind.family is None:
            return na + nb
        return float(kind.family(na)) + float(kind.family(nb))
    if variant in (RIVER, PARAMETRIC_RIVER):
        if a.shape[0] != 2:
            raise DimensionError("river metric requires dimension 2")
        dx = abs(a[0] - b[0])
        if dx <= tol.eps_abs + tol.eps_rel * (abs(a[0]) + abs(b[0])):
            dy = abs(a[1] - b[1])
            return float(dy) if kind.family is None else float(kind.family(dy))
        ya, yb = abs(a[1]), abs(b[1])
        if kind.family is None:
            return float((ya + yb) + dx)
        return float((kind.family(ya) + kind.family(yb)) + kind.axis_family(dx))
    return float(np.linalg.norm(a - b))


def radial_distance(a, b, tol: Tolerance = DEFAULT_TOL) -> float:
    """|a - b| when collinear through the origin, |a| + |b| otherwise."""
    return distance(MetricKind.radial(), a, b, tol)


def river_distance(a, b, tol: Tolerance = DEFAULT_TOL) -> float:
    """Vertical gap on a shared vertical, else |a2| + |a1 - b1| + |b2|."""
    return distance(MetricKind.river(), a, b, tol)


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric nonnegative matrix of pairwise distances with a zero diagonal."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        e = np.asarray(self.entries, dtype=float)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {e.shape}")
        if not np.array_equal(e, e.T):
            raise ValueError("distance matrix must be symmetric as stored")
        if np.any(np.diagonal(e) != 0.0):
            raise ValueError("distance matrix must have a zero diagonal")
        if np.any(e < 0.0):
            raise ValueError("distance matrix entries must be nonnegative")
        object.__setattr__(self, "entries", e)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def distance_matrix(kind: MetricKind, points, tol: Tolerance = DEFAULT_TOL) -> DistanceMatrix:
    """Pairwise distances over a point list; symmetric by construction."""
    P = as_rows(points)
    n = len(P)
    out = np.zeros((n, n))
    for i in range(n - 1):
        row = distance_rows(kind, P[i + 1 :], P[i], tol)
        out[i, i + 1 :] = row
        out[i + 1 :, i] = row
    return DistanceMatrix(out)


def segment_contains(kind: MetricKind, a, b, x, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Does x lie on the metric segment between a and b?"""
    dax = distance(kind, a, x, tol)
    dxb = distance(kind, x, b, tol)
    dab = distance(kind, a, b, tol)
    return dax + dxb - dab <= tol.band(dab)


class MedianError(ValueError):
    """The candidate common branch point fails its defining identities.

    For the two base tree metrics this signals a broken case analysis or a
    distance function that is not a tree metric.
    """

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


def _middle(u: float, v: float, w: float) -> float:
    return sorted((u, v, w))[1]


def _radial_median(a, b, c, dists, tol: Tolerance) -> np.ndarray:
    pts = (a, b, c)
    norms = [float(np.linalg.norm(p)) for p in pts]
    dab, dac, dbc = dists
    best_pair = None
    best_prod = -np.inf
    for (i, j), dij in (((0, 1), dab), ((0, 2), dac), ((1, 2), dbc)):
        prod = 0.5 * (norms[i] + norms[j] - dij)
        if prod > best_prod:
            best_prod = prod
            best_pair = (i, j)
    if best_prod <= tol.band(max(norms)):
        return np.zeros_like(a)
    i, j = best_pair
    ref = pts[i] if norms[i] >= norms[j] else pts[j]
    return best_prod * (ref / np.linalg.norm(ref))


def _river_median(a, b, c, tol: Tolerance) -> np.ndarray:
    xs = (float(a[0]), float(b[0]), float(c[0]))
    ys = (float(a[1]), float(b[1]), float(c[1]))

    def shared(i, j):
        return abs(xs[i] - xs[j]) <= tol.band(abs(xs[i]) + abs(xs[j]))

    sab, sac, sbc = shared(0, 1), shared(0, 2), shared(1, 2)
    count = int(sab) + int(sac) + int(sbc)
    if count >= 2:
        x0 = xs[0] if (sab or sac) else xs[1]
        return np.array([x0, _middle(*ys)])
    if sab:
        return np.array([xs[0], _middle(ys[0], ys[1], 0.0)])
    if sac:
        return np.array([xs[0], _middle(ys[0], ys[2], 0.0)])
    if sbc:
        return np.array([xs[1], _middle(ys[1], ys[2], 0.0)])
    return np.array([_middle(*xs), 0.0])


def _verify_median(kind, a, b, c, o, tol: Tolerance, dists) -> None:
    # Re-derivation guard: a wrong case split must surface here, not as a
    # silently wrong point.  Band gets 10x headroom over the predicate band
    # so inputs sitting exactly on a branch boundary do not false-alarm.
    dab, dac, dbc = dists
    band = 10.0 * tol.band(max(dab, dac, dbc))
    da = distance(kind, a, o, tol)
    db = distance(kind, b, o, tol)
    dc = distance(kind, c, o, tol)
    worst = max(
        abs(da - 0.5 * (dab + dac - dbc)),
        abs(db - 0.5 * (dab + dbc - dac)),
        abs(dc - 0.5 * (dac + dbc - dab)),
        da + db - dab,
        da + dc - dac,
        db + dc - dbc,
    )
    if worst > band:
        raise MedianError(
            f"median identities fail by {worst:.3e} (band {band:.3e})", residual=worst
        )


def _gromov_median_prepared(kind, a, b, c, tol: Tolerance, dists) -> np.ndarray:
    if dists is None:
        dists = (
            distance(kind, a, b, tol),
            distance(kind, a, c, tol),
            distance(kind, b, c, tol),
        )
    if kind.variant == RADIAL:
        o = _radial_median(a, b, c, dists, tol)
    elif kind.variant == RIVER:
        if a.shape[0] != 2:
            raise DimensionError("river metric requires dimension 2")
        o = _river_median(a, b, c, tol)
    else:
        raise ValueError("closed-form medians exist for the radial and river kinds only")
    _verify_median(kind, a, b, c, o, tol, dists)
    return o


def gromov_median(kind: MetricKind, a, b, c, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Common point of the three metric segments of a triple.

    Closed forms exist for the radial and river base metrics; the returned
    point is always re-verified against the three half-perimeter identities
    and the three segment memberships before being handed back.
    """
    a = as_point(a)
    b = as_point(b)
    c = as_point(c)
    check_same_dim(a, b)
    check_same_dim(a, c)
    return _gromov_median_prepared(kind, a, b, c, tol, None)
