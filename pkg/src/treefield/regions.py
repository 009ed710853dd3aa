"""Beyond-point sets: where does a geodesic to p1 pass through p2?

For a pair (p1, p2) the beyond set collects every x whose distance to p1
splits additively through p2, i.e. d(x, p1) = d(x, p2) + d(p1, p2).  For
the radial and river metrics these sets have closed-form descriptors
(sub-rays, complements of sub-rays, half-planes); membership by the
defining identity and membership by descriptor must agree, and the
equivalence scan here is the falsifiable form of that statement for
profiled metrics under identification testing.

Boundary semantics: descriptors are closed on the side that must contain
p2; probes within a small multiple of the tolerance band of a descriptor
boundary are classified as boundary and skipped by scans, because float
rounding makes the two membership routes legitimately disagree there.
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
    same_ray_rows,
)
from .metrics import MetricKind, distance, distance_rows

__all__ = [
    "BOUNDARY",
    "BOUNDARY_FACTOR",
    "COMPLEMENT_ABOVE",
    "COMPLEMENT_BEYOND",
    "FitError",
    "HALF_PLANE",
    "INSIDE",
    "MismatchRecord",
    "OUTSIDE",
    "RAY_FROM",
    "RadialRegion",
    "RiverRegion",
    "VERTICAL_RAY_FROM",
    "WHOLE_SPACE",
    "beyond_member",
    "beyond_member_rows",
    "cauchy_fit",
    "closed_form_region",
    "radial_region",
    "region_classify_rows",
    "region_contains",
    "region_equivalence_scan",
    "river_region",
]

RAY_FROM = "ray-from"
COMPLEMENT_BEYOND = "complement-beyond"
COMPLEMENT_ABOVE = "complement-above"
VERTICAL_RAY_FROM = "vertical-ray-from"
HALF_PLANE = "half-plane"
WHOLE_SPACE = "whole-space"

OUTSIDE = 0
INSIDE = 1
BOUNDARY = 2

# Probes closer than BOUNDARY_FACTOR * band to a descriptor boundary are
# skipped by scans rather than compared.
BOUNDARY_FACTOR = 10.0


@dataclass(frozen=True, eq=False)
class RadialRegion:
    """Closed-form beyond set for the radial metric.

    ray-from:          {t*u : t >= radius}, the closed sub-ray from p2 outward.
    complement-beyond: R^n minus the open sub-ray {t*u : t > radius} on p1's ray.
    whole-space:       everything (degenerate pair).
    """

    variant: str
    direction: np.ndarray | None = None
    radius: float = 0.0

    def __post_init__(self) -> None:
        if self.variant not in (RAY_FROM, COMPLEMENT_BEYOND, WHOLE_SPACE):
            raise ValueError(f"unknown radial region variant {self.variant!r}")
        if self.variant != WHOLE_SPACE:
            if self.direction is None:
                raise ValueError(f"{self.variant} needs a carrying ray direction")
            if self.variant == RAY_FROM and self.radius <= 0.0:
                raise ValueError("ray-from requires p2 away from the origin")


@dataclass(frozen=True, eq=False)
class RiverRegion:
    """Closed-form beyond set for the river metric.

    complement-above:  R^2 minus the open vertical ray strictly beyond (x, y)
                       away from the axis (side = sign of p1's second coord).
    vertical-ray-from: closed vertical ray from (x, y) away from the axis.
    half-plane:        {x' : side * (x' - x) >= 0} x R.
    whole-space:       everything.
    """

    variant: str
    x: float = 0.0
    y: float = 0.0
    side: float = 0.0

    def __post_init__(self) -> None:
        if self.variant not in (COMPLEMENT_ABOVE, VERTICAL_RAY_FROM, HALF_PLANE, WHOLE_SPACE):
            raise ValueError(f"unknown river region variant {self.variant!r}")
        if self.variant != WHOLE_SPACE and self.side not in (-1.0, 1.0):
            raise ValueError(f"{self.variant} needs side in {{-1, +1}}")


def radial_region(p1, p2, tol: Tolerance = DEFAULT_TOL) -> RadialRegion:
    """Descriptor of the radial beyond set for (p1, p2)."""
    p1 = as_point(p1)
    p2 = as_point(p2)
    check_same_dim(p1, p2)
    n1 = float(np.linalg.norm(p1))
    n2 = float(np.linalg.norm(p2))
    if float(np.linalg.norm(p1 - p2)) <= tol.band(n1 + n2):
        return RadialRegion(WHOLE_SPACE)
    if bool(same_ray_rows(p1, p2, tol)[0]) and n2 <= n1:
        # p2 sits on the closed-open segment from the origin toward p1.
        return RadialRegion(COMPLEMENT_BEYOND, direction=p1 / n1, radius=n2)
    return RadialRegion(RAY_FROM, direction=p2 / n2, radius=n2)


def river_region(p1, p2, tol: Tolerance = DEFAULT_TOL) -> RiverRegion:
    """Descriptor of the river beyond set for (p1, p2)."""
    p1 = as_point(p1)
    p2 = as_point(p2)
    if p1.shape[0] != 2 or p2.shape[0] != 2:
        raise DimensionError("river regions require dimension 2")
    x1, y1 = float(p1[0]), float(p1[1])
    x2, y2 = float(p2[0]), float(p2[1])
    if float(np.linalg.norm(p1 - p2)) <= tol.band(abs(x1) + abs(y1) + abs(x2) + abs(y2)):
        return RiverRegion(WHOLE_SPACE)
    same_vertical = abs(x1 - x2) <= tol.band(abs(x1) + abs(x2))
    y_band = tol.band(abs(y1) + abs(y2))
    if same_vertical and abs(y1) > y_band:
        side = 1.0 if y1 > 0 else -1.0
        if side * y2 >= -y_band and side * y2 < side * y1:
            # p2 on the signed segment from p1's projection toward p1.
            return RiverRegion(COMPLEMENT_ABOVE, x=x1, y=y2, side=side)
    if abs(y2) > y_band:
        return RiverRegion(VERTICAL_RAY_FROM, x=x2, y=y2, side=1.0 if y2 > 0 else -1.0)
    return RiverRegion(HALF_PLANE, x=x2, y=0.0, side=1.0 if x2 > x1 else -1.0)


def closed_form_region(kind: MetricKind, p1, p2, tol: Tolerance = DEFAULT_TOL):
    """Descriptor of the base tree metric matching the kind's branch structure."""
    if kind.radial_structured:
        return radial_region(p1, p2, tol)
    if kind.river_structured:
        return river_region(p1, p2, tol)
    raise ValueError(f"no closed-form beyond set for kind {kind.label()!r}")


def _radial_membership(region: RadialRegion, X: np.ndarray, tol: Tolerance):
    """Returns (member mask, Euclidean distance to the descriptor boundary)."""
    m = X.shape[0]
    if region.variant == WHOLE_SPACE:
        return np.ones(m, dtype=bool), np.full(m, np.inf)
    u = region.direction
    if X.shape[1] != u.shape[0]:
        raise DimensionError(f"dimension mismatch: {X.shape[1]} vs {u.shape[0]}")
    norms = np.linalg.norm(X, axis=1)
    band = tol.eps_abs + tol.eps_rel * (norms + region.radius)
    on_ray = same_ray_rows(X, u[None, :], tol)
    proj = np.clip(X @ u, region.radius, None)
    boundary_dist = np.linalg.norm(X - proj[:, None] * u, axis=1)
    if region.variant == RAY_FROM:
        member = on_ray & (norms >= region.radius - band)
    else:
        member = ~(on_ray & (norms > region.radius + band))
    return member, boundary_dist


def _river_membership(region: RiverRegion, X: np.ndarray, tol: Tolerance):
    m = X.shape[0]
    if X.shape[1] != 2:
        raise DimensionError("river regions require dimension 2")
    if region.variant == WHOLE_SPACE:
        return np.ones(m, dtype=bool), np.full(m, np.inf)
    x0, y0, s = region.x, region.y, region.side
    band_x = tol.eps_abs + tol.eps_rel * (np.abs(X[:, 0]) + abs(x0))
    if region.variant == HALF_PLANE:
        member = s * (X[:, 0] - x0) >= -band_x
        return member, np.abs(X[:, 0] - x0)
    band_y = tol.eps_abs + tol.eps_rel * (np.abs(X[:, 1]) + abs(y0))
    on_vertical = np.abs(X[:, 0] - x0) <= band_x
    foot_y = np.where(s * X[:, 1] >= s * y0, X[:, 1], y0)
    boundary_dist = np.hypot(X[:, 0] - x0, X[:, 1] - foot_y)
    if region.variant == VERTICAL_RAY_FROM:
        member = on_vertical & (s * X[:, 1] >= s * y0 - band_y)
    else:
        member = ~(on_vertical & (s * X[:, 1] > s * y0 + band_y))
    return member, boundary_dist


def _membership(region, X: np.ndarray, tol: Tolerance):
    if isinstance(region, RadialRegion):
        return _radial_membership(region, X, tol)
    if isinstance(region, RiverRegion):
        return _river_membership(region, X, tol)
    raise TypeError(f"not a region descriptor: {region!r}")


def region_contains(region, x, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Geometric membership, closed boundaries winning inside the band."""
    member, _ = _membership(region, as_rows(as_point(x)), tol)
    return bool(member[0])


def region_classify_rows(region, probes, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Classify probes as OUTSIDE / INSIDE / BOUNDARY against a descriptor.

    BOUNDARY marks probes within ``BOUNDARY_FACTOR`` tolerance bands of the
    descriptor's topological boundary; scans skip them.
    """
    X = as_rows(probes)
    member, boundary_dist = _membership(region, X, tol)
    scale = np.linalg.norm(X, axis=1) + _region_scale(region)
    skip = boundary_dist <= BOUNDARY_FACTOR * (tol.eps_abs + tol.eps_rel * scale)
    out = np.where(member, INSIDE, OUTSIDE)
    out[skip] = BOUNDARY
    return out


def _region_scale(region) -> float:
    if isinstance(region, RadialRegion):
        return abs(region.radius)
    return abs(region.x) + abs(region.y)


def beyond_member_rows(kind: MetricKind, p1, p2, probes, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Rowwise membership by the defining identity d(x,p1) = d(x,p2) + d(p1,p2)."""
    X = as_rows(probes)
    d_xp1 = distance_rows(kind, X, p1, tol)
    d_xp2 = distance_rows(kind, X, p2, tol)
    d_12 = distance(kind, p1, p2, tol)
    return np.abs(d_xp1 - d_xp2 - d_12) <= tol.eps_abs + tol.eps_rel * d_xp1


def beyond_member(kind: MetricKind, p1, p2, x, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Does the geodesic from x to p1 pass through p2, by the metric identity?"""
    return bool(beyond_member_rows(kind, p1, p2, as_point(x), tol)[0])


@dataclass(frozen=True, eq=False)
class MismatchRecord:
    """One probe where definition membership and descriptor membership differ."""

    p1: np.ndarray
    p2: np.ndarray
    x: np.ndarray
    def_member: bool
    region_member: bool

    def __post_init__(self) -> None:
        if self.def_member == self.region_member:
            raise ValueError("not a mismatch: both membership routes agree")


def region_equivalence_scan(
    kind: MetricKind, pairs, probes, tol: Tolerance = DEFAULT_TOL
) -> list[MismatchRecord]:
    """Compare definition membership under ``kind`` with the closed forms.

    Returns one record per (pair, probe) disagreement, in scan order;
    probes inside the boundary band are skipped, not reported.  An empty
    list over a rich probe set is the working certificate that ``kind``'s
    beyond sets coincide with the base tree metric's.
    """
    X = as_rows(probes)
    records: list[MismatchRecord] = []
    for raw1, raw2 in pairs:
        p1 = as_point(raw1)
        p2 = as_point(raw2)
        region = closed_form_region(kind, p1, p2, tol)
        codes = region_classify_rows(region, X, tol)
        by_def = beyond_member_rows(kind, p1, p2, X, tol)
        live = codes != BOUNDARY
        disagree = live & (by_def != (codes == INSIDE))
        for idx in np.nonzero(disagree)[0]:
            records.append(
                MismatchRecord(
                    p1=p1,
                    p2=p2,
                    x=X[idx].copy(),
                    def_member=bool(by_def[idx]),
                    region_member=bool(codes[idx] == INSIDE),
                )
            )
    return records


class FitError(ValueError):
    """Samples unusable for a slope fit (too few, nonpositive or constant u)."""


def cauchy_fit(samples) -> tuple[float, float]:
    """Least-squares slope through the origin and its worst absolute residual.

    A profile that turns segment additivity into additivity of its values
    must be linear; callers accept linearity when the residual is within
    their tolerance and read the slope as the normalization constant.
    """
    pts = [(float(u), float(v)) for u, v in samples]
    if len(pts) < 2:
        raise FitError("need at least two samples")
    u = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    if np.any(u <= 0.0):
        raise FitError("sample arguments must be positive")
    if np.all(u == u[0]):
        raise FitError("sample arguments must not all coincide")
    c = float((u @ v) / (u @ u))
    return c, float(np.max(np.abs(v - c * u)))
