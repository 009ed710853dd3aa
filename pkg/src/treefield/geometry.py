"""Point handling and ray predicates for metrics that branch at the origin.

Every tolerance-sensitive branch decision in the package funnels through
``Tolerance.band``, so the geometry predicates here are the single source
of truth for "same ray" questions asked by the metrics, the region
descriptors and the simulation planners.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DEFAULT_TOL",
    "DimensionError",
    "InvalidPoint",
    "RayPoint",
    "Tolerance",
    "as_point",
    "collinear_rows",
    "collinear_through_origin",
    "same_directed_ray",
    "same_ray_rows",
    "to_ray_point",
]


class InvalidPoint(ValueError):
    """A coordinate vector is malformed (wrong shape, NaN or infinite)."""


class DimensionError(ValueError):
    """Operands live in different dimensions, or in an unsupported one."""


@dataclass(frozen=True)
class Tolerance:
    """Absolute-plus-relative comparison band.

    ``band(scale)`` is the slack allowed when comparing quantities of the
    given magnitude.  Predicates take the tolerance explicitly so tests
    can tighten or widen it per call.
    """

    eps_abs: float = 1e-9
    eps_rel: float = 1e-9

    def __post_init__(self) -> None:
        for name in ("eps_abs", "eps_rel"):
            value = getattr(self, name)
            if not (0.0 < value <= 1e-3):
                raise ValueError(f"{name} must lie in (0, 1e-3], got {value}")

    def band(self, scale: float = 0.0) -> float:
        return self.eps_abs + self.eps_rel * abs(scale)


DEFAULT_TOL = Tolerance()


def as_point(p) -> np.ndarray:
    """Validate and convert to a finite float64 coordinate vector."""
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidPoint(f"expected a non-empty coordinate vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidPoint("coordinates must be finite")
    return arr


def as_rows(points) -> np.ndarray:
    """Coerce a point or a stack of points into an (m, n) float array."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] == 0:
        raise InvalidPoint(f"expected points of shape (m, n), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidPoint("coordinates must be finite")
    return arr


def check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[-1] != b.shape[-1]:
        raise DimensionError(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")


@dataclass(frozen=True, eq=False)
class RayPoint:
    """Polar form of a point: unit ``direction`` (None at the origin) and ``radius``."""

    direction: np.ndarray | None
    radius: float

    def to_point(self, dim: int | None = None) -> np.ndarray:
        if self.direction is None:
            if dim is None:
                raise InvalidPoint("an origin RayPoint needs an explicit dimension")
            return np.zeros(dim)
        return self.radius * self.direction


def to_ray_point(p, tol: Tolerance = DEFAULT_TOL) -> RayPoint:
    """Polar decomposition; radii at or below the absolute band count as the origin."""
    arr = as_point(p)
    radius = float(np.linalg.norm(arr))
    if radius <= tol.eps_abs:
        return RayPoint(direction=None, radius=radius)
    return RayPoint(direction=arr / radius, radius=radius)


def collinear_rows(a, b, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Rowwise test that a and b lie on one straight line through the origin.

    The residual is the component of the longer vector orthogonal to the
    shorter one, compared against ``eps_abs + eps_rel * (|a| + |b|)``.
    Rows where either vector is inside the absolute band are collinear by
    convention (the origin sits on every ray).
    """
    A = as_rows(a)
    B = as_rows(b)
    check_same_dim(A, B)
    A, B = np.broadcast_arrays(A, B)
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    short_is_a = na <= nb
    short = np.where(short_is_a[:, None], A, B)
    longer = np.where(short_is_a[:, None], B, A)
    n_short = np.where(short_is_a, na, nb)

    result = np.ones(A.shape[0], dtype=bool)
    live = n_short > tol.eps_abs
    if np.any(live):
        unit = short[live] / n_short[live, None]
        coeff = np.einsum("ij,ij->i", longer[live], unit)
        resid = np.linalg.norm(longer[live] - coeff[:, None] * unit, axis=1)
        result[live] = resid <= tol.eps_abs + tol.eps_rel * (na[live] + nb[live])
    return result


def same_ray_rows(a, b, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Rowwise test for membership of one closed directed ray from the origin."""
    A = as_rows(a)
    B = as_rows(b)
    check_same_dim(A, B)
    A, B = np.broadcast_arrays(A, B)
    mask = collinear_rows(A, B, tol)
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    either_origin = (na <= tol.eps_abs) | (nb <= tol.eps_abs)
    nonneg = np.einsum("ij,ij->i", A, B) >= 0.0
    return mask & (either_origin | nonneg)


def collinear_through_origin(a, b, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Is ``a = s * b`` for some real s (or b = 0), within the band?"""
    return bool(collinear_rows(as_point(a), as_point(b), tol)[0])


def same_directed_ray(a, b, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Collinear through the origin with nonnegative inner product."""
    return bool(same_ray_rows(as_point(a), as_point(b), tol)[0])
