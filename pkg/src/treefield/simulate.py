"""Increment-based simulators for the radial and river tree fields.

Both simulators draw one independent Gaussian increment per edge of a
rooted plan and realize field values as signed sums along root paths, so
the induced covariance is available in closed form and can be compared
entrywise against the covariance model — a deterministic correctness
check that needs no sampling.

Radial plan: points are grouped by directed ray and ordered by radius;
within a group the value at a point is the prefix sum of the group's
increments, and distinct groups are independent.

River plan: the point set is first closed under the origin and the river
projections of every vertical, then spanned by a rooted tree of axis
edges (oriented away from the origin) and vertical edges (oriented away
from the axis).  With that orientation every root path uses its edges
positively; the orientation signs are still carried per path entry so a
corrupted plan shows up in verification rather than silently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import CovMatrix, SampleBatch, field_generator
from .geometry import DEFAULT_TOL, DimensionError, Tolerance, as_rows, same_ray_rows
from .metrics import MetricKind, distance_rows

__all__ = [
    "NotLabelled",
    "NotOrdered",
    "RadialPlan",
    "RiverPlan",
    "induced_covariance_radial",
    "induced_covariance_river",
    "radial_plan",
    "river_closure",
    "river_plan",
    "simulate_radial",
    "simulate_river",
]


class NotLabelled(ValueError):
    """A river point list misses the origin or a required axis projection."""


class NotOrdered(ValueError):
    """A river point list is not sorted by vertical then height."""


@dataclass(frozen=True, eq=False)
class RadialPlan:
    """Simulation order and increment variances for the radial field.

    ``sigma[k]`` is the input index simulated at slot k; slots are grouped
    by directed ray with radii nondecreasing inside each group.  The head
    slot of a group carries the distance from the origin, later slots the
    distance to their predecessor.
    """

    points: np.ndarray
    sigma: np.ndarray
    group_sizes: tuple[int, ...]
    variances: np.ndarray


@dataclass(frozen=True, eq=False)
class RiverPlan:
    """Rooted spanning tree over a labelled river point set.

    ``edges[e] = (tail, head)`` indexes into ``labelled``; ``variances[e]``
    is the river distance between the endpoints.  ``root_paths[k]`` lists
    (edge index, orientation sign) pairs realizing the geodesic from the
    origin to point k; the away-from-root orientation makes every sign +1.
    """

    labelled: np.ndarray
    edges: tuple[tuple[int, int], ...]
    variances: np.ndarray
    root_paths: tuple[tuple[tuple[int, int], ...], ...]

    def incidence(self) -> np.ndarray:
        """Signed point-by-edge matrix M with values = Z @ M.T."""
        M = np.zeros((len(self.labelled), len(self.edges)))
        for k, path in enumerate(self.root_paths):
            for edge_index, sign in path:
                M[k, edge_index] = sign
        return M


def radial_plan(points, tol: Tolerance = DEFAULT_TOL) -> RadialPlan:
    """Group planar points by directed ray and order each group by radius."""
    P = as_rows(points)
    if P.shape[1] != 2:
        raise DimensionError("radial plans use planar points")
    n = len(P)
    radii = np.linalg.norm(P, axis=1)

    origin_members = [i for i in range(n) if radii[i] <= tol.eps_abs]
    rep_indices: list[int] = []
    members: list[list[int]] = []
    for idx in range(n):
        if radii[idx] <= tol.eps_abs:
            continue
        for g, rep in enumerate(rep_indices):
            if bool(same_ray_rows(P[idx], P[rep], tol)[0]):
                members[g].append(idx)
                break
        else:
            rep_indices.append(idx)
            members.append([idx])

    def group_angle(rep: int) -> float:
        return float(np.arctan2(P[rep, 1], P[rep, 0]) % (2.0 * np.pi))

    order = sorted(range(len(members)), key=lambda g: (group_angle(rep_indices[g]), members[g][0]))
    groups: list[list[int]] = []
    if origin_members:
        groups.append(origin_members)
    for g in order:
        groups.append(sorted(members[g], key=lambda i: (radii[i], i)))

    sigma = np.array([i for grp in groups for i in grp], dtype=np.intp)
    variances = np.empty(n)
    kind = MetricKind.radial()
    pos = 0
    for grp in groups:
        variances[pos] = radii[grp[0]]
        if len(grp) > 1:
            variances[pos + 1 : pos + len(grp)] = distance_rows(kind, P[grp[1:]], P[grp[:-1]], tol)
        pos += len(grp)
    return RadialPlan(
        points=P,
        sigma=sigma,
        group_sizes=tuple(len(g) for g in groups),
        variances=variances,
    )


def simulate_radial(plan: RadialPlan, seed: int, reps: int) -> SampleBatch:
    """Prefix-sum simulation; values come back in input point order."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    n = len(plan.sigma)
    z = field_generator(seed).standard_normal((int(reps), n)) * np.sqrt(plan.variances)
    acc = np.empty_like(z)
    pos = 0
    for size in plan.group_sizes:
        acc[:, pos : pos + size] = np.cumsum(z[:, pos : pos + size], axis=1)
        pos += size
    values = np.empty_like(acc)
    values[:, plan.sigma] = acc
    return SampleBatch(seed=int(seed), reps=int(reps), values=values, points=plan.points)


def induced_covariance_radial(plan: RadialPlan) -> CovMatrix:
    """Covariance the radial simulator actually realizes, exactly over the plan."""
    n = len(plan.sigma)
    C = np.zeros((n, n))
    pos = 0
    for size in plan.group_sizes:
        idx = plan.sigma[pos : pos + size]
        prefix = np.cumsum(plan.variances[pos : pos + size])
        block = prefix[np.minimum.outer(np.arange(size), np.arange(size))]
        C[np.ix_(idx, idx)] = block
        pos += size
    return CovMatrix(entries=C, root=np.zeros(plan.points.shape[1]), points=plan.points)


def _cluster(values: np.ndarray, tol: Tolerance) -> list[list[int]]:
    """Group sorted positions whose consecutive gaps stay inside the band."""
    order = np.argsort(values, kind="stable")
    clusters: list[list[int]] = []
    for pos in order:
        if clusters:
            prev = values[clusters[-1][-1]]
            if values[pos] - prev <= tol.band(abs(values[pos]) + abs(prev)):
                clusters[-1].append(int(pos))
                continue
        clusters.append([int(pos)])
    return clusters


def river_closure(points, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Close a planar point set under the origin and all river projections.

    Output contains the inputs, (0, 0) and one (x, 0) per distinct
    vertical, deduplicated within the band and sorted by vertical then
    height — the labelling the river planner requires.
    """
    P = as_rows(points)
    if P.shape[1] != 2:
        raise DimensionError("river closure requires dimension 2")
    xs = np.concatenate([P[:, 0], [0.0]])
    labelled: list[tuple[float, float]] = []
    for x_cluster in _cluster(xs, tol):
        vals = xs[x_cluster]
        x_rep = 0.0 if np.any(vals == 0.0) else float(vals[0])
        ys = [0.0]
        for i in x_cluster:
            if i < len(P):
                ys.append(float(P[i, 1]))
        ys_arr = np.asarray(ys)
        for y_cluster in _cluster(ys_arr, tol):
            yvals = ys_arr[y_cluster]
            y_rep = 0.0 if np.any(yvals == 0.0) else float(yvals[0])
            labelled.append((x_rep, y_rep))
    labelled.sort()
    return np.array(labelled)


def _vertical_clusters(L: np.ndarray, tol: Tolerance) -> list[list[int]]:
    """Split an ordered labelled list into runs sharing a vertical."""
    clusters: list[list[int]] = [[0]]
    for i in range(1, len(L)):
        prev = L[clusters[-1][0], 0]
        if abs(L[i, 0] - prev) <= tol.band(abs(L[i, 0]) + abs(prev)):
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters


def river_plan(labelled, tol: Tolerance = DEFAULT_TOL) -> RiverPlan:
    """Build the rooted edge tree over a labelled river point set.

    Validates the labelling precondition: the list must be sorted by
    (vertical, height), contain (0, 0), and contain the axis projection of
    every vertical.  Axis edges point away from the origin, vertical edges
    away from the axis.
    """
    L = as_rows(labelled)
    if L.shape[1] != 2:
        raise DimensionError("river plans use planar points")
    n = len(L)

    for i in range(1, n):
        dx = L[i, 0] - L[i - 1, 0]
        if dx < -tol.band(abs(L[i, 0]) + abs(L[i - 1, 0])):
            raise NotOrdered(f"verticals out of order at position {i}")
        same_vertical = abs(dx) <= tol.band(abs(L[i, 0]) + abs(L[i - 1, 0]))
        if same_vertical and L[i, 1] < L[i - 1, 1] - tol.band(abs(L[i, 1]) + abs(L[i - 1, 1])):
            raise NotOrdered(f"heights out of order at position {i}")

    clusters = _vertical_clusters(L, tol)
    axis_of: list[int] = []
    for cluster in clusters:
        hits = [i for i in cluster if abs(L[i, 1]) <= tol.band(abs(L[i, 0]))]
        if not hits:
            raise NotLabelled(f"missing axis projection for vertical x={L[cluster[0], 0]!r}")
        axis_of.append(hits[0])
    origin_cluster = None
    for c, cluster in enumerate(clusters):
        if abs(L[axis_of[c], 0]) <= tol.eps_abs:
            origin_cluster = c
            break
    if origin_cluster is None:
        raise NotLabelled("missing origin (0, 0)")

    parent = np.full(n, -1, dtype=np.intp)
    # Axis chain: verticals left of the origin hang off their right
    # neighbour, verticals right of it off their left neighbour.
    for c in range(len(clusters)):
        if c < origin_cluster:
            parent[axis_of[c]] = axis_of[c + 1]
        elif c > origin_cluster:
            parent[axis_of[c]] = axis_of[c - 1]
    # Vertical chains: consecutive points move away from the axis point.
    for c, cluster in enumerate(clusters):
        axis_pos = cluster.index(axis_of[c])
        for chain in (list(reversed(cluster[:axis_pos])), cluster[axis_pos + 1 :]):
            prev = axis_of[c]
            for i in chain:
                parent[i] = prev
                prev = i

    root = axis_of[origin_cluster]
    edges: list[tuple[int, int]] = []
    edge_of: dict[int, int] = {}
    for i in range(n):
        if i == root:
            continue
        edge_of[i] = len(edges)
        edges.append((int(parent[i]), i))
    kind = MetricKind.river()
    if edges:
        tails = L[[t for t, _ in edges]]
        heads = L[[h for _, h in edges]]
        variances = distance_rows(kind, heads, tails, tol)
    else:
        variances = np.zeros(0)

    paths: dict[int, tuple[tuple[int, int], ...]] = {root: ()}

    def path_of(i: int) -> tuple[tuple[int, int], ...]:
        if i not in paths:
            paths[i] = path_of(int(parent[i])) + ((edge_of[i], 1),)
        return paths[i]

    return RiverPlan(
        labelled=L,
        edges=tuple(edges),
        variances=np.asarray(variances, dtype=float),
        root_paths=tuple(path_of(i) for i in range(n)),
    )


def simulate_river(plan: RiverPlan, seed: int, reps: int) -> SampleBatch:
    """One increment per edge; values are signed sums along root paths."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    m = len(plan.edges)
    z = field_generator(seed).standard_normal((int(reps), m)) * np.sqrt(plan.variances)
    values = z @ plan.incidence().T
    return SampleBatch(seed=int(seed), reps=int(reps), values=values, points=plan.labelled)


def induced_covariance_river(plan: RiverPlan) -> CovMatrix:
    """Covariance the river simulator realizes: signed edge overlap of root paths."""
    M = plan.incidence()
    C = (M * plan.variances) @ M.T
    C = 0.5 * (C + C.T)
    return CovMatrix(entries=C, root=np.zeros(2), points=plan.labelled)
