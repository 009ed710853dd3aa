"""CSV formats: point sets, distance matrices, sample batches, grids, config.

Floats are written with ``repr`` (shortest round-trip form), so re-running
a command with the same inputs produces byte-identical files.
"""

from __future__ import annotations

import csv

import numpy as np

from .field import SampleBatch
from .geometry import DEFAULT_TOL, InvalidPoint, Tolerance
from .metrics import DistanceMatrix

__all__ = [
    "CsvFormatError",
    "read_config",
    "read_matrix_csv",
    "read_points_csv",
    "write_grid_csv",
    "write_matrix_csv",
    "write_points_csv",
    "write_samples_csv",
]


class CsvFormatError(ValueError):
    """Malformed input file (bad header, ragged row, non-numeric cell)."""


def _fmt(value: float) -> str:
    return repr(float(value))


def read_points_csv(path) -> np.ndarray:
    """Points file: header ``x1,...,xn``, one point per row."""
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if any(cell.strip() for cell in row)]
    if not rows:
        raise CsvFormatError(f"{path}: empty points file")
    header = [cell.strip() for cell in rows[0]]
    if header != [f"x{i + 1}" for i in range(len(header))]:
        raise CsvFormatError(f"{path}: header must be x1,...,xn, got {header}")
    if len(rows) == 1:
        raise CsvFormatError(f"{path}: no data rows")
    dim = len(header)
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != dim:
            raise CsvFormatError(f"{path}:{lineno}: expected {dim} columns, got {len(row)}")
        try:
            data.append([float(cell) for cell in row])
        except ValueError as exc:
            raise CsvFormatError(f"{path}:{lineno}: {exc}") from exc
    points = np.array(data)
    if not np.all(np.isfinite(points)):
        raise InvalidPoint(f"{path}: coordinates must be finite")
    return points


def write_points_csv(path, points) -> None:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(points.shape[1])])
        for row in points:
            writer.writerow([_fmt(v) for v in row])


def read_matrix_csv(path, tol: Tolerance = DEFAULT_TOL) -> DistanceMatrix:
    """Headerless n x n distance matrix; symmetry enforced within eps_abs."""
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if any(cell.strip() for cell in row)]
    if not rows:
        raise CsvFormatError(f"{path}: empty matrix file")
    try:
        m = np.array([[float(cell) for cell in row] for row in rows])
    except ValueError as exc:
        raise CsvFormatError(f"{path}: {exc}") from exc
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise CsvFormatError(f"{path}: expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise CsvFormatError(f"{path}: entries must be finite")
    if float(np.max(np.abs(m - m.T), initial=0.0)) > tol.eps_abs:
        raise CsvFormatError(f"{path}: matrix is not symmetric within {tol.eps_abs}")
    if float(np.max(np.abs(np.diagonal(m)), initial=0.0)) > tol.eps_abs:
        raise CsvFormatError(f"{path}: diagonal is not zero within {tol.eps_abs}")
    m = 0.5 * (m + m.T)
    np.fill_diagonal(m, 0.0)
    return DistanceMatrix(np.abs(m))


def write_matrix_csv(path, entries) -> None:
    entries = np.asarray(entries, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in entries:
            writer.writerow([_fmt(v) for v in row])


def write_samples_csv(path, batch: SampleBatch) -> None:
    """Long format: one row per (replicate, point) pair."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rep", "point_index", "value"])
        for rep in range(batch.reps):
            for j in range(batch.values.shape[1]):
                writer.writerow([rep, j, _fmt(batch.values[rep, j])])


def write_grid_csv(path, xs, ys, codes) -> None:
    """Membership mask rows ``x,y,member`` with member one of 0, 1, S."""
    symbol = {0: "0", 1: "1", 2: "S"}
    codes = np.asarray(codes)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "member"])
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                writer.writerow([_fmt(x), _fmt(y), symbol[int(codes[i, j])]])


def read_config(path) -> dict[str, str]:
    """Flat ``key = value`` file; blank lines and # comments ignored."""
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise CsvFormatError(f"{path}:{lineno}: expected key = value")
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out
