"""Command-line surface.

Subcommands: ``metric eval``, ``check``, ``cdset grid``, ``simulate``,
``verify``, ``identify``.  Exit codes: 0 all checks pass, 1 a verification
failed, 2 input or configuration error.  Settings resolve in the order
defaults < config file < environment (TREEFIELD_SEED / TREEFIELD_TOL) <
command-line flags.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

import numpy as np

from .geometry import DEFAULT_TOL, DimensionError, InvalidPoint, Tolerance
from .io import (
    CsvFormatError,
    read_config,
    read_matrix_csv,
    read_points_csv,
    write_grid_csv,
    write_matrix_csv,
    write_points_csv,
    write_samples_csv,
)
from .metrics import (
    EUCLIDEAN,
    RADIAL,
    RIVER,
    LinearFamily,
    MetricKind,
    PowerFamily,
    distance_matrix,
)
from .regions import (
    BOUNDARY,
    INSIDE,
    cauchy_fit,
    closed_form_region,
    region_classify_rows,
    beyond_member_rows,
    region_equivalence_scan,
)
from .simulate import radial_plan, river_closure, river_plan, simulate_radial, simulate_river
from .tree_checks import check_condition_b, is_tree_metric, ultrametric_violation
from .verify import FAIL, run_verify_suite

ENV_PREFIX = "TREEFIELD_"
MAX_EXHAUSTIVE_POINTS = 64
DEFAULT_GRID = (-10.0, 10.0, -10.0, 10.0, 50, 50)


class CliInputError(ValueError):
    """Bad command-line input; mapped to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    kind: MetricKind | None
    tol: Tolerance
    seed: int
    reps: int
    grid: tuple[float, float, float, float, int, int]

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise CliInputError("seed must be nonnegative")
        if self.reps < 1:
            raise CliInputError("reps must be >= 1")
        xmin, xmax, ymin, ymax, nx, ny = self.grid
        if not all(np.isfinite(v) for v in (xmin, xmax, ymin, ymax)):
            raise CliInputError("grid extents must be finite")
        if not (xmin < xmax and ymin < ymax):
            raise CliInputError("grid extents must satisfy min < max")
        if nx < 2 or ny < 2:
            raise CliInputError("grid resolution must be >= 2 per axis")


def _parse_metric(name: str) -> MetricKind:
    table = {RADIAL: MetricKind.radial, RIVER: MetricKind.river, EUCLIDEAN: MetricKind.euclidean}
    if name not in table:
        raise CliInputError(f"unknown metric {name!r} (choose from {sorted(table)})")
    return table[name]()


def _parse_grid(text: str) -> tuple[float, float, float, float, int, int]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 6:
        raise CliInputError("grid must be xmin,xmax,ymin,ymax,nx,ny")
    try:
        return (
            float(parts[0]),
            float(parts[1]),
            float(parts[2]),
            float(parts[3]),
            int(parts[4]),
            int(parts[5]),
        )
    except ValueError as exc:
        raise CliInputError(f"bad grid specification: {exc}") from exc


def _parse_point(text: str) -> np.ndarray:
    try:
        coords = [float(p) for p in text.split(",")]
    except ValueError as exc:
        raise CliInputError(f"bad point {text!r}: {exc}") from exc
    if not coords:
        raise CliInputError(f"bad point {text!r}")
    return np.array(coords)


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    settings: dict[str, str] = {}
    config_path = getattr(args, "config", None)
    if config_path:
        settings.update(read_config(config_path))
    for key in ("seed", "tol"):
        env_value = os.environ.get(ENV_PREFIX + key.upper())
        if env_value is not None:
            settings[key] = env_value
    for key in ("metric", "seed", "reps", "tol", "grid"):
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            settings[key] = str(flag_value)

    kind = _parse_metric(settings["metric"]) if "metric" in settings else None
    try:
        eps = float(settings.get("tol", DEFAULT_TOL.eps_abs))
        tol = Tolerance(eps_abs=eps, eps_rel=eps)
        seed = int(settings.get("seed", "0"))
        reps = int(settings.get("reps", "1000"))
    except ValueError as exc:
        raise CliInputError(f"bad configuration value: {exc}") from exc
    grid = _parse_grid(settings["grid"]) if "grid" in settings else DEFAULT_GRID
    return RunConfig(kind=kind, tol=tol, seed=seed, reps=reps, grid=grid)


def _require_metric(cfg: RunConfig, allowed: tuple[str, ...]) -> MetricKind:
    if cfg.kind is None:
        raise CliInputError("--metric is required")
    if cfg.kind.variant not in allowed:
        raise CliInputError(f"metric must be one of {allowed}, got {cfg.kind.variant}")
    return cfg.kind


def _load_points(args: argparse.Namespace) -> np.ndarray:
    if not getattr(args, "points", None):
        raise CliInputError("--points is required")
    return read_points_csv(args.points)


def cmd_metric_eval(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    kind = _require_metric(cfg, (RADIAL, RIVER, EUCLIDEAN))
    points = _load_points(args)
    dm = distance_matrix(kind, points, cfg.tol)
    if args.out:
        write_matrix_csv(args.out, dm.entries)
    else:
        for row in dm.entries:
            print(",".join(repr(float(v)) for v in row))
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    points = None
    if getattr(args, "matrix", None):
        dm = read_matrix_csv(args.matrix, cfg.tol)
    else:
        kind = _require_metric(cfg, (RADIAL, RIVER, EUCLIDEAN))
        points = _load_points(args)
        dm = distance_matrix(kind, points, cfg.tol)
    if dm.n > MAX_EXHAUSTIVE_POINTS and not args.force:
        raise CliInputError(
            f"{dm.n} points exceeds the exhaustive-scan cap of {MAX_EXHAUSTIVE_POINTS}; "
            "pass --force to scan anyway"
        )

    violations = []
    ok, report = is_tree_metric(dm, cfg.tol)
    if report is not None:
        violations.append(report)
    status = "pass" if ok else "FAIL"
    print(f"tree-metric (triangle + four-point): {status}")

    ultra = ultrametric_violation(dm, cfg.tol)
    print(f"ultrametric: {'yes' if ultra is None else 'no'}")
    if ultra is None and not ok:
        # Consistency: an ultrametric always satisfies the four-point scan,
        # so this line can only fail together with the scan above.
        print("ultrametric-implies-four-point: FAIL")

    if points is not None:
        cond_ok, cond_report = check_condition_b(cfg.kind, points, cfg.tol)
        if cond_report is not None:
            violations.append(cond_report)
        print(f"common-branch-point (all triples): {'pass' if cond_ok else 'FAIL'}")
        ok = ok and cond_ok

    for violation in violations:
        print(
            f"violation kind={violation.kind} witness={violation.witness} "
            f"slack={violation.slack!r}"
        )
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("kind,indices,slack\n")
            for violation in violations:
                idx = " ".join(str(i) for i in violation.witness)
                fh.write(f"{violation.kind},{idx},{violation.slack!r}\n")
    return 0 if ok else 1


def cmd_cdset_grid(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    kind = _require_metric(cfg, (RADIAL, RIVER))
    p1 = _parse_point(args.p1)
    p2 = _parse_point(args.p2)
    if kind.variant == RIVER and (p1.shape[0] != 2 or p2.shape[0] != 2):
        raise CliInputError("river pairs must be two-dimensional")
    if p1.shape != p2.shape:
        raise CliInputError("p1 and p2 must share a dimension")
    if p1.shape[0] != 2:
        raise CliInputError("grids are two-dimensional; pass planar points")
    xmin, xmax, ymin, ymax, nx, ny = cfg.grid
    xs = np.linspace(xmin, xmax, nx)
    ys = np.linspace(ymin, ymax, ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    probes = np.column_stack([gx.ravel(), gy.ravel()])

    region = closed_form_region(kind, p1, p2, cfg.tol)
    codes = region_classify_rows(region, probes, cfg.tol)
    if args.by_definition:
        member = beyond_member_rows(kind, p1, p2, probes, cfg.tol)
        codes = np.where(codes == BOUNDARY, BOUNDARY, np.where(member, INSIDE, 0))
    if not args.out:
        raise CliInputError("--out is required for grid output")
    write_grid_csv(args.out, xs, ys, codes.reshape(nx, ny))
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    kind = _require_metric(cfg, (RADIAL, RIVER))
    points = _load_points(args)
    if points.shape[1] != 2:
        raise CliInputError("simulation requires planar points")
    if kind.variant == RADIAL:
        batch = simulate_radial(radial_plan(points, cfg.tol), cfg.seed, cfg.reps)
    else:
        labelled = river_closure(points, cfg.tol)
        if getattr(args, "labelled_out", None):
            write_points_csv(args.labelled_out, labelled)
        batch = simulate_river(river_plan(labelled, cfg.tol), cfg.seed, cfg.reps)
    if not args.out:
        raise CliInputError("--out is required for simulation output")
    write_samples_csv(args.out, batch)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    kind = _require_metric(cfg, (RADIAL, RIVER))
    points = _load_points(args)
    if points.shape[1] != 2:
        raise CliInputError("verification requires planar points")
    reports = run_verify_suite(kind, points, cfg.seed, cfg.reps, cfg.tol)
    for report in reports:
        print(report.line())
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("name,status,max_deviation,tolerance,witness\n")
            for report in reports:
                witness = "" if report.witness is None else " ".join(map(str, report.witness))
                fh.write(
                    f"{report.name},{report.status},{report.max_deviation!r},"
                    f"{report.tolerance!r},{witness}\n"
                )
    return 1 if any(r.status == FAIL for r in reports) else 0


def _identify_battery(structure: str, tol: Tolerance):
    """Profiled-metric self-test: scan mismatches plus slope fits per family."""
    families = [
        ("power p=0.5", PowerFamily(0.5), False),
        ("power p=1", PowerFamily(1.0), True),
        ("power p=1.5", PowerFamily(1.5), False),
        ("power p=2", PowerFamily(2.0), False),
        ("linear c=1", LinearFamily(1.0), True),
        ("linear c=2", LinearFamily(2.0), False),
    ]
    span = np.linspace(-4.0, 4.0, 21)
    gx, gy = np.meshgrid(span, span, indexing="ij")
    probes = np.column_stack([gx.ravel(), gy.ravel()])
    args_u = np.array([1.0, 2.0, 3.0, 4.0])
    rows = []
    for label, family, matches_base in families:
        if structure == RADIAL:
            kind = MetricKind.parametric_radial(family)
            pairs = [
                (np.array([2.0, 0.0]), np.array([1.0, 0.0])),
                (np.array([0.0, 1.0]), np.array([0.0, 3.0])),
                (np.array([2.0, 0.0]), np.array([0.0, 1.0])),
                (np.array([1.0, 1.0]), np.array([1.0, 1.0])),
            ]
            fits = [[(u, float(family(u))) for u in args_u]]
        else:
            kind = MetricKind.parametric_river(family)
            pairs = [
                (np.array([1.0, 2.0]), np.array([1.0, 1.0])),
                (np.array([1.0, 2.0]), np.array([3.0, 4.0])),
                (np.array([1.0, 2.0]), np.array([3.0, 0.0])),
                (np.array([-1.0, -2.0]), np.array([-1.0, -1.0])),
            ]
            fits = [[(u, float(family(u))) for u in args_u]] * 2
        mismatches = len(region_equivalence_scan(kind, pairs, probes, tol))
        fit_results = [cauchy_fit(samples) for samples in fits]
        normalized = all(abs(c - 1.0) <= 1e-9 and resid <= 1e-9 for c, resid in fit_results)
        verdict = mismatches == 0 and normalized
        rows.append((label, mismatches, fit_results, verdict, matches_base))
    return rows


def cmd_identify(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    kind = _require_metric(cfg, (RADIAL, RIVER))
    rows = _identify_battery(kind.variant, cfg.tol)
    consistent = True
    for label, mismatches, fits, verdict, expected in rows:
        fit_text = "; ".join(f"slope={c!r} residual={resid:.3e}" for c, resid in fits)
        flag = "matches base metric" if verdict else "differs from base metric"
        print(f"{label}: mismatches={mismatches} {fit_text} -> {flag}")
        if verdict != expected:
            consistent = False
            print(f"  inconsistent: expected {'match' if expected else 'difference'}")
    return 0 if consistent else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treefield",
        description="Tree metrics, their certification, and tree-indexed Brownian fields",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--metric", choices=(RADIAL, RIVER, EUCLIDEAN), default=None)
    common.add_argument("--points", default=None, help="points CSV (header x1,...,xn)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--reps", type=int, default=None)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--grid", default=None, help="xmin,xmax,ymin,ymax,nx,ny")
    common.add_argument("--out", default=None)
    common.add_argument("--config", default=None, help="key = value settings file")

    sub = parser.add_subparsers(dest="command", required=True)

    metric = sub.add_parser("metric", help="metric evaluation commands")
    metric_sub = metric.add_subparsers(dest="subcommand", required=True)
    metric_eval = metric_sub.add_parser("eval", parents=[common], help="pairwise distance matrix")
    metric_eval.set_defaults(func=cmd_metric_eval)

    check = sub.add_parser("check", parents=[common], help="tree-metric certification")
    check.add_argument("--matrix", default=None, help="distance matrix CSV")
    check.add_argument("--force", action="store_true", help="lift the exhaustive-scan size cap")
    check.set_defaults(func=cmd_check)

    cdset = sub.add_parser("cdset", help="beyond-set region commands")
    cdset_sub = cdset.add_subparsers(dest="subcommand", required=True)
    grid = cdset_sub.add_parser("grid", parents=[common], help="membership mask over a grid")
    grid.add_argument("p1", help="first point, comma-separated coordinates")
    grid.add_argument("p2", help="second point, comma-separated coordinates")
    grid.add_argument(
        "--by-definition",
        action="store_true",
        help="use the metric identity instead of the closed-form region",
    )
    grid.set_defaults(func=cmd_cdset_grid)

    simulate = sub.add_parser("simulate", parents=[common], help="simulate the indexed field")
    simulate.add_argument("--labelled-out", default=None, help="write the river closure here")
    simulate.set_defaults(func=cmd_simulate)

    verify = sub.add_parser("verify", parents=[common], help="simulator verification suite")
    verify.set_defaults(func=cmd_verify)

    identify = sub.add_parser("identify", parents=[common], help="profiled-metric identification")
    identify.set_defaults(func=cmd_identify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (CliInputError, CsvFormatError, InvalidPoint, DimensionError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
