"""Command-line front end: ``invshift {eigenpair,decompose,sweep,table}``."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .decomposition import ShiftSchedule, decompose
from .domain import DomainKind, DomainSpec, build_grid, parse_nodes
from .errors import InvShiftError
from .iteration import ALL_ESTIMATORS, EstimatorKind, IterationConfig, eigenpair
from .quadrature import norm_l2
from .report import emit, render
from .tables import TableId, named_start, run_sweep, run_table

EIGENPAIR_COLUMNS = ["iter", "mu", "gamma", "rq_phi", "rq_v", "rq_classic", "linf_ratio", "residual", "x0"]
COLUMN_KINDS = [EstimatorKind(c) for c in EIGENPAIR_COLUMNS[1:7]]
DECOMPOSE_COLUMNS = ["eigenvalue", "coefficient", "shift_used", "residual", "parseval_sum", "reconstruction_error"]
SHIFT_MODES = ("offset-0.1", "weyl", "midpoint", "fraction", "random")


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0 or not np.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def _common(p, nodes_default="101"):
    p.add_argument("--domain", default="interval", choices=["interval", "disk", "square"])
    p.add_argument("--nodes", default=nodes_default, help="N or NxM, odd counts incl. boundary")
    p.add_argument("--start", default="one", help="start function: one, poly, sinK, sinNxM")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    p.add_argument("--workers", type=_positive_int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="invshift", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigenpair", help="one shifted inverse-iteration run")
    _common(p)
    p.add_argument("--shift", type=float, required=True)
    p.add_argument("--iters", type=_positive_int, default=10)
    p.add_argument("--estimator", default="all", help="comma list of mu,gamma,rq-phi,rq-v,rq-classic,linf or all")

    p = sub.add_parser("decompose", help="spectral decomposition of the start function")
    _common(p)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--shifts", type=_float_list)
    group.add_argument("--shift-mode", choices=SHIFT_MODES, default="offset-0.1")
    p.add_argument("--count", type=_positive_int, default=9, help="number of generated shifts")
    p.add_argument("--iters", type=_positive_int, default=30)
    p.add_argument("--tol", type=_positive_float, default=None, help="coefficient tolerance (default 1e-8 |u|_2)")
    p.add_argument("--dump", default=None, help="write eigenfunction values to this CSV file")

    p = sub.add_parser("sweep", help="grid-refinement study of one eigenvalue")
    _common(p, nodes_default="101,201,401")
    p.add_argument("--shift", type=float, required=True)
    p.add_argument("--exact", type=float, default=None)
    p.add_argument("--iters", type=_positive_int, default=10)
    p.add_argument("--estimator", default="mu")

    p = sub.add_parser("table", help="reproduce one of the reference tables")
    p.add_argument("--id", "--table", dest="table", required=True, help="1..7 or T1..T7")
    p.add_argument("--scale", type=_positive_float, default=None, help="fraction of the full shift count (T2-T4)")
    p.add_argument("--max-grid", type=_positive_int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    p.add_argument("--workers", type=_positive_int, default=1)
    return parser


def _grid(args):
    spec = DomainSpec(DomainKind.parse(args.domain))
    return build_grid(spec, parse_nodes(args.nodes))


def run_eigenpair(args) -> int:
    grid = _grid(args)
    kinds = EstimatorKind.parse(args.estimator)
    cfg = IterationConfig(iterations=args.iters, estimators=kinds, seed=args.seed)
    res = eigenpair(named_start(grid, args.start), args.shift, cfg)
    hist = res.history
    rows = []
    for n in range(1, hist.m + 1):
        rows.append([n] + [hist.estimate(k, n) if k in kinds else None for k in COLUMN_KINDS])
    x0 = None
    if hist.x0 is not None:
        x0 = ";".join(f"{c:.10g}" for c in grid.coordinates(hist.x0))
    rows[-1] += [res.residual, x0]
    meta = {"domain": grid.kind.value, "nodes": list(grid.shape), "shift": args.shift,
            "iterations": args.iters, "seed": args.seed, "primary": res.primary.value}
    emit(render(EIGENPAIR_COLUMNS, rows, args.format, meta), args.out)
    return 0


def _schedule(args, spec):
    if args.shifts:
        return ShiftSchedule.explicit(args.shifts)
    mode = args.shift_mode
    if mode == "offset-0.1":
        return ShiftSchedule.offset_from_exact(spec, args.count, 0.1)
    if mode == "weyl":
        return ShiftSchedule.weyl(spec, args.count)
    if mode == "midpoint":
        return ShiftSchedule.midpoint(spec, args.count)
    if mode == "fraction":
        return ShiftSchedule.fraction(spec, args.count)
    return ShiftSchedule.random(spec, args.count, seed=args.seed)


def run_decompose(args) -> int:
    grid = _grid(args)
    u = named_start(grid, args.start)
    schedule = _schedule(args, grid.spec)
    result = decompose(u, schedule, per_shift_iterations=args.iters, tolerance=args.tol,
                       workers=args.workers)
    rows = [[c.eigenvalue, c.coefficient, c.shift_used, c.residual] for c in result.components]
    rows.append([None, None, None, None, result.parseval_sum, result.reconstruction_error])
    meta = {"domain": grid.kind.value, "nodes": list(grid.shape), "schedule": schedule.source,
            "shifts": list(schedule.shifts), "u_norm_sq": norm_l2(u) ** 2,
            "failed_shifts": [[s, msg] for s, msg in result.failed_shifts]}
    for sigma, msg in result.failed_shifts:
        print(f"warning: shift {sigma:.10g} skipped: {msg}", file=sys.stderr)
    emit(render(DECOMPOSE_COLUMNS, rows, args.format, meta), args.out)
    if args.dump:
        cols = [f"x{i}" for i in range(grid.ndim)] + [f"e{j}" for j in range(len(result.components))]
        mesh = [m.ravel() for m in grid.mesh()]
        values = [c.eigenfunction.values.ravel() for c in result.components]
        dump_rows = [list(r) for r in zip(*mesh, *values)]
        emit(render(cols, dump_rows, "csv"), args.dump)
    return 0


def run_sweep_command(args) -> int:
    spec = DomainSpec(DomainKind.parse(args.domain))
    nodes = [parse_nodes(t) for t in args.nodes.split(",") if t.strip()]
    kinds = EstimatorKind.parse(args.estimator)
    if len(kinds) != 1:
        raise ValueError("sweep takes exactly one estimator")
    (kind,) = kinds
    report = run_sweep(spec, nodes, args.shift, args.exact, kind, args.iters, args.start,
                       args.workers, args.seed)
    print(f"observed order: {report.notes['observed_order']:.4f}", file=sys.stderr)
    emit(render(report.columns, report.rows, args.format, report.notes), args.out)
    return 0


def run_table_command(args) -> int:
    tid = TableId.parse(args.table)
    report = run_table(tid, scale=args.scale, max_grid=args.max_grid, workers=args.workers, seed=args.seed)
    meta = dict(report.notes, title=report.title, table=report.table)
    if report.details:
        meta["details"] = report.details
    if args.format == "csv":
        for key, value in report.notes.items():
            print(f"# {key}: {value}", file=sys.stderr)
    emit(render(report.columns, report.rows, args.format, meta), args.out)
    return 0


COMMANDS = {
    "eigenpair": run_eigenpair,
    "decompose": run_decompose,
    "sweep": run_sweep_command,
    "table": run_table_command,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InvShiftError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
