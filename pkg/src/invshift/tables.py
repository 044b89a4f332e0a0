"""Drivers that reproduce the reference result tables and run grid-refinement sweeps."""
from __future__ import annotations

import enum
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bessel import bessel_j0_zeros, j0
from .decomposition import ShiftSchedule
from .domain import (
    DISK,
    INTERVAL,
    SQUARE,
    DomainKind,
    DomainSpec,
    Grid,
    GridFunction,
    build_grid,
    discrete_eigenvalue,
    exact_eigenvalues,
    sample_function,
)
from .iteration import EstimatorKind, IterationConfig, eigenpair

TABLE_ESTIMATORS = (
    EstimatorKind.MU,
    EstimatorKind.GAMMA,
    EstimatorKind.WEAK_RAYLEIGH_PHI,
    EstimatorKind.WEAK_RAYLEIGH_V,
)
# Full-scale shift counts for the statistical tables.
FULL_COUNTS = {"T2": 1500, "T3": 100, "T4": 100}
DEFAULT_COUNTS = {"T2": 200, "T3": 100, "T4": 100}
SQUARE_MODES = ((1, 1), (1, 2), (2, 2), (1, 3), (2, 3), (3, 3))
BUCKETS = (">=1e-2", "1e-3", "1e-4", "1e-5", "1e-6", "1e-7", "<=1e-8")


class TableId(enum.Enum):
    T1 = "T1"
    T2 = "T2"
    T3 = "T3"
    T4 = "T4"
    T5 = "T5"
    T6 = "T6"
    T7 = "T7"

    @classmethod
    def parse(cls, text) -> "TableId":
        key = str(text).strip().upper()
        if not key.startswith("T"):
            key = "T" + key
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown table {text!r}; expected one of 1..7") from None


@dataclass
class TableReport:
    table: str
    title: str
    columns: list
    rows: list
    notes: dict = field(default_factory=dict)
    details: list = field(default_factory=list)


def named_start(grid: Grid, name: str = "one") -> GridFunction:
    """Start functions selectable by name.

    ``one`` is the unit constant; ``poly`` vanishes on the boundary;
    ``sinK`` (``sinNxM`` on the square) is a single continuous mode.
    """
    ext = grid.spec.extent
    key = name.strip().lower()
    if key in ("one", "1", "const"):
        return sample_function(grid, lambda *xs: np.ones_like(xs[0]))
    if key == "poly":
        if grid.kind is DomainKind.INTERVAL:
            return sample_function(grid, lambda x: x * (ext - x))
        if grid.kind is DomainKind.RADIAL_DISK:
            return sample_function(grid, lambda r: ext**2 - r**2)
        return sample_function(grid, lambda x, y: x * (ext - x) * y * (ext - y))
    match = re.fullmatch(r"sin(\d+)(?:x(\d+))?", key)
    if match:
        n = int(match.group(1))
        m = int(match.group(2) or n)
        if n < 1 or m < 1:
            raise ValueError("mode numbers start at 1")
        if grid.kind is DomainKind.INTERVAL:
            return sample_function(grid, lambda x: np.sin(n * math.pi * x / ext))
        if grid.kind is DomainKind.SQUARE:
            return sample_function(
                grid, lambda x, y: np.sin(n * math.pi * x / ext) * np.sin(m * math.pi * y / ext)
            )
        z = bessel_j0_zeros(n)[-1]
        return sample_function(grid, lambda r: np.vectorize(j0)(z * r / ext))
    raise ValueError(f"unknown start function {name!r}")


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _rel(a, b):
    return abs(a - b) / abs(b)


def _estimator_rows(u, shifts, exact, labels, iterations, workers, seed):
    cfg = IterationConfig(iterations=iterations, estimators=frozenset(TABLE_ESTIMATORS), seed=seed)

    def run(sigma):
        res = eigenpair(u, sigma, cfg)
        return [res.estimates[k] for k in TABLE_ESTIMATORS], res.residual

    out = _map(run, shifts, workers)
    rows = []
    for label, lam, sigma, (vals, resid) in zip(labels, exact, shifts, out):
        rows.append([label, lam, sigma, *vals, _rel(vals[0], lam), resid])
    return rows


_EST_COLUMNS = ["exact", "shift", "mu", "gamma", "rq_phi", "rq_v", "rel_err_mu", "residual"]


def table_1(iterations=10, workers=1, seed=0) -> TableReport:
    grid = build_grid(INTERVAL, 101)
    lam = list(exact_eigenvalues(INTERVAL, 8).eigenvalues)
    shifts = [x - 0.1 for x in lam]
    rows = _estimator_rows(named_start(grid), shifts, lam, list(range(1, 9)), iterations, workers, seed)
    for row in rows:
        row.append(discrete_eigenvalue(grid, row[0]))
    return TableReport(
        "T1",
        "unit interval, 101 nodes, shift lambda_k - 0.1",
        ["k", *_EST_COLUMNS, "discrete"],
        rows,
        {"iterations": iterations, "nodes": 101},
    )


def table_5(iterations=10, workers=1, seed=0) -> TableReport:
    grid = build_grid(DISK, 201)
    lam = list(exact_eigenvalues(DISK, 8).eigenvalues)
    shifts = [x - 0.1 for x in lam]
    rows = _estimator_rows(named_start(grid), shifts, lam, list(range(1, 9)), iterations, workers, seed)
    return TableReport(
        "T5",
        "unit disk (radial), 201 nodes, shift lambda_k - 0.1",
        ["k", *_EST_COLUMNS],
        rows,
        {"iterations": iterations, "nodes": 201},
    )


def table_6(iterations=10, workers=1, seed=0) -> TableReport:
    grid = build_grid(SQUARE, 201)
    lam = [(n * n + m * m) * math.pi**2 for n, m in SQUARE_MODES]
    shifts = [x - 0.1 for x in lam]
    labels = [f"({n},{m})" for n, m in SQUARE_MODES]
    rows = _estimator_rows(named_start(grid), shifts, lam, labels, iterations, workers, seed)
    return TableReport(
        "T6",
        "unit square, 201x201 nodes, shift lambda_nm - 0.1",
        ["mode", *_EST_COLUMNS],
        rows,
        {"iterations": iterations, "nodes": "201x201"},
    )


def table_7(max_grid=500, iterations=10, workers=1, seed=0) -> TableReport:
    exact = 18 * math.pi**2
    sizes = list(range(100, max_grid + 1, 100))
    if not sizes:
        raise ValueError("max-grid must be at least 100")
    report = run_sweep(
        SQUARE,
        [n + 1 for n in sizes],
        sigma=exact - 0.1,
        exact=exact,
        estimator=EstimatorKind.MU,
        iterations=iterations,
        workers=workers,
        seed=seed,
    )
    for row, n in zip(report.rows, sizes):
        row[0] = f"{n}x{n}"
    report.table = "T7"
    report.title = "unit square, lambda_33, grid refinement (N intervals per side)"
    report.columns[0] = "grid"
    return report


def _bucket(err: float) -> str:
    if err <= 0:
        return BUCKETS[-1]
    order = math.floor(math.log10(err))
    if order >= -2:
        return BUCKETS[0]
    if order <= -8:
        return BUCKETS[-1]
    return f"1e{order}"


def _histogram(errors) -> dict:
    counts = {b: 0 for b in BUCKETS}
    for e in errors:
        counts[_bucket(e)] += 1
    return counts


def _statistical(tid, schedule, iterations, workers, seed, threshold, title):
    grid = build_grid(INTERVAL, 10001)
    u = named_start(grid)
    top = max(schedule.shifts)
    # Exact eigenvalues well past the largest shift for nearest matching.
    count = int(math.sqrt(max(top, 1.0)) / math.pi * 1.5) + 10
    exact = exact_eigenvalues(INTERVAL, count).eigenvalues
    cfg = IterationConfig(
        iterations=iterations, estimators=frozenset({EstimatorKind.WEAK_RAYLEIGH_V}), seed=seed
    )

    def run(sigma):
        return eigenpair(u, sigma, cfg).eigenvalue

    values = _map(run, schedule.shifts, workers)
    details, final_err, init_err = [], [], []
    for k, (sigma, value) in enumerate(zip(schedule.shifts, values), start=1):
        j = int(np.argmin(np.abs(exact - value)))
        err = _rel(value, exact[j])
        js = int(np.argmin(np.abs(exact - sigma)))
        err0 = _rel(sigma, exact[js])
        details.append(
            {"index": k, "shift": sigma, "rq_v": value, "nearest_k": j + 1,
             "nearest_exact": float(exact[j]), "rel_err": err, "shift_rel_err": err0}
        )
        final_err.append(err)
        init_err.append(err0)
    hist = _histogram(final_err)
    hist0 = _histogram(init_err)
    rows = [[b, hist0[b], hist[b]] for b in BUCKETS]
    converged = sum(e < threshold for e in final_err)
    notes = {
        "runs": len(values),
        "converged": converged,
        "threshold": threshold,
        "converged_fraction": converged / len(values),
        "iterations": iterations,
        "nodes": 10001,
        "schedule": schedule.source,
    }
    return TableReport(tid, title, ["order", "n_shift", "n_lambda"], rows, notes, details)


def _count(tid, scale):
    if scale is None:
        return DEFAULT_COUNTS[tid]
    if not scale > 0:
        raise ValueError("scale must be positive")
    return max(1, int(round(FULL_COUNTS[tid] * scale)))


def table_2(scale=None, iterations=30, workers=1, seed=0) -> TableReport:
    sched = ShiftSchedule.fraction(INTERVAL, _count("T2", scale), 0.99)
    return _statistical("T2", sched, iterations, workers, seed, 1e-3,
                        "unit interval, 10001 nodes, shift 0.99 lambda_k")


def table_3(scale=None, iterations=30, workers=1, seed=0) -> TableReport:
    sched = ShiftSchedule.midpoint(INTERVAL, _count("T3", scale))
    return _statistical("T3", sched, iterations, workers, seed, 1e-3,
                        "unit interval, 10001 nodes, shift midway between lambda_k and lambda_k+1")


def table_4(scale=None, iterations=30, workers=1, seed=0) -> TableReport:
    sched = ShiftSchedule.random(INTERVAL, _count("T4", scale), upper_index=50, seed=seed)
    report = _statistical("T4", sched, iterations, workers, seed, 1e-3,
                          "unit interval, 10001 nodes, uniform random shifts on (0, lambda_50)")
    report.notes["seed"] = seed
    return report


def run_table(tid, scale=None, max_grid=500, workers=1, seed=0) -> TableReport:
    tid = TableId.parse(tid.value if isinstance(tid, TableId) else tid)
    if tid is TableId.T1:
        return table_1(workers=workers, seed=seed)
    if tid is TableId.T2:
        return table_2(scale, workers=workers, seed=seed)
    if tid is TableId.T3:
        return table_3(scale, workers=workers, seed=seed)
    if tid is TableId.T4:
        return table_4(scale, workers=workers, seed=seed)
    if tid is TableId.T5:
        return table_5(workers=workers, seed=seed)
    if tid is TableId.T6:
        return table_6(workers=workers, seed=seed)
    return table_7(max_grid, workers=workers, seed=seed)


def observed_order(spacings, errors) -> float:
    """Least-squares slope of log(error) against log(h)."""
    h = np.asarray(spacings, dtype=float)
    e = np.asarray(errors, dtype=float)
    if len(h) < 2:
        raise ValueError("need at least two grids to fit an order")
    if np.any(e <= 0):
        return float("nan")
    slope, _ = np.polyfit(np.log(h), np.log(e), 1)
    return float(slope)


def run_sweep(
    spec: DomainSpec,
    node_list,
    sigma: float,
    exact: float | None = None,
    estimator: EstimatorKind = EstimatorKind.MU,
    iterations: int = 10,
    start: str = "one",
    workers: int = 1,
    seed: int = 0,
) -> TableReport:
    """Estimate one eigenvalue on a sequence of grids and fit the convergence order.

    ``exact`` defaults to the continuous eigenvalue nearest to the estimate on
    the finest grid.
    """
    nodes = list(node_list)
    if len(nodes) < 2:
        raise ValueError("a sweep needs at least two grids")
    cfg = IterationConfig(iterations=iterations, estimators=frozenset({estimator}), seed=seed)

    def run(n):
        grid = build_grid(spec, n)
        res = eigenpair(named_start(grid, start), sigma, cfg)
        return grid.spacing[0], res.estimates[estimator]

    out = _map(run, nodes, workers)
    if exact is None:
        finest = min(out)[1]
        count = int(math.sqrt(max(finest, sigma, 1.0)) + 10)
        lam = exact_eigenvalues(spec, count * count if spec.kind is DomainKind.SQUARE else count)
        exact = float(lam.eigenvalues[np.argmin(np.abs(lam.eigenvalues - finest))])
    rows, errs = [], []
    for n, (h, est) in zip(nodes, out):
        err = _rel(est, exact)
        errs.append(err)
        rows.append([n if isinstance(n, int) else "x".join(map(str, n)), h, est, exact, err])
    for i in range(1, len(rows)):
        rows[i].append(errs[i - 1] / errs[i] if errs[i] > 0 else float("inf"))
    rows[0].append(None)
    order = observed_order([r[1] for r in rows], errs)
    return TableReport(
        "sweep",
        f"{spec.kind.value} refinement at shift {sigma:g}",
        ["nodes", "h", estimator.value, "exact", "rel_err", "err_ratio"],
        rows,
        {"observed_order": order, "estimator": estimator.value, "shift": sigma, "iterations": iterations},
    )
