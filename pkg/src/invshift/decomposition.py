"""Spectral decomposition of a grid function by repeated shifted inverse iteration."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .discrete import assemble_shifted
from .domain import DomainKind, DomainSpec, GridFunction, exact_eigenvalues, weyl_shift_seeds
from .errors import EmptyResult, NearSingularShift, ZeroStart
from .iteration import EstimatorKind, IterationConfig, iterate, residual
from .quadrature import inner, norm_l2

MERGE_RTOL = 1e-6
CONVERGE_RTOL = 1e-10


@dataclass(frozen=True)
class ShiftSchedule:
    shifts: tuple
    source: str = "explicit"

    def __post_init__(self):
        shifts = tuple(float(s) for s in self.shifts)
        if not shifts:
            raise ValueError("empty shift schedule")
        if not all(math.isfinite(s) for s in shifts):
            raise ValueError("shifts must be finite")
        object.__setattr__(self, "shifts", shifts)

    def __len__(self):
        return len(self.shifts)

    def __iter__(self):
        return iter(self.shifts)

    @classmethod
    def explicit(cls, shifts) -> "ShiftSchedule":
        return cls(tuple(shifts), "explicit")

    @classmethod
    def offset_from_exact(cls, spec: DomainSpec, count: int, offset: float = 0.1) -> "ShiftSchedule":
        """``lambda_k - offset`` over the first ``count`` distinct exact eigenvalues."""
        return cls(tuple(lam - offset for lam in _distinct_exact(spec, count)), "offset-from-exact")

    @classmethod
    def weyl(cls, spec: DomainSpec, count: int) -> "ShiftSchedule":
        return cls(tuple(weyl_shift_seeds(spec, count)), "weyl-seeded")

    @classmethod
    def midpoint(cls, spec: DomainSpec, count: int) -> "ShiftSchedule":
        lam = _distinct_exact(spec, count + 1)
        return cls(tuple(0.5 * (a + b) for a, b in zip(lam[:-1], lam[1:])), "midpoint")

    @classmethod
    def fraction(cls, spec: DomainSpec, count: int, factor: float = 0.99) -> "ShiftSchedule":
        return cls(tuple(factor * lam for lam in _distinct_exact(spec, count)), "fraction")

    @classmethod
    def random(cls, spec: DomainSpec, count: int, upper_index: int = 50, seed: int = 0) -> "ShiftSchedule":
        """``count`` uniform draws on ``(0, lambda_upper_index)``, sorted."""
        upper = _distinct_exact(spec, upper_index)[-1]
        rng = np.random.default_rng(seed)
        draws = rng.uniform(0.0, upper, size=count)
        return cls(tuple(np.sort(draws)), "random")


def _distinct_exact(spec: DomainSpec, count: int) -> list:
    if spec.kind is not DomainKind.SQUARE:
        return [float(x) for x in exact_eigenvalues(spec, count).eigenvalues]
    n = 2 * count + 8
    while True:
        groups = exact_eigenvalues(spec, n).distinct()
        if len(groups) > count:
            return [lam for lam, _ in groups[:count]]
        n *= 2


@dataclass
class SpectralComponent:
    eigenvalue: float
    coefficient: float
    eigenfunction: GridFunction  # L2-normalised
    shift_used: float
    residual: float
    iterations: int


@dataclass
class SpectralDecompositionResult:
    u: GridFunction
    components: list
    parseval_sum: float
    reconstruction_error: float
    discarded: list = field(default_factory=list)  # (shift, eigenvalue, coefficient)
    failed_shifts: list = field(default_factory=list)  # (shift, message)

    @property
    def eigenvalues(self) -> list:
        return [c.eigenvalue for c in self.components]

    @property
    def coefficients(self) -> list:
        return [c.coefficient for c in self.components]


def fourier_coefficient(u: GridFunction, e: GridFunction) -> float:
    """``<u, e/|e|_2>_2``."""
    ne = norm_l2(e)
    if ne == 0.0:
        raise ZeroStart("Fourier coefficient against the zero function")
    return inner(u, e) / ne


def _run_shift(u, sigma, iterations, tolerance, converge_rtol):
    """Inner loop for one shift: returns ("emit", component) or ("discard", info)."""
    try:
        op = assemble_shifted(u.grid, sigma)
    except NearSingularShift as exc:
        return "failed", (sigma, str(exc))
    cfg = IterationConfig(iterations=iterations, estimators={EstimatorKind.WEAK_RAYLEIGH_V})
    hist = iterate(u, op, cfg)
    rq = hist.rq_v_direct  # R(v_n) at position n-1, n = 1..m+1
    last = len(rq)
    chosen = last
    coef = 0.0
    for n in range(1, last + 1):
        qn = hist.iterate(n)
        coef = fourier_coefficient(u, qn)
        converged = n >= 2 and abs(rq[n - 1] - rq[n - 2]) <= converge_rtol * abs(rq[n - 1])
        if abs(coef) > tolerance and converged:
            chosen = n
            break
    else:
        chosen = last
    ef = hist.iterate(chosen)
    ef = ef / norm_l2(ef)
    coef = inner(u, ef)
    lam = float(rq[chosen - 1])
    if abs(coef) <= tolerance:
        return "discard", (sigma, lam, coef)
    comp = SpectralComponent(
        eigenvalue=lam,
        coefficient=coef,
        eigenfunction=ef,
        shift_used=sigma,
        residual=residual(op, lam, ef),
        iterations=chosen,
    )
    return "emit", comp


def _merge(components, merge_rtol):
    merged = []
    for comp in sorted(components, key=lambda c: c.eigenvalue):
        if merged and abs(comp.eigenvalue - merged[-1].eigenvalue) < merge_rtol * abs(comp.eigenvalue):
            if abs(comp.coefficient) > abs(merged[-1].coefficient):
                merged[-1] = comp
        else:
            merged.append(comp)
    return merged


def decompose(
    u: GridFunction,
    schedule: ShiftSchedule,
    per_shift_iterations: int = 30,
    tolerance: float | None = None,
    merge_rtol: float = MERGE_RTOL,
    converge_rtol: float = CONVERGE_RTOL,
    workers: int = 1,
) -> SpectralDecompositionResult:
    """Extract the eigenpairs of ``u`` reachable from the shifts in ``schedule``.

    For every shift the iteration stops at the first step whose eigenvalue
    estimate has settled (relative change ``<= converge_rtol``) while the
    Fourier coefficient of the normalised iterate exceeds ``tolerance``; if
    that never happens within ``per_shift_iterations`` the last iterate is
    tested. Components below ``tolerance`` are discarded as rounding debris;
    eigenvalues agreeing to ``merge_rtol`` are merged, keeping the larger
    coefficient. ``tolerance`` defaults to ``1e-8 * |u|_2``.
    """
    u_norm = norm_l2(u)
    if u_norm == 0.0:
        raise ZeroStart("cannot decompose the zero function")
    if tolerance is None:
        tolerance = 1e-8 * u_norm
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")

    def run(sigma):
        return _run_shift(u, sigma, per_shift_iterations, tolerance, converge_rtol)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, schedule.shifts))
    else:
        outcomes = [run(s) for s in schedule.shifts]

    emitted, discarded, failed = [], [], []
    for status, payload in outcomes:
        {"emit": emitted, "discard": discarded, "failed": failed}[status].append(payload)
    components = _merge(emitted, merge_rtol)
    if not components:
        raise EmptyResult(
            f"no component above tolerance {tolerance:.3e} for {len(schedule)} shift(s)"
        )
    recon = _sum_components(u, components)
    return SpectralDecompositionResult(
        u=u,
        components=components,
        parseval_sum=float(sum(c.coefficient**2 for c in components)),
        reconstruction_error=norm_l2(u - recon) / u_norm,
        discarded=discarded,
        failed_shifts=failed,
    )


def _sum_components(u, components):
    total = np.zeros(u.grid.shape)
    for c in components:
        total += c.coefficient * c.eigenfunction.values
    return GridFunction(u.grid, total)


def reconstruct(result: SpectralDecompositionResult) -> GridFunction:
    """``sum coefficient * eigenfunction`` over the components."""
    if not result.components:
        raise EmptyResult("nothing to reconstruct")
    return _sum_components(result.u, result.components)
