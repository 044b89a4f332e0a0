"""Inverse iteration with shift and its eigenvalue estimators.

The iteration is always run normalised: with ``q_0 = u/|u|`` each step solves
``(-Delta_h - sigma) w = q_n`` and sets ``q_{n+1} = w/c_n`` with ``c_n = |w|``.
The un-normalised iterates of the plain recursion ``phi_{n+1} = (-Delta_h -
sigma)^{-1} phi_n``, ``phi_0 = u``, are ``phi_n = E_n q_n`` with
``E_0 = |u|`` and ``E_{n+1} = E_n c_n``; ``log E_n`` is accumulated so that
quotients of ``phi`` can be formed without ever materialising ``phi``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .discrete import ShiftedOperator, assemble_shifted
from .domain import Grid, GridFunction
from .errors import GridMismatch, NodalPoint, NoValidPoint, ZeroStart
from .quadrature import dirichlet_energy, inner, nodal_inner, norm_l2, norm_linf, simpson_weights

NODAL_FRACTION = 0.01
MAX_DRAWS = 100


class EstimatorKind(enum.Enum):
    MU = "mu"
    GAMMA = "gamma"
    WEAK_RAYLEIGH_PHI = "rq_phi"
    WEAK_RAYLEIGH_V = "rq_v"
    CLASSIC_RAYLEIGH = "rq_classic"
    LINF_RATIO = "linf_ratio"

    @classmethod
    def parse(cls, names: str | Iterable[str]) -> frozenset:
        """Parse CLI spellings (``mu,gamma,rq-phi,rq-v,rq-classic,linf,all``)."""
        if isinstance(names, str):
            names = [n for n in names.split(",") if n]
        aliases = {
            "mu": cls.MU,
            "gamma": cls.GAMMA,
            "rq-phi": cls.WEAK_RAYLEIGH_PHI,
            "rq_phi": cls.WEAK_RAYLEIGH_PHI,
            "rq-v": cls.WEAK_RAYLEIGH_V,
            "rq_v": cls.WEAK_RAYLEIGH_V,
            "rq-classic": cls.CLASSIC_RAYLEIGH,
            "rq_classic": cls.CLASSIC_RAYLEIGH,
            "linf": cls.LINF_RATIO,
            "linf_ratio": cls.LINF_RATIO,
        }
        kinds = set()
        for name in names:
            key = name.strip().lower()
            if key == "all":
                kinds.update(cls)
            elif key in aliases:
                kinds.add(aliases[key])
            else:
                raise ValueError(f"unknown estimator {name!r}")
        return frozenset(kinds)


ALL_ESTIMATORS = frozenset(EstimatorKind)


class Normalization(enum.Enum):
    L2 = "l2"
    LINF = "linf"


def _norm(f: GridFunction, kind: Normalization) -> float:
    return norm_l2(f) if kind is Normalization.L2 else norm_linf(f)


@dataclass(frozen=True)
class IterationConfig:
    """Settings for one inverse-iteration run.

    ``sample_point`` is a flat node index or ``None`` for a seeded random
    choice made on the final iterate.
    """

    iterations: int = 10
    normalization: Normalization = Normalization.L2
    sample_point: int | None = None
    estimators: frozenset = ALL_ESTIMATORS
    seed: int = 0
    sigma: float | None = None
    early_stop: bool = False
    early_stop_rtol: float = 1e-12

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        object.__setattr__(self, "estimators", frozenset(self.estimators))


@dataclass
class IterationHistory:
    """Everything recorded by :func:`iterate`.

    Arrays indexed by iteration number ``n``; estimator sequences hold
    ``n = 1..m`` at positions ``0..m-1``.
    """

    grid: Grid
    sigma: float
    normalization: Normalization
    iterates: list  # q_0 .. q_{m+1}, unit norm in the configured norm
    scale: np.ndarray  # c_0 .. c_m
    log_phi_scale: np.ndarray  # log E_0 .. log E_{m+1}
    l2: np.ndarray  # |q_n|_2
    linf: np.ndarray  # |q_n|_inf
    cross: np.ndarray  # <q_n, q_{n+1}>_2, n = 0..m
    rq_v_direct: np.ndarray  # R(v_n), n = 1..m+1
    estimates: dict = field(default_factory=dict)
    x0: int | None = None

    @property
    def m(self) -> int:
        return len(self.scale) - 1

    @property
    def signs(self) -> np.ndarray:
        """s_n = sign <v_n, v_{n+1}> for n = 0..m."""
        return np.where(self.cross < 0, -1, 1)

    def iterate(self, n: int) -> GridFunction:
        return GridFunction(self.grid, self.iterates[n])

    @property
    def final(self) -> GridFunction:
        return self.iterate(self.m + 1)

    def log_phi_norm(self, n: int, which: str = "l2") -> float:
        """log of |phi_n| for the un-normalised recursion."""
        size = self.l2[n] if which == "l2" else self.linf[n]
        return float(self.log_phi_scale[n] + math.log(size))

    def phi(self, n: int) -> GridFunction:
        """Reconstructed un-normalised iterate (may overflow for long runs)."""
        return GridFunction(self.grid, math.exp(self.log_phi_scale[n]) * self.iterates[n])

    def sequence(self, kind: EstimatorKind) -> np.ndarray:
        if kind not in self.estimates:
            raise KeyError(f"estimator {kind.value} was not requested")
        return self.estimates[kind]

    def estimate(self, kind: EstimatorKind, n: int | None = None) -> float:
        n = self.m if n is None else n
        if not 1 <= n <= self.m:
            raise IndexError(f"iteration {n} outside 1..{self.m}")
        return float(self.sequence(kind)[n - 1])


def pick_sample_point(grid: Grid, v: GridFunction, rng_seed=0) -> int:
    """Random unknown node where ``|v| >= 0.01 |v|_inf`` (flat index).

    Draws uniformly among the non-Dirichlet nodes, at most 100 times.
    """
    peak = norm_linf(v)
    if peak == 0.0:
        raise NoValidPoint("function vanishes identically")
    rng = np.random.default_rng(rng_seed)
    candidates = np.flatnonzero(grid.unknown_mask.ravel())
    flat = v.values.ravel()
    for _ in range(MAX_DRAWS):
        idx = int(candidates[rng.integers(len(candidates))])
        if abs(flat[idx]) >= NODAL_FRACTION * peak:
            return idx
    raise NoValidPoint(f"no node with |v| >= {NODAL_FRACTION}*|v|_inf after {MAX_DRAWS} draws")


def _mu_sequence(hist: IterationHistory, x0: int) -> np.ndarray:
    vals = np.empty(hist.m)
    for n in range(1, hist.m + 1):
        num = hist.iterates[n].ravel()[x0]
        den = hist.scale[n] * hist.iterates[n + 1].ravel()[x0]
        if den == 0.0:
            raise NodalPoint(f"iterate {n + 1} vanishes at node {x0}")
        vals[n - 1] = num / den + hist.sigma
    return vals


def iterate(u0: GridFunction, op: ShiftedOperator, cfg: IterationConfig = IterationConfig()) -> IterationHistory:
    """Run ``m`` steps of normalised inverse iteration and record estimators."""
    if u0.grid != op.grid:
        raise GridMismatch(f"start on {u0.grid!r}, operator on {op.grid!r}")
    if cfg.sigma is not None and cfg.sigma != op.sigma:
        raise ValueError(f"config shift {cfg.sigma} differs from operator shift {op.sigma}")
    norm0 = _norm(u0, cfg.normalization)
    if norm0 == 0.0:
        raise ZeroStart("start function is identically zero")

    grid = op.grid
    sigma = op.sigma
    weights = simpson_weights(grid)
    mask = grid.unknown_mask
    m = cfg.iterations

    q = u0.values / norm0
    iterates = [q]
    scale, log_scale, cross, rq_v = [], [math.log(norm0)], [], []
    for n in range(m + 1):
        w = np.zeros(grid.shape)
        w[mask] = op.solve_array(q[mask])
        wf = GridFunction(grid, w)
        c = _norm(wf, cfg.normalization)
        if c == 0.0:
            raise ZeroStart(f"iterate {n + 1} vanished")
        q_next = w / c
        # R(v_{n+1}) = sigma + <v_{n+1}, rhs>/|v_{n+1}|^2, rhs = v_n/|v_n| = q_n
        rq_v.append(sigma + float(np.sum(weights * w * q)) / float(np.sum(weights * w * w)))
        cross.append(float(np.sum(weights * q * q_next)))
        scale.append(c)
        log_scale.append(log_scale[-1] + math.log(c))
        iterates.append(q_next)
        q = q_next
        if (
            cfg.early_stop
            and n >= 2
            and abs(rq_v[-1] - rq_v[-2]) < cfg.early_stop_rtol * abs(rq_v[-1])
        ):
            break

    hist = IterationHistory(
        grid=grid,
        sigma=sigma,
        normalization=cfg.normalization,
        iterates=iterates,
        scale=np.array(scale),
        log_phi_scale=np.array(log_scale),
        l2=np.array([math.sqrt(float(np.sum(weights * x * x))) for x in iterates]),
        linf=np.array([float(np.abs(x).max()) for x in iterates]),
        cross=np.array(cross),
        rq_v_direct=np.array(rq_v),
    )
    m = hist.m
    if m < 1:
        raise ValueError("need at least one completed iteration")
    n = np.arange(1, m + 1)
    c, l2, linf, s = hist.scale, hist.l2, hist.linf, hist.signs
    kinds = cfg.estimators
    if EstimatorKind.GAMMA in kinds:
        hist.estimates[EstimatorKind.GAMMA] = s[n] * l2[n] / (c[n] * l2[n + 1]) + sigma
    if EstimatorKind.LINF_RATIO in kinds:
        hist.estimates[EstimatorKind.LINF_RATIO] = s[n] * linf[n] / (c[n] * linf[n + 1]) + sigma
    if EstimatorKind.WEAK_RAYLEIGH_PHI in kinds:
        hist.estimates[EstimatorKind.WEAK_RAYLEIGH_PHI] = sigma + hist.cross[n - 1] / (
            c[n - 1] * l2[n] ** 2
        )
    if EstimatorKind.WEAK_RAYLEIGH_V in kinds:
        hist.estimates[EstimatorKind.WEAK_RAYLEIGH_V] = hist.rq_v_direct[:m].copy()
    if EstimatorKind.CLASSIC_RAYLEIGH in kinds:
        hist.estimates[EstimatorKind.CLASSIC_RAYLEIGH] = np.array(
            [estimate_classic_rayleigh(hist.iterate(k)) for k in n]
        )
    if EstimatorKind.MU in kinds:
        if cfg.sample_point is None:
            x0 = pick_sample_point(grid, hist.final, cfg.seed)
        else:
            x0 = int(cfg.sample_point)
            if not grid.unknown_mask.ravel()[x0]:
                raise ValueError(f"sample point {x0} is not an interior node")
        hist.x0 = x0
        hist.estimates[EstimatorKind.MU] = _mu_sequence(hist, x0)
    return hist


def estimate_mu(history: IterationHistory, x0: int | None = None, n: int | None = None) -> float:
    """Pointwise quotient ``phi_n(x0)/phi_{n+1}(x0) + sigma``."""
    x0 = history.x0 if x0 is None else x0
    if x0 is None:
        raise ValueError("no sample point recorded; pass x0")
    n = history.m if n is None else n
    nxt = history.iterates[n + 1]
    if abs(nxt.ravel()[x0]) < NODAL_FRACTION * np.abs(nxt).max():
        raise NodalPoint(f"node {x0} is (nearly) nodal for iterate {n + 1}")
    return float(history.iterates[n].ravel()[x0] / (history.scale[n] * nxt.ravel()[x0]) + history.sigma)


def estimate_gamma(history: IterationHistory, n: int | None = None) -> float:
    """Signed L2-norm ratio ``s_n |phi_n|/|phi_{n+1}| + sigma``."""
    n = history.m if n is None else n
    ratio = math.exp(history.log_phi_norm(n) - history.log_phi_norm(n + 1))
    return float(history.signs[n] * ratio + history.sigma)


def estimate_linf_ratio(history: IterationHistory, n: int | None = None) -> float:
    n = history.m if n is None else n
    ratio = math.exp(history.log_phi_norm(n, "linf") - history.log_phi_norm(n + 1, "linf"))
    return float(history.signs[n] * ratio + history.sigma)


def estimate_weak_rayleigh(history: IterationHistory, variant: str = "V", n: int | None = None) -> float:
    """Gradient-free Rayleigh quotient ``sigma + <f_n, f_{n-1}>/|f_n|^2``.

    ``variant="Phi"`` evaluates it for the un-normalised iterates through the
    accumulated scale factors; ``variant="V"`` returns the value computed
    directly on the normalised iterates during the run.
    """
    n = history.m if n is None else n
    if not 1 <= n <= history.m:
        raise IndexError(f"iteration {n} outside 1..{history.m}")
    if variant.upper() == "V":
        return float(history.rq_v_direct[n - 1])
    if variant.upper() != "PHI":
        raise ValueError(f"variant must be 'Phi' or 'V', got {variant!r}")
    log_ratio = history.log_phi_scale[n - 1] - history.log_phi_scale[n]
    return float(
        history.sigma + history.cross[n - 1] * math.exp(log_ratio) / history.l2[n] ** 2
    )


def estimate_classic_rayleigh(f: GridFunction) -> float:
    """``int |grad f|^2 / int f^2`` from the discrete Dirichlet form of the stencil."""
    mass = nodal_inner(f, f)
    if mass == 0.0:
        raise ZeroStart("Rayleigh quotient of the zero function")
    return dirichlet_energy(f) / mass


def project_component(u: GridFunction, v: GridFunction) -> GridFunction:
    """``<u, v/|v|> v/|v|``: the component of ``u`` along ``v``."""
    nv = norm_l2(v)
    if nv == 0.0:
        raise ZeroStart("cannot project onto the zero function")
    unit = v / nv
    return unit * inner(u, unit)


def residual(op: ShiftedOperator, lambda_hat: float, e_hat: GridFunction) -> float:
    """``|(-Delta_h) e - lambda e|_2 / |e|_2``.

    ``op`` may carry any shift; it is added back so the residual always
    refers to the unshifted discrete Laplacian.
    """
    ne = norm_l2(e_hat)
    if ne == 0.0:
        raise ZeroStart("residual of the zero function")
    r = op.apply(e_hat) + (op.sigma - lambda_hat) * e_hat
    return norm_l2(r) / ne


@dataclass
class EigenpairResult:
    estimates: dict
    eigenfunction: GridFunction
    residual: float
    history: IterationHistory
    primary: EstimatorKind

    @property
    def eigenvalue(self) -> float:
        return self.estimates[self.primary]


PRIMARY_ORDER = (
    EstimatorKind.WEAK_RAYLEIGH_V,
    EstimatorKind.WEAK_RAYLEIGH_PHI,
    EstimatorKind.GAMMA,
    EstimatorKind.MU,
    EstimatorKind.LINF_RATIO,
    EstimatorKind.CLASSIC_RAYLEIGH,
)


def eigenpair(u0: GridFunction, op_or_sigma, cfg: IterationConfig = IterationConfig()) -> EigenpairResult:
    """Single-shift driver: iterate, then report estimates, eigenfunction and residual."""
    if isinstance(op_or_sigma, ShiftedOperator):
        op = op_or_sigma
    else:
        op = assemble_shifted(u0.grid, float(op_or_sigma))
    hist = iterate(u0, op, cfg)
    estimates = {kind: hist.estimate(kind) for kind in hist.estimates}
    primary = next(k for k in PRIMARY_ORDER if k in estimates)
    ef = hist.final
    return EigenpairResult(estimates, ef, residual(op, estimates[primary], ef), hist, primary)
