"""Composite Simpson inner products and norms on model-domain grids.

On the radial disk every integral carries the weight ``r``; the angular
factor ``2*pi`` is dropped because every quantity built from these integrals
is a ratio of integrals over the same measure.
"""
from __future__ import annotations

import enum
from functools import lru_cache

import numpy as np

from .domain import DomainKind, Grid, GridFunction
from .errors import GridMismatch


class InnerProductKind(enum.Enum):
    UNWEIGHTED = "unweighted"
    RADIAL_R = "radial-r"

    @classmethod
    def for_grid(cls, grid: Grid) -> "InnerProductKind":
        return cls.RADIAL_R if grid.kind is DomainKind.RADIAL_DISK else cls.UNWEIGHTED


def simpson_weights_1d(n: int, h: float) -> np.ndarray:
    if n < 3 or n % 2 == 0:
        raise ValueError(f"composite Simpson needs an odd node count >= 3, got {n}")
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


@lru_cache(maxsize=64)
def _simpson_weights(grid: Grid) -> np.ndarray:
    per_axis = [simpson_weights_1d(n, h) for n, h in zip(grid.shape, grid.spacing)]
    if grid.kind is DomainKind.RADIAL_DISK:
        w = per_axis[0] * grid.axes[0]
    elif grid.kind is DomainKind.SQUARE:
        w = np.outer(per_axis[0], per_axis[1])
    else:
        w = per_axis[0]
    w.setflags(write=False)
    return w


def simpson_weights(grid: Grid) -> np.ndarray:
    """Quadrature weights (shape ``grid.shape``) including the radial weight ``r``."""
    return _simpson_weights(grid)


@lru_cache(maxsize=64)
def _control_volumes(grid: Grid) -> np.ndarray:
    if grid.kind is DomainKind.RADIAL_DISK:
        (h,) = grid.spacing
        w = grid.axes[0] * h
        w[0] = h * h / 8.0
        w[-1] = grid.axes[0][-1] * h / 2.0
    else:
        per_axis = []
        for n, h in zip(grid.shape, grid.spacing):
            a = np.full(n, h)
            a[0] = a[-1] = h / 2.0
            per_axis.append(a)
        w = per_axis[0] if len(per_axis) == 1 else np.outer(*per_axis)
    w.setflags(write=False)
    return w


def control_volumes(grid: Grid) -> np.ndarray:
    """Cell measures of the finite-difference scheme (trapezoid-like weights).

    The radial origin cell is the disk of radius ``h/2`` (``h**2/8`` with the
    ``2*pi`` dropped). The shifted stencil is symmetric in the inner product
    defined by these weights.
    """
    return _control_volumes(grid)


def _same_grid(f: GridFunction, g: GridFunction):
    if f.grid != g.grid:
        raise GridMismatch(f"{f.grid!r} vs {g.grid!r}")


def inner(f: GridFunction, g: GridFunction) -> float:
    """Composite Simpson approximation of the (weighted) L2 inner product."""
    _same_grid(f, g)
    return float(np.sum(simpson_weights(f.grid) * f.values * g.values))


def norm_l2(f: GridFunction) -> float:
    return float(np.sqrt(max(inner(f, f), 0.0)))


def norm_linf(f: GridFunction) -> float:
    return float(np.max(np.abs(f.values)))


def nodal_inner(f: GridFunction, g: GridFunction) -> float:
    """Inner product with control-volume weights (the scheme's own measure)."""
    _same_grid(f, g)
    return float(np.sum(control_volumes(f.grid) * f.values * g.values))


def dirichlet_energy(f: GridFunction) -> float:
    """Discrete ``integral |grad f|^2`` from edge differences.

    Each edge between neighbouring nodes contributes its squared difference
    quotient times the measure of the dual face, so that for ``f`` vanishing on
    the boundary the energy equals ``nodal_inner(f, (-Delta_h) f)``.
    """
    v = f.values
    grid = f.grid
    if grid.kind is DomainKind.INTERVAL:
        (h,) = grid.spacing
        return float(np.sum(np.diff(v) ** 2) / h)
    if grid.kind is DomainKind.RADIAL_DISK:
        (h,) = grid.spacing
        r_half = grid.axes[0][:-1] + 0.5 * h
        return float(np.sum(r_half * np.diff(v) ** 2) / h)
    hx, hy = grid.spacing
    ex = np.diff(v, axis=0) ** 2 * (hy / hx)
    ey = np.diff(v, axis=1) ** 2 * (hx / hy)
    # Edges on the boundary lines have half-width dual faces.
    ex[:, 0] *= 0.5
    ex[:, -1] *= 0.5
    ey[0, :] *= 0.5
    ey[-1, :] *= 0.5
    return float(ex.sum() + ey.sum())
