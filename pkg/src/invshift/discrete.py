"""Finite-difference shifted operator ``-Delta_h - sigma I`` and its LU solves.

Unknowns are the non-Dirichlet nodes of the grid (the radial origin is an
unknown); Dirichlet nodes are pinned to zero. The matrix is factorised once
per shift with LU and partial pivoting and reused for every solve:

* interval and radial disk: tridiagonal LAPACK ``?gttrf``/``?gttrs``;
* square: banded LAPACK ``?gbtrf``/``?gbtrs`` in the natural row-major
  ordering while the band fits in ``BAND_MEMORY_LIMIT`` bytes, SuperLU
  (``scipy.sparse.linalg.splu``) for larger grids.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lapack
from scipy.sparse.linalg import splu

from .domain import DomainKind, Grid, GridFunction
from .errors import GridMismatch, NearSingularShift

#: A pivot below ``SINGULAR_RTOL * max|a_ij|`` means the shift is
#: numerically a discrete eigenvalue.
SINGULAR_RTOL = 1e-12
BAND_MEMORY_LIMIT = 1.0e9


def _tridiagonal(grid: Grid):
    """Sub-, main and super-diagonal of -Delta_h on the 1-D unknowns."""
    (h,) = grid.spacing
    n = grid.unknown_count
    if grid.kind is DomainKind.INTERVAL:
        main = np.full(n, 2.0 / h**2)
        off = np.full(n - 1, -1.0 / h**2)
        return off, main, off.copy()
    # Radial flux form; row 0 is the r -> 0 limit 4(phi_0 - phi_1)/h^2.
    r = grid.axes[0][:n]
    main = np.empty(n)
    lower = np.empty(n - 1)
    upper = np.empty(n - 1)
    main[0] = 4.0 / h**2
    upper[0] = -4.0 / h**2
    ri = r[1:]
    r_plus = ri + 0.5 * h
    r_minus = ri - 0.5 * h
    main[1:] = (r_plus + r_minus) / (ri * h**2)
    lower[:] = -r_minus / (ri * h**2)
    upper[1:] = -r_plus[:-1] / (ri[:-1] * h**2)
    return lower, main, upper


def laplacian_matrix(grid: Grid) -> sp.csr_matrix:
    """Sparse ``-Delta_h`` acting on the unknowns (row-major for the square)."""
    if grid.kind is DomainKind.SQUARE:
        nx, ny = (n - 2 for n in grid.shape)
        hx, hy = grid.spacing
        tx = sp.diags([-np.ones(nx - 1), 2 * np.ones(nx), -np.ones(nx - 1)], [-1, 0, 1]) / hx**2
        ty = sp.diags([-np.ones(ny - 1), 2 * np.ones(ny), -np.ones(ny - 1)], [-1, 0, 1]) / hy**2
        # y index varies fastest
        return (sp.kron(tx, sp.eye(ny)) + sp.kron(sp.eye(nx), ty)).tocsr()
    lower, main, upper = _tridiagonal(grid)
    return sp.diags([lower, main, upper], [-1, 0, 1], format="csr")


@dataclass(frozen=True, eq=False)
class ShiftedOperator:
    """Factorised ``-Delta_h - sigma I`` on one grid. Immutable once built."""

    grid: Grid
    sigma: float
    backend: str
    pivot_min: float
    max_entry: float
    _base: Any = field(repr=False)
    _factors: Any = field(repr=False)

    @property
    def threshold(self) -> float:
        return SINGULAR_RTOL * self.max_entry

    def _interior(self, f: GridFunction) -> np.ndarray:
        if f.grid != self.grid:
            raise GridMismatch(f"function on {f.grid!r}, operator on {self.grid!r}")
        return f.values[self.grid.unknown_mask]

    def _embed(self, x: np.ndarray) -> GridFunction:
        out = np.zeros(self.grid.shape)
        out[self.grid.unknown_mask] = x
        return GridFunction(self.grid, out)

    def solve_array(self, b: np.ndarray) -> np.ndarray:
        """Solve on the unknown vector directly (no boundary handling)."""
        if self.backend == "tridiagonal":
            dl, d, du, du2, ipiv = self._factors
            x, info = lapack.dgttrs(dl, d, du, du2, ipiv, b)
        elif self.backend == "banded":
            lub, ipiv, kl, ku = self._factors
            x, info = lapack.dgbtrs(lub, kl, ku, b, ipiv)
        else:
            return self._factors.solve(b)
        if info != 0:
            raise RuntimeError(f"LAPACK solve failed with info={info}")
        return x

    def apply_array(self, x: np.ndarray) -> np.ndarray:
        return self._base @ x - self.sigma * x

    def solve(self, rhs: GridFunction) -> GridFunction:
        """phi with (-Delta_h - sigma) phi = rhs at unknowns, phi = 0 on the boundary.

        Boundary values of ``rhs`` are ignored (Dirichlet rows are pinned).
        """
        return self._embed(self.solve_array(self._interior(rhs)))

    def apply(self, f: GridFunction) -> GridFunction:
        """Stencil product at the unknowns; boundary values of ``f`` are taken as 0."""
        return self._embed(self.apply_array(self._interior(f)))


def assemble_shifted(grid: Grid, sigma: float, backend: str | None = None) -> ShiftedOperator:
    """Assemble and factorise ``-Delta_h - sigma I`` on ``grid``.

    Raises
    ------
    NearSingularShift
        If the smallest pivot falls below ``SINGULAR_RTOL`` times the largest
        matrix entry, i.e. ``sigma`` is numerically a discrete eigenvalue.
    """
    sigma = float(sigma)
    if not math.isfinite(sigma):
        raise ValueError(f"shift must be finite, got {sigma!r}")
    base = laplacian_matrix(grid)
    if backend is None:
        if grid.kind is DomainKind.SQUARE:
            kl = grid.shape[1] - 2
            band_bytes = (3 * kl + 1) * grid.unknown_count * 8
            backend = "banded" if band_bytes <= BAND_MEMORY_LIMIT else "superlu"
        else:
            backend = "tridiagonal"

    if backend == "tridiagonal":
        if grid.kind is DomainKind.SQUARE:
            raise ValueError("tridiagonal backend only applies to 1-D grids")
        lower, main, upper = _tridiagonal(grid)
        shifted = main - sigma
        max_entry = float(max(np.abs(shifted).max(), np.abs(lower).max(), np.abs(upper).max()))
        dl, d, du, du2, ipiv, info = lapack.dgttrf(lower.copy(), shifted, upper.copy())
        pivots = d
        factors = (dl, d, du, du2, ipiv)
    elif backend == "banded":
        kl = ku = grid.shape[1] - 2
        a = (base - sigma * sp.eye(base.shape[0])).todia()
        ab = np.zeros((2 * kl + ku + 1, base.shape[0]))
        for offset, diag in zip(a.offsets, a.data):
            ab[kl + ku - offset, :] = diag
        max_entry = float(np.abs(a.data).max())
        lub, ipiv, info = lapack.dgbtrf(ab, kl, ku)
        pivots = lub[kl + ku]
        factors = (lub, ipiv, kl, ku)
    elif backend == "superlu":
        a = (base - sigma * sp.eye(base.shape[0])).tocsc()
        max_entry = float(np.abs(a.data).max())
        try:
            factors = splu(a)
        except RuntimeError:  # exactly singular
            raise NearSingularShift(sigma, 0.0, SINGULAR_RTOL * max_entry) from None
        pivots = factors.U.diagonal()
        info = 0
    else:
        raise ValueError(f"unknown backend {backend!r}")

    pivot_min = float(np.abs(pivots).min())
    threshold = SINGULAR_RTOL * max_entry
    if info > 0 or pivot_min < threshold:
        raise NearSingularShift(sigma, pivot_min, threshold)
    return ShiftedOperator(grid, sigma, backend, pivot_min, max_entry, base, factors)


def solve(op: ShiftedOperator, rhs: GridFunction) -> GridFunction:
    return op.solve(rhs)


def apply(op: ShiftedOperator, f: GridFunction) -> GridFunction:
    return op.apply(f)
