"""Model domains, their grids, grid functions and reference spectra."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .bessel import bessel_j0_zeros
from .errors import GridError, GridMismatch


class DomainKind(enum.Enum):
    INTERVAL = "interval"
    RADIAL_DISK = "disk"
    SQUARE = "square"

    @classmethod
    def parse(cls, name: str) -> "DomainKind":
        aliases = {"radialdisk": cls.RADIAL_DISK, "radial": cls.RADIAL_DISK}
        key = name.strip().lower()
        if key in aliases:
            return aliases[key]
        return cls(key)


@dataclass(frozen=True)
class DomainSpec:
    """One of the three model domains.

    ``extent`` is the length of the interval, the radius of the disk or the
    side of the square.
    """

    kind: DomainKind
    extent: float = 1.0

    def __post_init__(self):
        if not (self.extent > 0 and math.isfinite(self.extent)):
            raise GridError(f"extent must be positive and finite, got {self.extent!r}")

    @property
    def dim(self) -> int:
        """Dimension N of the physical domain (the radial disk is 2-D)."""
        return 1 if self.kind is DomainKind.INTERVAL else 2

    @property
    def radial(self) -> bool:
        return self.kind is DomainKind.RADIAL_DISK

    @property
    def volume(self) -> float:
        if self.kind is DomainKind.INTERVAL:
            return self.extent
        if self.kind is DomainKind.SQUARE:
            return self.extent**2
        return math.pi * self.extent**2


INTERVAL = DomainSpec(DomainKind.INTERVAL)
DISK = DomainSpec(DomainKind.RADIAL_DISK)
SQUARE = DomainSpec(DomainKind.SQUARE)


@dataclass(frozen=True)
class Grid:
    """Uniform node grid including boundary nodes.

    For the square, ``shape == (nx, ny)`` and ``values[i, j]`` sits at
    ``(i*hx, j*hy)``. For the radial disk the single axis is the radius, node 0
    is the origin and the last node is the Dirichlet boundary ``r = R``.
    """

    spec: DomainSpec
    shape: tuple
    spacing: tuple

    @property
    def kind(self) -> DomainKind:
        return self.spec.kind

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @cached_property
    def axes(self) -> list:
        return [np.arange(n) * h for n, h in zip(self.shape, self.spacing)]

    @cached_property
    def unknown_mask(self) -> np.ndarray:
        """True at nodes carrying an unknown (everything but the Dirichlet boundary)."""
        mask = np.zeros(self.shape, dtype=bool)
        if self.kind is DomainKind.INTERVAL:
            mask[1:-1] = True
        elif self.kind is DomainKind.RADIAL_DISK:
            mask[:-1] = True
        else:
            mask[1:-1, 1:-1] = True
        mask.setflags(write=False)
        return mask

    @property
    def unknown_count(self) -> int:
        return int(self.unknown_mask.sum())

    def coordinates(self, index: int) -> tuple:
        """Physical coordinates of the node with flat (row-major) ``index``."""
        multi = np.unravel_index(index, self.shape)
        return tuple(float(i * h) for i, h in zip(multi, self.spacing))

    def mesh(self) -> list:
        """Coordinate arrays broadcast to ``shape`` (``indexing='ij'``)."""
        return np.meshgrid(*self.axes, indexing="ij")

    def __repr__(self):
        dims = "x".join(str(n) for n in self.shape)
        return f"Grid({self.kind.value}, {dims})"


def build_grid(spec: DomainSpec, nodes) -> Grid:
    """Build a uniform grid with ``nodes`` nodes per axis (boundary included).

    ``nodes`` is an int, or for the square optionally a pair ``(nx, ny)``.
    Every axis needs an odd node count of at least 5, because composite
    Simpson needs an even number of intervals.
    """
    if isinstance(nodes, (int, np.integer)):
        counts = (int(nodes),) * (2 if spec.kind is DomainKind.SQUARE else 1)
    else:
        counts = tuple(int(n) for n in nodes)
        if spec.kind is DomainKind.SQUARE and len(counts) == 1:
            counts = counts * 2
    expected = 2 if spec.kind is DomainKind.SQUARE else 1
    if len(counts) != expected:
        raise GridError(f"{spec.kind.value} grid needs {expected} node count(s), got {counts}")
    for n in counts:
        if n < 5:
            raise GridError(f"need at least 5 nodes per axis, got {n}")
        if n % 2 == 0:
            raise GridError(
                f"node count {n} is even: composite Simpson needs an odd node count "
                "(an even number of intervals) on every axis"
            )
    spacing = tuple(spec.extent / (n - 1) for n in counts)
    return Grid(spec, counts, spacing)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values of a function at the nodes of a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.shape:
            try:
                values = values.reshape(self.grid.shape)
            except ValueError:
                raise GridError(
                    f"{values.size} values do not fit grid of shape {self.grid.shape}"
                ) from None
        if not np.all(np.isfinite(values)):
            raise GridError("grid function has non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def _check(self, other):
        if isinstance(other, GridFunction) and other.grid != self.grid:
            raise GridMismatch(f"{self.grid!r} vs {other.grid!r}")

    def _operand(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return other.values
        return other

    def __add__(self, other):
        return GridFunction(self.grid, self.values + self._operand(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - self._operand(other))

    def __rsub__(self, other):
        return GridFunction(self.grid, self._operand(other) - self.values)

    def __mul__(self, other):
        return GridFunction(self.grid, self.values * self._operand(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return GridFunction(self.grid, self.values / self._operand(other))

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.shape))


def sample_function(grid: Grid, f: Callable) -> GridFunction:
    """Evaluate the pointwise rule ``f`` at every node.

    ``f`` receives one coordinate array per axis (broadcast to the grid shape)
    and may return an array or a scalar.
    """
    with np.errstate(all="ignore"):
        values = np.broadcast_to(np.asarray(f(*grid.mesh()), dtype=float), grid.shape)
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise GridError(f"rule is not finite at node {grid.coordinates(bad)}")
    return GridFunction(grid, values)


@dataclass(frozen=True)
class ExactSpectrum:
    eigenvalues: np.ndarray
    labels: list
    provenance: str  # "analytic" or "oracle"

    def __len__(self):
        return len(self.eigenvalues)

    def __getitem__(self, i):
        return float(self.eigenvalues[i])

    def distinct(self, rtol: float = 1e-12) -> list:
        """(eigenvalue, [labels]) groups with multiplicities merged."""
        groups = []
        for lam, label in zip(self.eigenvalues, self.labels):
            if groups and abs(lam - groups[-1][0]) <= rtol * lam:
                groups[-1][1].append(label)
            else:
                groups.append((float(lam), [label]))
        return groups


def _square_pairs(count):
    bound = max(8, int(math.sqrt(count)) + 2)
    while True:
        n = np.arange(1, bound + 1)
        nn, mm = np.meshgrid(n, n, indexing="ij")
        keys = (nn**2 + mm**2).ravel()
        limit = bound**2 + 1
        inside = keys <= limit
        if inside.sum() >= count:
            order = np.lexsort((mm.ravel()[inside], nn.ravel()[inside], keys[inside]))
            pairs = np.stack([nn.ravel()[inside], mm.ravel()[inside]], axis=1)[order]
            return [(int(a), int(b)) for a, b in pairs[:count]]
        bound *= 2


def exact_eigenvalues(spec: DomainSpec, count: int) -> ExactSpectrum:
    """The first ``count`` Dirichlet eigenvalues of the continuous problem."""
    if count < 1:
        raise ValueError("count must be >= 1")
    scale = 1.0 / spec.extent**2
    if spec.kind is DomainKind.INTERVAL:
        k = np.arange(1, count + 1)
        return ExactSpectrum(k**2 * math.pi**2 * scale, [int(i) for i in k], "analytic")
    if spec.kind is DomainKind.SQUARE:
        pairs = _square_pairs(count)
        lam = np.array([(n * n + m * m) * math.pi**2 * scale for n, m in pairs])
        return ExactSpectrum(lam, pairs, "analytic")
    zeros = np.array(bessel_j0_zeros(count))
    return ExactSpectrum(zeros**2 * scale, list(range(1, count + 1)), "oracle")


def discrete_eigenvalue(grid: Grid, label) -> float:
    """Eigenvalue of the finite-difference Laplacian for an interval or square mode."""
    if grid.kind is DomainKind.INTERVAL:
        (h,) = grid.spacing
        return 4.0 / h**2 * math.sin(label * math.pi * h / (2 * grid.spec.extent)) ** 2
    if grid.kind is DomainKind.SQUARE:
        n, m = label
        hx, hy = grid.spacing
        ext = grid.spec.extent
        return 4.0 / hx**2 * math.sin(n * math.pi * hx / (2 * ext)) ** 2 + 4.0 / hy**2 * math.sin(
            m * math.pi * hy / (2 * ext)
        ) ** 2
    raise ValueError("no closed form for the radial disk")


_UNIT_BALL = {1: 2.0, 2: math.pi}


def weyl_constant(spec: DomainSpec) -> float:
    """C = ((N+2)/N) * (omega_N |Omega|)^(2/N) / (4 pi^2)."""
    n = spec.dim
    return (n + 2) / n * (_UNIT_BALL[n] * spec.volume) ** (2.0 / n) / (4 * math.pi**2)


def weyl_shift_seeds(spec: DomainSpec, count: int) -> list:
    """Lower bounds j^(2/N) / C for the first ``count`` eigenvalues."""
    if count < 1:
        raise ValueError("count must be >= 1")
    c = weyl_constant(spec)
    return [j ** (2.0 / spec.dim) / c for j in range(1, count + 1)]


def parse_nodes(text: str | int | Sequence[int]):
    """Parse ``"101"`` or ``"201x201"`` into an int or tuple."""
    if isinstance(text, (int, np.integer)):
        return int(text)
    if not isinstance(text, str):
        return tuple(int(t) for t in text)
    parts = text.lower().split("x")
    if len(parts) == 1:
        return int(parts[0])
    return tuple(int(p) for p in parts)
