"""Exception hierarchy shared by all modules."""


class InvShiftError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class GridError(InvShiftError, ValueError):
    """Invalid grid construction or non-finite sampled values."""

    exit_code = 2


class GridMismatch(InvShiftError, ValueError):
    """Two grid functions (or a function and an operator) live on different grids."""

    exit_code = 2


class NearSingularShift(InvShiftError):
    """The shift coincides (numerically) with a discrete eigenvalue."""

    exit_code = 3

    def __init__(self, sigma, pivot_min, threshold):
        self.sigma = sigma
        self.pivot_min = pivot_min
        self.threshold = threshold
        super().__init__(
            f"shift sigma={sigma!r} is numerically a discrete eigenvalue: "
            f"smallest pivot {pivot_min:.3e} below threshold {threshold:.3e}"
        )


class ZeroStart(InvShiftError, ValueError):
    exit_code = 4


class NodalPoint(InvShiftError):
    """Pointwise quotient requested at a node where the iterate (nearly) vanishes."""

    exit_code = 5


class NoValidPoint(InvShiftError):
    exit_code = 6


class EmptyResult(InvShiftError):
    """No spectral component survived the coefficient tolerance."""

    exit_code = 7
