"""Bessel function J0 and its positive zeros.

J0 is evaluated by its power series for ``|x| <= 8`` and by Miller's backward
recurrence (normalised with ``J0 + 2*sum(J_2k) = 1``) beyond that. Zeros are
bracketed on ``((k - 0.75)*pi, (k + 0.25)*pi)`` and refined by bisection.
"""
import math

SERIES_LIMIT = 8.0


def _j0_series(x):
    q = -0.25 * x * x
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= q / (k * k)
        total += term
        if abs(term) < 1e-17 * max(1.0, abs(total)) and k > 2:
            return total


def _j0_miller(x):
    # Start well above x so that the neglected J_{N+1} is far below rounding.
    n_start = 2 * (int(x) + 30)
    j_next = 0.0
    j_curr = 1e-30
    norm = 0.0
    for k in range(n_start, 0, -1):
        j_prev = (2.0 * k / x) * j_curr - j_next
        j_next, j_curr = j_curr, j_prev
        if abs(j_curr) > 1e250:
            j_curr *= 1e-250
            j_next *= 1e-250
            norm *= 1e-250
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_curr
    norm += j_curr
    return j_curr / norm


def j0(x):
    """Bessel function of the first kind of order zero."""
    x = abs(float(x))
    if x <= SERIES_LIMIT:
        return _j0_series(x)
    return _j0_miller(x)


def _bisect(f, a, b, width):
    fa = f(a)
    fb = f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise ArithmeticError(f"no sign change of J0 on [{a}, {b}]")
    while b - a > width:
        mid = 0.5 * (a + b)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if fa * fm < 0.0:
            b, fb = mid, fm
        else:
            a, fa = mid, fm
    return 0.5 * (a + b)


def bessel_j0_zeros(count, width=1e-12):
    """First ``count`` positive zeros of J0 in increasing order."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return [
        _bisect(j0, (k - 0.75) * math.pi, (k + 0.25) * math.pi, width)
        for k in range(1, count + 1)
    ]
