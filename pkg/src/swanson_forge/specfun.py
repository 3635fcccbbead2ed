"""Classical orthogonal polynomials by three-term recurrence.

Jacobi parameters may be complex and so may the argument: the trigonometric
Rosen-Morse and hyperbolic Scarf waveforms evaluate ``P_n^{(a, conj a)}`` at
imaginary points.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateRecurrence

DEGENERACY_TOL = 1e-13


def _as_array(y):
    y = np.asarray(y)
    return y.astype(complex) if np.iscomplexobj(y) else y.astype(float)


def _result_dtype(*vals):
    return complex if any(np.iscomplexobj(v) or isinstance(v, complex) for v in vals) else float


def jacobi_recurrence(n: int, a, b, y):
    """``P_n^{(a,b)}(y)`` via the recurrence in degree.

    Raises DegenerateRecurrence when a leading coefficient vanishes.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    y = _as_array(y)
    dtype = _result_dtype(a, b, y)
    p0 = np.ones_like(y, dtype=dtype)
    if n == 0:
        return p0
    p1 = (a - b) / 2 + (1 + (a + b) / 2) * y + 0 * p0
    for k in range(2, n + 1):
        ab = a + b
        c0 = 2 * k * (k + ab) * (2 * k + ab - 2)
        if abs(c0) < DEGENERACY_TOL * max(1.0, abs(2 * k + ab) ** 3):
            raise DegenerateRecurrence(f"Jacobi recurrence coefficient vanishes at k={k} for a={a}, b={b}")
        c1 = (2 * k + ab - 1) * ((2 * k + ab) * (2 * k + ab - 2) * y + a * a - b * b)
        c2 = 2 * (k + a - 1) * (k + b - 1) * (2 * k + ab)
        p0, p1 = p1, (c1 * p1 - c2 * p0) / c0
    return p1


def _binom(z, m: int):
    """Generalized binomial C(z, m) for complex z as a falling factorial."""
    out = 1.0 + 0j if isinstance(z, complex) else 1.0
    for j in range(m):
        out = out * (z - j) / (j + 1)
    return out


def jacobi_sum(n: int, a, b, y):
    """``P_n^{(a,b)}(y)`` from the explicit finite sum; valid for every a, b."""
    y = _as_array(y)
    dtype = _result_dtype(a, b, y)
    lo, hi = (y - 1) / 2, (y + 1) / 2
    total = np.zeros_like(y, dtype=dtype)
    for k in range(n + 1):
        total = total + _binom(n + a, n - k) * _binom(n + b, k) * lo**k * hi ** (n - k)
    return total


def jacobi(n: int, a, b, y):
    """``P_n^{(a,b)}(y)``; falls back to the explicit sum on degenerate recurrences."""
    try:
        return jacobi_recurrence(n, a, b, y)
    except DegenerateRecurrence:
        return jacobi_sum(n, a, b, y)


def jacobi_derivative(n: int, a, b, y, order: int = 1):
    """``d^order/dy^order P_n^{(a,b)}`` via the parameter-raising identity."""
    y = _as_array(y)
    if order > n:
        return np.zeros_like(y, dtype=_result_dtype(a, b, y))
    scale = 1.0
    for j in range(order):
        scale = scale * (n + a + b + 1 + j) / 2
    return scale * jacobi(n - order, a + order, b + order, y)


def laguerre(n: int, a, y):
    """Generalized Laguerre ``L_n^{(a)}(y)``."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    y = _as_array(y)
    dtype = _result_dtype(a, y)
    p0 = np.ones_like(y, dtype=dtype)
    if n == 0:
        return p0
    p1 = 1 + a - y + 0 * p0
    for k in range(1, n):
        p0, p1 = p1, ((2 * k + 1 + a - y) * p1 - (k + a) * p0) / (k + 1)
    return p1


def laguerre_derivative(n: int, a, y, order: int = 1):
    y = _as_array(y)
    if order > n:
        return np.zeros_like(y, dtype=_result_dtype(a, y))
    return (-1) ** order * laguerre(n - order, a + order, y)


def hermite(n: int, y):
    """Physicists' Hermite ``H_n(y)``, ``H_{k+1} = 2y H_k - 2k H_{k-1}``."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    y = _as_array(y)
    p0 = np.ones_like(y)
    if n == 0:
        return p0
    p1 = 2 * y
    for k in range(1, n):
        p0, p1 = p1, 2 * y * p1 - 2 * k * p0
    return p1


def hermite_derivative(n: int, y, order: int = 1):
    y = _as_array(y)
    if order > n:
        return np.zeros_like(y)
    scale = 1.0
    for j in range(order):
        scale *= 2 * (n - j)
    return scale * hermite(n - order, y)
