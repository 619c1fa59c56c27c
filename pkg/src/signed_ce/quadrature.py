"""Quadrature rules: exact rational Newton-Cotes, adaptive Simpson, Gauss."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import QuadratureTolNotMet

__all__ = [
    "newton_cotes_weights",
    "integrate_poly_exact",
    "adaptive_simpson",
    "gauss_legendre",
    "gauss_interval",
    "gauss_adaptive",
    "gauss_region",
]


@lru_cache(maxsize=None)
def newton_cotes_weights(n: int) -> tuple[Fraction, ...]:
    """Closed Newton-Cotes weights on [0, 1] with n + 1 equispaced nodes.

    Solves the moment system exactly, so the rule integrates every
    polynomial of degree <= n without error in rational arithmetic.
    """
    if n == 0:
        return (Fraction(1),)
    nodes = [Fraction(i, n) for i in range(n + 1)]
    # augmented Vandermonde system sum_i w_i x_i^k = 1/(k+1)
    rows = [[x**k for x in nodes] + [Fraction(1, k + 1)] for k in range(n + 1)]
    size = n + 1
    for col in range(size):
        piv = next(r for r in range(col, size) if rows[r][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = 1 / rows[col][col]
        rows[col] = [v * inv for v in rows[col]]
        for r in range(size):
            if r != col and rows[r][col] != 0:
                factor = rows[r][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[col])]
    return tuple(row[-1] for row in rows)


def integrate_poly_exact(func, a: Fraction, b: Fraction, degree: int) -> Fraction:
    """Integral of a polynomial of degree <= ``degree`` over [a, b], exactly."""
    a, b = Fraction(a), Fraction(b)
    if a == b:
        return Fraction(0)
    n = max(degree, 0)
    w = newton_cotes_weights(n)
    h = b - a
    if n == 0:
        return h * func(a + h / 2)
    return h * sum(wi * func(a + h * Fraction(i, n)) for i, wi in enumerate(w))


def adaptive_simpson(func, a: float, b: float, tol: float = 1e-10, max_depth: int = 48) -> float:
    """Adaptive Simpson with Richardson correction.

    Raises QuadratureTolNotMet if some subinterval still fails the local
    test at ``max_depth``.
    """
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    fa, fm, fb = func(a), func((a + b) / 2), func(b)
    whole = (b - a) / 6 * (fa + 4 * fm + fb)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, est, eps, depth = stack.pop()
        mid = (lo + hi) / 2
        lm, rm = (lo + mid) / 2, (mid + hi) / 2
        flm, frm = func(lm), func(rm)
        left = (mid - lo) / 6 * (flo + 4 * flm + fmid)
        right = (hi - mid) / 6 * (fmid + 4 * frm + fhi)
        delta = left + right - est
        if abs(delta) <= 15 * eps:
            total += left + right + delta / 15
        elif depth >= max_depth:
            raise QuadratureTolNotMet(
                f"adaptive Simpson did not reach tol {tol} on [{lo}, {hi}]"
            )
        else:
            stack.append((lo, mid, flo, flm, fmid, left, eps / 2, depth + 1))
            stack.append((mid, hi, fmid, frm, fhi, right, eps / 2, depth + 1))
    return total


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) / 2, w / 2


def gauss_interval(func, a: float, b: float, n: int = 16) -> float:
    """Fixed-order Gauss rule; ``func`` must accept numpy arrays."""
    x, w = gauss_legendre(n)
    nodes = a + (b - a) * x
    return float((b - a) * np.dot(w, func(nodes)))


def _composite_1d(func, a: float, b: float, n: int, m: int) -> float:
    x, w = gauss_legendre(n)
    edges = np.linspace(a, b, m + 1)
    h = np.diff(edges)
    nodes = (edges[:-1, None] + h[:, None] * x[None, :]).ravel()
    weights = (h[:, None] * w[None, :]).ravel()
    return float(np.dot(weights, func(nodes)))


def gauss_adaptive(func, a: float, b: float, n: int = 16, tol: float = 1e-12, max_doublings: int = 12) -> float:
    """Composite Gauss rule, doubling the panel count until two passes agree.

    ``func`` must accept numpy arrays.
    """
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    m = 1
    prev = _composite_1d(func, a, b, n, m)
    for _ in range(max_doublings):
        m *= 2
        cur = _composite_1d(func, a, b, n, m)
        if abs(cur - prev) <= tol:
            return cur
        prev = cur
    raise QuadratureTolNotMet(f"composite Gauss on [{a}, {b}] did not settle to {tol}")


def _composite_2d(func, a, b, lo, hi, n, m):
    x, w = gauss_legendre(n)
    edges = np.linspace(a, b, m + 1)
    h = np.diff(edges)
    u = (edges[:-1, None] + h[:, None] * x[None, :]).ravel()
    wu = (h[:, None] * w[None, :]).ravel()
    v0, v1 = lo(u), hi(u)
    # m panels across the v-range at each u node
    frac = ((np.arange(m)[:, None] + x[None, :]) / m).ravel()
    wf = np.tile(w, m) / m
    V = v0[:, None] + (v1 - v0)[:, None] * frac[None, :]
    W = wu[:, None] * (v1 - v0)[:, None] * wf[None, :]
    U = np.broadcast_to(u[:, None], V.shape)
    return float(np.sum(W * func(U, V)))


def gauss_region(func, a: float, b: float, lo, hi, n: int = 12, tol: float = 1e-12, max_doublings: int = 7) -> float:
    """Integral over {a <= u <= b, lo(u) <= v <= hi(u)} by composite tensor Gauss.

    ``lo`` and ``hi`` should be smooth on [a, b] (linear in practice);
    ``func(U, V)`` is called on 2D arrays.
    """
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    m = 1
    prev = _composite_2d(func, a, b, lo, hi, n, m)
    for _ in range(max_doublings):
        m *= 2
        cur = _composite_2d(func, a, b, lo, hi, n, m)
        if abs(cur - prev) <= tol:
            return cur
        prev = cur
    raise QuadratureTolNotMet(f"composite Gauss on a region over [{a}, {b}] did not settle to {tol}")
