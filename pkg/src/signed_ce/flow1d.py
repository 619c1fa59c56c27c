"""Flows of continuous 1D fields and characteristics of the stage graph field.

Two halves.  For a continuous field b > 0 on (alpha, beta) the flow is
built from F(x) = int_{x0}^x dy / b(y) as X(t, x) = F^{-1}(F(x) + t), with
F by adaptive quadrature and F^{-1} by bracketing plus Brent's method.

For the discontinuous stage field (see ``ce_residual.GraphField``)
characteristics are piecewise linear in t with slopes in {-1, 0, 1} and are
checked exactly: every piece is cut where the curve meets a breakpoint
abscissa of f or crosses the graph, and on each open sub-piece the field
along the curve is constant.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from scipy.optimize import brentq

from .ce_residual import GraphField, field_at
from .errors import BracketFailure, DomainViolation, NotMonotoneRun
from .pwl import PwlFunction, runs
from .quadrature import adaptive_simpson, gauss_legendre
from .rational import format_float, format_q, to_q

__all__ = [
    "ContinuousField1D",
    "logistic_field",
    "F_of",
    "flow",
    "endpoint_divergence",
    "pushforward",
    "pair_atoms",
    "transport_test",
    "Piece",
    "Characteristic",
    "constant_characteristic",
    "branch_characteristic",
    "shifted_piece",
    "verify_characteristic",
    "characteristic_csv",
    "logistic_closed_form",
]


@dataclass(frozen=True)
class ContinuousField1D:
    """Continuous b with b(alpha) = b(beta) = 0 and b > 0 in between."""

    b: Callable[[float], float]
    alpha: float
    beta: float
    bound: float
    x0: float
    name: str = "field"

    def __post_init__(self):
        if not self.alpha < self.x0 < self.beta:
            raise ValueError("x0 must lie in (alpha, beta)")

    def inside(self, x: float) -> bool:
        return self.alpha < x < self.beta


def logistic_field() -> ContinuousField1D:
    """b(x) = x(1 - x) on (0, 1); F(x) = log(x / (1 - x)) from x0 = 1/2."""
    return ContinuousField1D(lambda x: x * (1.0 - x), 0.0, 1.0, 0.25, 0.5, "logistic")


def F_of(cf: ContinuousField1D, x0: float, x: float, tol: float = 1e-13) -> float:
    x0, x = float(x0), float(x)
    for v in (x0, x):
        if not cf.inside(v):
            raise DomainViolation(f"{v} outside ({cf.alpha}, {cf.beta})")
    return adaptive_simpson(lambda y: 1.0 / cf.b(y), x0, x, tol, max_depth=60)


def flow(cf: ContinuousField1D, t: float, x: float, delta: float = 1e-12, tol: float = 1e-13) -> float:
    """X(t, x) = F^{-1}(F(x) + t) with F based at x.

    Basing F at x itself keeps the quadrature short; the bracket starts
    next to x and grows toward the relevant endpoint, never closer than
    ``delta``.
    """
    x, t = float(x), float(t)
    if not cf.inside(x):
        raise DomainViolation(f"{x} outside ({cf.alpha}, {cf.beta})")
    if t == 0:
        return x
    lo_lim, hi_lim = cf.alpha + delta, cf.beta - delta

    def g(y):
        return F_of(cf, x, y, tol) - t

    # F is increasing, so the root lies on the side of x given by sign(t);
    # F is accumulated segment by segment while the bracket grows
    near, F_near = x, 0.0
    gap = (hi_lim - x) if t > 0 else (x - lo_lim)
    step = gap / 2
    while True:
        far = x + step if t > 0 else x - step
        F_far = F_near + F_of(cf, near, far, tol)
        if (F_far > t) == (t > 0) or F_far == t:
            break
        near, F_near = far, F_far
        if gap - step < delta:
            raise BracketFailure(f"no bracket for flow({t}, {x}) inside the clamped domain")
        step = gap - (gap - step) / 2
    a, b = sorted((near, far))
    return brentq(g, a, b, xtol=1e-15, rtol=4 * 2.220446049250313e-16)


def endpoint_divergence(cf: ContinuousField1D, x0: float | None = None, deltas=(1e-2, 1e-4, 1e-6)):
    """F at alpha + delta and beta - delta for decreasing delta.

    Returns rows ``(delta, F(alpha + delta), F(beta - delta))``; the left
    column should fall and the right one rise without bound.
    """
    x0 = cf.x0 if x0 is None else x0
    out = []
    for d in deltas:
        out.append((d, F_of(cf, x0, cf.alpha + d, 1e-10), F_of(cf, x0, cf.beta - d, 1e-10)))
    return out


def pushforward(cf: ContinuousField1D, atoms, t: float) -> list[tuple[float, float]]:
    """Atoms of X(t, .)_# mu for mu = sum w delta_x given as ``(x, w)`` pairs."""
    return [(flow(cf, t, float(x)), w) for x, w in atoms]


def pair_atoms(atoms, g) -> float:
    return float(sum(w * g(x) for x, w in atoms))


def _d5(fun, x, h):
    """Five-point central difference."""
    return (-fun(x + 2 * h) + 8 * fun(x + h) - 8 * fun(x - h) + fun(x - 2 * h)) / (12 * h)


def transport_test(cf: ContinuousField1D, omega, tau: float, mu_bar, h: float = 1e-4, nodes: int = 16) -> float:
    """Residual of the Newton-Leibniz identity for the pushforward solution.

    With phi(t, x) = omega(X(tau - t, x)) and mu_t = X(t, .)_# mu_bar returns

        <mu_tau, phi(tau)> - <mu_bar, phi(0)> - int_0^tau <mu_t, d_t phi + b d_x phi> dt,

    which vanishes for an exact flow.  Derivatives of phi are taken by
    central differences, the time integral by a fixed Gauss rule.
    """
    atoms = [(float(x), w) for x, w in mu_bar]
    if not atoms:
        return 0.0

    def phi(t, x):
        return omega(flow(cf, tau - t, x))

    ts, ws = gauss_legendre(nodes)
    integral = 0.0
    for tn, wn in zip(ts * tau, ws * tau):
        for x, w in pushforward(cf, atoms, tn):
            dt = _d5(lambda s: phi(s, x), tn, h)
            dx = _d5(lambda y: phi(tn, y), x, h)
            integral += wn * w * (dt + cf.b(x) * dx)
    end = pair_atoms(pushforward(cf, atoms, tau), omega)
    start = pair_atoms(atoms, lambda x: phi(0.0, x))
    return end - start - integral


# -- characteristics of the stage field --------------------------------------


@dataclass(frozen=True)
class Piece:
    """gamma(t) = x_start + slope (t - t_start) on [t_start, t_end]."""

    t_start: Fraction
    t_end: Fraction
    x_start: Fraction
    slope: int

    def at(self, t) -> Fraction:
        return self.x_start + self.slope * (Fraction(t) - self.t_start)

    @property
    def x_end(self) -> Fraction:
        return self.at(self.t_end)


@dataclass(frozen=True)
class Characteristic:
    pieces: tuple[Piece, ...]
    label: str = ""

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("empty characteristic")
        for p, q in zip(self.pieces, self.pieces[1:]):
            if p.t_end != q.t_start:
                raise ValueError("pieces must tile the time interval")
        if any(p.t_start >= p.t_end for p in self.pieces):
            raise ValueError("degenerate piece")

    @property
    def knots(self) -> tuple[Fraction, ...]:
        return (self.pieces[0].t_start,) + tuple(p.t_end for p in self.pieces)

    def __call__(self, t) -> Fraction:
        t = Fraction(t)
        for p in self.pieces:
            if p.t_start <= t <= p.t_end:
                return p.at(t)
        raise ValueError(f"t = {t} outside the time interval")


def constant_characteristic(x, T=4) -> Characteristic:
    x = to_q(x)
    return Characteristic((Piece(Fraction(0), Fraction(T), x, 0),), f"const {format_q(x)}")


def _run_sign(f: PwlFunction, x: Fraction, y: Fraction) -> int:
    for a, b, sign in runs(f):
        if a <= x and y <= b and sign != 0:
            return sign
    raise NotMonotoneRun(f"[{x}, {y}] is not inside a single monotone run")


def branch_characteristic(f: PwlFunction, x, y, T=4) -> Characteristic:
    """Wait at one end of [x, y], ride the graph across it, then stay.

    The curve rests until the graph passes, follows x = f^{-1}(t) while f
    sweeps from one endpoint value to the other, and rests again.  On a
    decreasing run the graph reaches y first, so the ride goes from y to x.
    """
    x, y, T = to_q(x), to_q(y), Fraction(T)
    if x > y:
        raise ValueError("need x <= y")
    if x == y:
        return constant_characteristic(x, T)
    sign = _run_sign(f, x, y)
    start, end = (x, y) if sign > 0 else (y, x)
    t0, t1 = f(start), f(end)
    if not (0 < t0 < t1 < T):
        raise ValueError("graph times must lie inside (0, T)")
    pieces = (
        Piece(Fraction(0), t0, start, 0),
        Piece(t0, t1, start, sign),
        Piece(t1, T, end, 0),
    )
    return Characteristic(pieces, f"branch {format_q(x)}..{format_q(y)}")


def shifted_piece(gamma: Characteristic, index: int, shift) -> Characteristic:
    """Copy of gamma with one piece translated in x (negative control)."""
    shift = to_q(shift)
    pieces = list(gamma.pieces)
    p = pieces[index]
    pieces[index] = Piece(p.t_start, p.t_end, p.x_start + shift, p.slope)
    return Characteristic(tuple(pieces), f"{gamma.label} shifted")


def _cut_times(piece: Piece, f: PwlFunction) -> list[Fraction]:
    """Times in the open piece where gamma meets a breakpoint or the graph."""
    a, b = piece.t_start, piece.t_end
    cuts = set()
    if piece.slope != 0:
        for bp in f.breakpoints:
            t = piece.t_start + (bp - piece.x_start) / piece.slope
            if a < t < b:
                cuts.add(t)
    pts = sorted({a, b, *cuts})
    graph_hits = set()
    lo, hi = f.domain
    for u, v in zip(pts, pts[1:]):
        mid = (u + v) / 2
        xm = piece.at(mid)
        if not lo < xm < hi:
            continue
        # on (u, v) gamma stays inside one linear piece of f, so
        # f(gamma(t)) - t is affine in t
        m = f.slope_at(xm)
        c1 = m * piece.slope - 1
        c0 = f(xm) - mid
        if c1 != 0:
            t = mid - c0 / c1
            if u < t < v:
                graph_hits.add(t)
    return sorted({*pts, *graph_hits})


def verify_characteristic(gamma: Characteristic, gf: GraphField, samples: int = 3) -> Fraction:
    """Worst violation of the ODE, the Lipschitz bound and continuity.

    The field along each open sub-piece is constant, so checking any
    interior time is exact; ``samples`` interior times per sub-piece are
    checked anyway.
    """
    worst = Fraction(0)
    for p, q in zip(gamma.pieces, gamma.pieces[1:]):
        worst = max(worst, abs(p.x_end - q.x_start))
    for p in gamma.pieces:
        worst = max(worst, Fraction(max(0, abs(p.slope) - 1)))
        pts = _cut_times(p, gf.f)
        for u, v in zip(pts, pts[1:]):
            for j in range(1, samples + 1):
                t = u + (v - u) * Fraction(j, samples + 1)
                worst = max(worst, abs(p.slope - field_at(gf, t, p.at(t))))
    return worst


def characteristic_csv(gamma: Characteristic) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x", "t_float", "x_float"])
    rows = [(p.t_start, p.x_start) for p in gamma.pieces]
    last = gamma.pieces[-1]
    rows.append((last.t_end, last.x_end))
    for t, x in rows:
        w.writerow([format_q(t), format_q(x), format_float(t), format_float(x)])
    return buf.getvalue()


def logistic_closed_form(t: float, x: float) -> float:
    """sigma(log(x / (1 - x)) + t)."""
    z = math.log(x / (1.0 - x)) + t
    return 1.0 / (1.0 + math.exp(-z))
