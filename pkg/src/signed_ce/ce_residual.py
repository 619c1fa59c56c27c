"""Weak-form residuals of the continuity equation for the graph field.

The field is b(t, x) = 1/f'(x) on the graph {t = f(x)} and 0 elsewhere.
Pairing the level measures mu_tilde_t against d_t phi + b d_x phi turns,
via the area formula, into a curve integral along the graph,

    int_0^1 f'(x) (d_t phi)(f(x), x) + (d_x phi)(f(x), x) dx,

which is integrated piece by piece over the linear pieces of f.  For
CutoffPolynomial test functions the integrand is polynomial between knots
and the result is exact; otherwise adaptive Simpson is used.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction

from .errors import SupportViolation
from .functions import Cutoff
from .measures import BumpTestFunction, CutoffPolynomial
from .pwl import PwlFunction
from .quadrature import adaptive_simpson, integrate_poly_exact
from .rational import format_float, format_q

__all__ = [
    "GraphField",
    "field_at",
    "defect",
    "residual_tilde",
    "residual_full",
    "canonical_test_function",
    "polynomial_suite",
    "bump_suite",
    "ResidualRow",
    "residual_rows",
]

DEFAULT_T = Fraction(4)


@dataclass(frozen=True)
class GraphField:
    f: PwlFunction
    T: Fraction = DEFAULT_T

    def __post_init__(self):
        lo, hi = self.f.value_range()
        if not (0 < lo and hi < self.T):
            raise ValueError("range of f must lie inside (0, T)")


def field_at(gf: GraphField, t, x) -> Fraction:
    """1/f'(x) if (t, x) is on the graph away from breakpoints, else 0."""
    t, x = Fraction(t), Fraction(x)
    f = gf.f
    lo, hi = f.domain
    if not lo <= x <= hi:
        return Fraction(0)
    i = bisect.bisect_left(f.breakpoints, x)
    if i < len(f.breakpoints) and f.breakpoints[i] == x:
        return Fraction(0)
    if f(x) != t:
        return Fraction(0)
    return 1 / f.slopes[i - 1]


def defect(gf: GraphField, phi):
    """phi(f(1), 1) - phi(f(0), 0)."""
    f = gf.f
    (x0, x1), (v0, v1) = f.domain, (f.values[0], f.values[-1])
    return phi(v1, x1) - phi(v0, x0)


def _split_points(x0, x1, v0, v1, knots):
    """x-values in (x0, x1) where the linear piece crosses a time knot."""
    out = []
    for k in knots:
        if min(v0, v1) < k < max(v0, v1):
            out.append(x0 + (k - v0) * (x1 - x0) / (v1 - v0))
    return sorted(out)


def residual_tilde(gf: GraphField, phi, tol: float = 1e-10):
    f = gf.f
    total = Fraction(0) if phi.exact else 0.0
    length = f.domain[1] - f.domain[0]
    for x0, x1, v0, v1 in f.segments():
        m = (v1 - v0) / (x1 - x0)
        if phi.exact:
            def integrand(x, x0=x0, v0=v0, m=m):
                t = v0 + m * (x - x0)
                return m * phi.dt(t, x) + phi.dx(t, x)

            cuts = [x0, *_split_points(x0, x1, v0, v1, phi.time_knots), x1]
            for a, b in zip(cuts, cuts[1:]):
                total += integrate_poly_exact(integrand, a, b, phi.degree)
        else:
            fx0, fv0, fm = float(x0), float(v0), float(m)

            def integrand(x, fx0=fx0, fv0=fv0, fm=fm):
                t = fv0 + fm * (x - fx0)
                return fm * phi.dt(t, x) + phi.dx(t, x)

            total += adaptive_simpson(integrand, float(x0), float(x1), tol * float((x1 - x0) / length))
    return total


def _time_integral_of_dt(phi, x, t0, t1, tol):
    """int_{t0}^{t1} d_t phi(t, x) dt."""
    if phi.exact:
        cuts = [t0, *sorted(k for k in phi.time_knots if t0 < k < t1), t1]
        return sum(
            (integrate_poly_exact(lambda t: phi.dt(t, x), a, b, phi.degree) for a, b in zip(cuts, cuts[1:])),
            Fraction(0),
        )
    return adaptive_simpson(lambda t: phi.dt(t, float(x)), float(t0), float(t1), tol)


def residual_full(gf: GraphField, phi, tol: float = 1e-10):
    """Weak residual of mu_t (graph measures plus the two static atoms).

    Zero initial data means the right-hand side of the weak formulation
    vanishes, so the returned value should be 0.
    """
    f, T = gf.f, gf.T
    probe = {f.domain[0], f.domain[1], *f.breakpoints}
    for x in probe:
        val = phi(T if phi.exact else float(T), x if phi.exact else float(x))
        if val != 0:
            raise SupportViolation(f"phi(T, {x}) = {val} != 0")
    (x0, x1), (v0, v1) = f.domain, (f.values[0], f.values[-1])
    if not phi.exact:
        x0, x1 = float(x0), float(x1)
    static = _time_integral_of_dt(phi, x1, v1, T, tol) - _time_integral_of_dt(phi, x0, v0, T, tol)
    return residual_tilde(gf, phi, tol) + static


def _cutoff() -> Cutoff:
    return Cutoff.of(Fraction(1, 2), 1, 3, Fraction(7, 2))


def canonical_test_function() -> CutoffPolynomial:
    """phi(t, x) = x psi(t), psi = 1 on [1, 3] and supported in (1/2, 7/2)."""
    return CutoffPolynomial.of({(0, 1): 1}, _cutoff(), "x*psi")


def polynomial_suite() -> list[CutoffPolynomial]:
    """Twelve rational-polynomial test functions with the standard cutoff."""
    psi = _cutoff()
    specs = [
        ("x", {(0, 1): 1}),
        ("1", {(0, 0): 1}),
        ("t", {(1, 0): 1}),
        ("t*x", {(1, 1): 1}),
        ("x^2", {(0, 2): 1}),
        ("t^2-x", {(2, 0): 1, (0, 1): -1}),
        ("x^3-2tx+1/3", {(0, 3): 1, (1, 1): -2, (0, 0): Fraction(1, 3)}),
        ("t^2x^2", {(2, 2): 1}),
        ("(t-2)^3", {(3, 0): 1, (2, 0): -6, (1, 0): 12, (0, 0): -8}),
        ("5/7x^4-t", {(0, 4): Fraction(5, 7), (1, 0): -1}),
        ("tx^3+x", {(1, 3): 1, (0, 1): 1}),
        ("t^3x-3/2x^2", {(3, 1): 1, (0, 2): Fraction(-3, 2)}),
    ]
    return [CutoffPolynomial.of(c, psi, name) for name, c in specs]


def bump_suite() -> list[BumpTestFunction]:
    """Smooth bumps supported in t in (0, 4); several cover the graph endpoints."""
    return [
        BumpTestFunction((2.3, 0.5), (1.6, 1.2), name="bump-wide"),
        BumpTestFunction((2.0, 0.0), (0.9, 0.7), name="bump-start"),
        BumpTestFunction((2.6, 1.0), (0.8, 0.6), 2.0, name="bump-end"),
        BumpTestFunction((2.25, 0.3), (0.3, 0.25), name="bump-narrow"),
        BumpTestFunction((2.5, 0.6), (1.4, 0.9), -1.5, name="bump-neg"),
    ]


@dataclass(frozen=True)
class ResidualRow:
    stage: int
    test_function: str
    residual: object
    defect: object
    full_residual: object
    mode: str
    tol: float

    def as_dict(self) -> dict:
        def enc(v):
            return format_q(v) if isinstance(v, Fraction) else format_float(v)

        return {
            "stage": self.stage,
            "test_function": self.test_function,
            "residual": enc(self.residual),
            "defect": enc(self.defect),
            "full_residual": enc(self.full_residual),
            "mode": self.mode,
            "tol": self.tol,
        }


def residual_rows(stage: int, gf: GraphField, suite, tol: float = 1e-10) -> list[ResidualRow]:
    rows = []
    for phi in suite:
        rows.append(
            ResidualRow(
                stage=stage,
                test_function=phi.name,
                residual=residual_tilde(gf, phi, tol),
                defect=defect(gf, phi),
                full_residual=residual_full(gf, phi, tol),
                mode="exact" if phi.exact else "float",
                tol=tol,
            )
        )
    return rows

