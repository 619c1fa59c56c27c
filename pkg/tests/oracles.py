"""Independent reference computations used to freeze expected values.

Nothing here imports the package's construction or integration code.  The
stage construction is redone by brute force over the width exponent, slope
signs come from the parity of covering flips, f from direct integration of
that parity, and curve integrals from sympy.
"""
from __future__ import annotations

from fractions import Fraction

import sympy as sp


def bfs_dyadics(n: int) -> list[Fraction]:
    out: list[Fraction] = []
    level = 1
    while len(out) < n:
        out.extend(Fraction(m, 2**level) for m in range(1, 2**level, 2))
        level += 1
    return out[:n]


def oracle_stage(K: int):
    """(eps list, flips list) by scanning j = 1, 2, ... for the first admissible width."""
    eps = [Fraction(1)]
    flips: list[tuple[Fraction, Fraction]] = []
    E = [Fraction(0), Fraction(1)]
    for k, q in enumerate(bfs_dyadics(K), start=1):
        j = 1
        while True:
            e = Fraction(1, 3 * 2**j)
            if e < eps[-1] / 2**k and q - e >= 0 and q + e <= 1 and not any(q - e < p < q + e for p in E):
                break
            j += 1
        eps.append(e)
        a, b = q - e / 2, q + e / 2
        flips.append((a, b))
        E += [a, b]
    return eps, flips


def parity_sign(flips, x: Fraction) -> int:
    """(-1)^(number of flips whose open interval contains x); 0 on endpoints."""
    if any(x in (a, b) for a, b in flips) or x in (0, 1):
        return 0
    n = sum(1 for a, b in flips if a < x < b)
    return -1 if n % 2 else 1


def oracle_f(flips, x: Fraction) -> Fraction:
    """2 + int_0^x of the parity sign, integrating between sorted endpoints."""
    pts = sorted({Fraction(0), Fraction(x), *(p for ab in flips for p in ab if p < x)})
    total = Fraction(2)
    for u, v in zip(pts, pts[1:]):
        total += parity_sign(flips, (u + v) / 2) * (v - u)
    return total


def oracle_masses(flips, a: Fraction, b: Fraction) -> tuple[Fraction, Fraction]:
    pts = sorted({a, b, *(p for ab in flips for p in ab if a < p < b)})
    pos = neg = Fraction(0)
    for u, v in zip(pts, pts[1:]):
        if parity_sign(flips, (u + v) / 2) > 0:
            pos += v - u
        else:
            neg += v - u
    return pos, neg


def brute_count(xs, vs, t) -> int:
    return sum(1 for i in range(len(xs) - 1) if min(vs[i], vs[i + 1]) < t < max(vs[i], vs[i + 1]))


def brute_sup_count(xs, vs) -> int:
    crit = sorted(set(vs))
    return max(brute_count(xs, vs, (a + b) / 2) for a, b in zip(crit, crit[1:]))


# -- symbolic curve integral ----------------------------------------------------------

T_SYM, X_SYM = sp.symbols("t x")


def sympy_cutoff(a0, a1, b1, b0):
    """The C^1 plateau as a list of (lo, hi, expression in t)."""
    t = T_SYM
    a0, a1, b1, b0 = map(sp.Rational, (a0, a1, b1, b0))
    up = (t - a0) / (a1 - a0)
    down = (b0 - t) / (b0 - b1)
    return [
        (a0, a1, 3 * up**2 - 2 * up**3),
        (a1, b1, sp.Integer(1)),
        (b1, b0, 3 * down**2 - 2 * down**3),
    ]


def sympy_curve_integral(xs, vs, coeffs: dict, cutoff) -> sp.Rational:
    """int_0^1 f'(x) d_t phi(f(x), x) + d_x phi(f(x), x) dx with phi = psi(t) p(t, x)."""
    t, x = T_SYM, X_SYM
    p = sum(sp.Rational(c.numerator, c.denominator) * t**i * x**j for (i, j), c in ((k, Fraction(v)) for k, v in coeffs.items()))
    pieces = sympy_cutoff(*cutoff)
    total = sp.Integer(0)
    for i in range(len(xs) - 1):
        x0, x1 = sp.Rational(xs[i]), sp.Rational(xs[i + 1])
        v0, v1 = sp.Rational(vs[i]), sp.Rational(vs[i + 1])
        m = (v1 - v0) / (x1 - x0)
        line = v0 + m * (x - x0)
        for lo, hi, psi in pieces:
            phi = psi * p
            integrand = (m * sp.diff(phi, t) + sp.diff(phi, x)).subs(t, line)
            # x-range of this piece where the line lies in [lo, hi]
            if m > 0:
                xa, xb = x0 + (lo - v0) / m, x0 + (hi - v0) / m
            else:
                xa, xb = x0 + (hi - v0) / m, x0 + (lo - v0) / m
            xa, xb = max(xa, x0), min(xb, x1)
            if xa < xb:
                total += sp.integrate(sp.expand(integrand), (x, xa, xb))
    return sp.nsimplify(total)


def sympy_value(coeffs: dict, cutoff, tv, xv) -> sp.Rational:
    t, x = T_SYM, X_SYM
    p = sum(sp.Rational(Fraction(c).numerator, Fraction(c).denominator) * t**i * x**j for (i, j), c in coeffs.items())
    tv = sp.Rational(tv)
    for lo, hi, psi in sympy_cutoff(*cutoff):
        if lo <= tv <= hi:
            return (psi * p).subs({t: tv, x: sp.Rational(xv)})
    return sp.Integer(0)
