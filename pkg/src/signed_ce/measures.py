"""Finite signed atomic measures and the 1D measure-valued solution.

For a stage function f the level measures are

    mu_tilde_t = sum over x in f^{-1}(t) of sign(f'(x)) delta_x
    mu_t       = mu_tilde_t + [t >= f(1)] delta_1 - [t >= f(0)] delta_0

computed on demand for one non-critical level at a time.  The test
functions used by the weak-form checks live here as well.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .functions import Bump, Cutoff, Polynomial
from .pwl import PwlFunction, preimages
from .rational import format_q, parse_q

__all__ = [
    "AtomicMeasure",
    "CutoffPolynomial",
    "BumpTestFunction",
    "mu_tilde_at",
    "mu_full_at",
    "total_variation",
    "pair",
]


@dataclass(frozen=True)
class AtomicMeasure:
    """Sorted ``(location, weight)`` pairs with distinct locations, no zero weights."""

    atoms: tuple[tuple[Fraction, int], ...] = ()
    allow_rational_weights: bool = False

    def __post_init__(self):
        locs = [x for x, _ in self.atoms]
        if len(set(locs)) != len(locs):
            raise ValueError("atom locations must be distinct")
        if locs != sorted(locs):
            raise ValueError("atoms must be sorted by location")
        for _, w in self.atoms:
            if w == 0:
                raise ValueError("zero-weight atom")
            if not self.allow_rational_weights and not isinstance(w, int):
                raise TypeError("weights are integers unless allow_rational_weights")

    @classmethod
    def from_pairs(cls, pairs, allow_rational_weights: bool = False) -> "AtomicMeasure":
        merged: dict = {}
        for x, w in pairs:
            x = Fraction(x)
            merged[x] = merged.get(x, 0) + w
        atoms = tuple((x, w) for x, w in sorted(merged.items()) if w != 0)
        return cls(atoms, allow_rational_weights)

    @classmethod
    def dirac(cls, x, weight: int = 1) -> "AtomicMeasure":
        return cls.from_pairs([(x, weight)])

    def __add__(self, other: "AtomicMeasure") -> "AtomicMeasure":
        return AtomicMeasure.from_pairs(
            self.atoms + other.atoms,
            self.allow_rational_weights or other.allow_rational_weights,
        )

    def __neg__(self) -> "AtomicMeasure":
        return AtomicMeasure(tuple((x, -w) for x, w in self.atoms), self.allow_rational_weights)

    def __sub__(self, other: "AtomicMeasure") -> "AtomicMeasure":
        return self + (-other)

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def locations(self) -> tuple[Fraction, ...]:
        return tuple(x for x, _ in self.atoms)

    @property
    def weights(self) -> tuple:
        return tuple(w for _, w in self.atoms)

    def to_list(self) -> list[dict]:
        return [{"x": format_q(x), "w": w if isinstance(w, int) else format_q(w)} for x, w in self.atoms]

    def to_json(self) -> str:
        return json.dumps(self.to_list())

    @classmethod
    def from_list(cls, items) -> "AtomicMeasure":
        pairs = []
        rational = False
        for item in items:
            w = item["w"]
            if isinstance(w, str):
                w = parse_q(w)
                rational = rational or w.denominator != 1
                w = int(w) if w.denominator == 1 else w
            pairs.append((parse_q(item["x"]), w))
        return cls.from_pairs(pairs, rational)

    @classmethod
    def from_json(cls, text: str) -> "AtomicMeasure":
        return cls.from_list(json.loads(text))


def mu_tilde_at(f: PwlFunction, t) -> AtomicMeasure:
    return AtomicMeasure(tuple((p.location, p.slope_sign) for p in preimages(f, t)))


def mu_full_at(f: PwlFunction, t) -> AtomicMeasure:
    t = Fraction(t)
    m = mu_tilde_at(f, t)
    lo, hi = f.domain
    corrections = []
    if t >= f.values[-1]:
        corrections.append((hi, 1))
    if t >= f.values[0]:
        corrections.append((lo, -1))
    return m + AtomicMeasure.from_pairs(corrections)


def total_variation(m: AtomicMeasure):
    return sum((abs(w) for w in m.weights), 0)


def pair(m: AtomicMeasure, g):
    """Sum of weight * g(location); exact when g is exact on Fractions."""
    return sum((w * g(x) for x, w in m.atoms), 0)


class CutoffPolynomial:
    """phi(t, x) = psi(t) p(t, x): polynomial times a C^1 time cutoff.

    With rational coefficients and cutoff knots everything is exact on
    Fractions, and along any straight line phi is piecewise polynomial of
    degree <= ``degree`` with breaks only at the cutoff knots.
    """

    kind = "polynomial-with-smooth-time-cutoff"
    exact = True

    def __init__(self, poly: Polynomial, cutoff: Cutoff | None = None, name: str = ""):
        if poly.nvars != 2:
            raise ValueError("expected a polynomial in (t, x)")
        self.poly = poly
        self.cutoff = cutoff
        self.name = name or "poly"
        self._pt = poly.diff(0)
        self._px = poly.diff(1)

    @classmethod
    def of(cls, coeffs: dict, cutoff: Cutoff | None = None, name: str = "") -> "CutoffPolynomial":
        return cls(Polynomial.from_dict(coeffs, 2), cutoff, name)

    @property
    def degree(self) -> int:
        return self.poly.degree + (Cutoff.degree if self.cutoff else 0)

    @property
    def time_knots(self) -> tuple[Fraction, ...]:
        return self.cutoff.knots if self.cutoff else ()

    def _psi(self, t):
        return self.cutoff(t) if self.cutoff else 1

    def __call__(self, t, x):
        return self._psi(t) * self.poly(t, x)

    def dt(self, t, x):
        if self.cutoff is None:
            return self._pt(t, x)
        return self.cutoff.deriv(t) * self.poly(t, x) + self.cutoff(t) * self._pt(t, x)

    def dx(self, t, x):
        return self._psi(t) * self._px(t, x)

    def __repr__(self):
        return f"CutoffPolynomial({self.name})"


class BumpTestFunction:
    """Smooth compactly supported phi(t, x), float-valued."""

    kind = "tensor bump"
    exact = False
    degree = None
    time_knots = ()

    def __init__(self, center, radius, scale: float = 1.0, name: str = ""):
        self.bump = Bump(tuple(map(float, center)), tuple(map(float, radius)), scale)
        self.name = name or "bump"

    def __call__(self, t, x):
        return self.bump(t, x)

    def dt(self, t, x):
        return self.bump.grad(t, x)[0]

    def dx(self, t, x):
        return self.bump.grad(t, x)[1]

    def __repr__(self):
        return f"BumpTestFunction({self.name})"
