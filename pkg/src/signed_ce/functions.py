"""Smooth test functions: polynomials, C^1 cutoffs and exponential bumps.

Polynomials and cutoffs evaluate exactly on Fractions and elementwise on
numpy arrays.  Bumps are float-only.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = ["Polynomial", "Cutoff", "Bump"]


@dataclass(frozen=True)
class Polynomial:
    """Multivariate polynomial; ``terms`` maps exponent tuples to coefficients."""

    terms: tuple[tuple[tuple[int, ...], Fraction], ...]
    nvars: int

    @classmethod
    def from_dict(cls, coeffs: dict, nvars: int) -> "Polynomial":
        clean = []
        for exps, c in sorted(coeffs.items()):
            exps = tuple(exps)
            if len(exps) != nvars:
                raise ValueError("exponent tuple has wrong length")
            c = Fraction(c)
            if c != 0:
                clean.append((exps, c))
        return cls(tuple(clean), nvars)

    @classmethod
    def constant(cls, c, nvars: int) -> "Polynomial":
        return cls.from_dict({(0,) * nvars: c}, nvars)

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    def __call__(self, *args):
        if any(isinstance(a, np.ndarray) for a in args):
            args = [np.asarray(a, dtype=float) for a in args]
            out = np.zeros(np.broadcast(*args).shape)
            for exps, c in self.terms:
                term = float(c)
                for a, e in zip(args, exps):
                    if e:
                        term = term * a**e
                out = out + term
            return out
        total = 0
        for exps, c in self.terms:
            term = c
            for a, e in zip(args, exps):
                if e:
                    term = term * a**e
            total = total + term
        return total

    def diff(self, var: int) -> "Polynomial":
        out: dict = {}
        for exps, c in self.terms:
            e = exps[var]
            if e:
                new = exps[:var] + (e - 1,) + exps[var + 1 :]
                out[new] = out.get(new, 0) + c * e
        return Polynomial.from_dict(out, self.nvars)

    def value(self, *args):
        return self(*args)

    def grad(self, *args):
        return tuple(self.diff(i)(*args) for i in range(self.nvars))


def _smoothstep(s):
    return s * s * (3 - 2 * s)


def _smoothstep_d(s):
    return 6 * s * (1 - s)


@dataclass(frozen=True)
class Cutoff:
    """C^1 piecewise-cubic plateau: 0 up to a0, 1 on [a1, b1], 0 from b0 on."""

    a0: Fraction
    a1: Fraction
    b1: Fraction
    b0: Fraction

    def __post_init__(self):
        if not self.a0 < self.a1 <= self.b1 < self.b0:
            raise ValueError("need a0 < a1 <= b1 < b0")

    @classmethod
    def of(cls, a0, a1, b1, b0) -> "Cutoff":
        return cls(Fraction(a0), Fraction(a1), Fraction(b1), Fraction(b0))

    @property
    def knots(self) -> tuple[Fraction, ...]:
        return (self.a0, self.a1, self.b1, self.b0)

    degree = 3

    def __call__(self, t):
        if t <= self.a0 or t >= self.b0:
            return 0 * t
        if t < self.a1:
            return _smoothstep((t - self.a0) / (self.a1 - self.a0))
        if t <= self.b1:
            return 1 + 0 * t
        return _smoothstep((self.b0 - t) / (self.b0 - self.b1))

    def deriv(self, t):
        if t <= self.a0 or t >= self.b0 or self.a1 <= t <= self.b1:
            return 0 * t
        if t < self.a1:
            w = self.a1 - self.a0
            return _smoothstep_d((t - self.a0) / w) / w
        w = self.b0 - self.b1
        return -_smoothstep_d((self.b0 - t) / w) / w


def _bump1(z):
    z = np.asarray(z, dtype=float)
    inside = np.abs(z) < 1
    zz = np.where(inside, z, 0.0)
    val = np.where(inside, np.exp(1 - 1 / (1 - zz * zz)), 0.0)
    dval = np.where(inside, val * (-2 * zz) / (1 - zz * zz) ** 2, 0.0)
    return val, dval


@dataclass(frozen=True)
class Bump:
    """Product of exp(1 - 1/(1 - z^2)) bumps, one per coordinate."""

    center: tuple[float, ...]
    radius: tuple[float, ...]
    scale: float = 1.0

    @property
    def nvars(self) -> int:
        return len(self.center)

    def _factors(self, args):
        return [_bump1((np.asarray(a, dtype=float) - c) / r) for a, c, r in zip(args, self.center, self.radius)]

    def __call__(self, *args):
        out = self.scale
        for val, _ in self._factors(args):
            out = out * val
        return _scalar(out)

    value = __call__

    def grad(self, *args):
        facs = self._factors(args)
        out = []
        for i, r in enumerate(self.radius):
            g = self.scale * facs[i][1] / r
            for j, (val, _) in enumerate(facs):
                if j != i:
                    g = g * val
            out.append(_scalar(g))
        return tuple(out)

    def sup(self) -> float:
        return abs(self.scale)


def _scalar(x):
    if isinstance(x, np.ndarray) and x.ndim == 0:
        return float(x)
    return x

