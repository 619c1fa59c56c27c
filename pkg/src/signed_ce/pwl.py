"""Exact piecewise-linear functions on [0, 1] and their level structure.

The stage function f_K is the antiderivative of the stage slope pattern,
started at 2.  Besides evaluation this module answers level-set questions
exactly: preimages of a level, the number of preimages on each gap between
critical values, monotone runs, and the finite-stage form of the cone
inequality used in the uniqueness argument.
"""
from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import CriticalLevel, HypothesisViolated, InvalidInterval
from .rational import format_float, format_q
from .stagegen import SlopeFunction, StageState, interval_mass

__all__ = [
    "PwlFunction",
    "Preimage",
    "LevelGap",
    "integrate_slopes",
    "stage_function",
    "preimages",
    "level_gaps",
    "sup_preimage_count",
    "runs",
    "max_monotone_run",
    "find_monotone_interval",
    "area_formula_check",
    "cone_gap",
    "polyline_csv",
]


@dataclass(frozen=True)
class PwlFunction:
    breakpoints: tuple[Fraction, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.breakpoints) != len(self.values) or len(self.breakpoints) < 2:
            raise ValueError("need matching breakpoints and values (at least two)")
        if any(a >= b for a, b in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def from_points(cls, xs, vs) -> "PwlFunction":
        return cls(tuple(Fraction(x) for x in xs), tuple(Fraction(v) for v in vs))

    @property
    def domain(self) -> tuple[Fraction, Fraction]:
        return self.breakpoints[0], self.breakpoints[-1]

    @property
    def slopes(self) -> tuple[Fraction, ...]:
        x, v = self.breakpoints, self.values
        return tuple((v[i + 1] - v[i]) / (x[i + 1] - x[i]) for i in range(len(x) - 1))

    def segments(self):
        """Yield ``(x0, x1, v0, v1)`` for each linear piece."""
        x, v = self.breakpoints, self.values
        for i in range(len(x) - 1):
            yield x[i], x[i + 1], v[i], v[i + 1]

    def __call__(self, x) -> Fraction:
        x = Fraction(x)
        lo, hi = self.domain
        if not lo <= x <= hi:
            raise ValueError(f"{x} outside [{lo}, {hi}]")
        i = bisect.bisect_right(self.breakpoints, x) - 1
        if i == len(self.breakpoints) - 1:
            return self.values[-1]
        x0, x1 = self.breakpoints[i], self.breakpoints[i + 1]
        v0, v1 = self.values[i], self.values[i + 1]
        return v0 + (v1 - v0) * (x - x0) / (x1 - x0)

    def slope_at(self, x) -> Fraction:
        """Slope on the open piece containing x; 0 at breakpoints."""
        x = Fraction(x)
        i = bisect.bisect_left(self.breakpoints, x)
        if i < len(self.breakpoints) and self.breakpoints[i] == x:
            return Fraction(0)
        if i == 0 or i == len(self.breakpoints):
            raise ValueError(f"{x} outside the domain")
        return self.slopes[i - 1]

    @property
    def critical_values(self) -> tuple[Fraction, ...]:
        return tuple(sorted(set(self.values)))

    def value_range(self) -> tuple[Fraction, Fraction]:
        return min(self.values), max(self.values)


@dataclass(frozen=True)
class Preimage:
    location: Fraction
    slope_sign: int


@dataclass(frozen=True)
class LevelGap:
    """Open level interval (lo, hi) free of critical values, and its count."""

    lo: Fraction
    hi: Fraction
    count: int


def integrate_slopes(s: SlopeFunction, base=2) -> PwlFunction:
    values = [Fraction(base)]
    for a, b, sign in s.intervals():
        values.append(values[-1] + sign * (b - a))
    return PwlFunction(s.breakpoints, tuple(values))


def stage_function(s: StageState) -> PwlFunction:
    """f_K = 2 + integral of the stage-K slope pattern."""
    return integrate_slopes(s.slopes, 2)


def preimages(f: PwlFunction, t) -> list[Preimage]:
    t = Fraction(t)
    if t in set(f.values):
        raise CriticalLevel(t)
    out = []
    for x0, x1, v0, v1 in f.segments():
        if min(v0, v1) < t < max(v0, v1):
            out.append(
                Preimage(x0 + (t - v0) * (x1 - x0) / (v1 - v0), 1 if v1 > v0 else -1)
            )
    return out


def _scaled_gap_counts(f: PwlFunction):
    """Critical values as integers over a common denominator, plus gap counts.

    Sweep: a segment contributes to every gap inside its open value range.
    Working with integers avoids the gcd cost of deep-stage Fractions.
    """
    den = math.lcm(*(v.denominator for v in f.values))
    scaled = [v.numerator * (den // v.denominator) for v in f.values]
    order = sorted(set(scaled))
    index = {c: i for i, c in enumerate(order)}
    diff = [0] * (len(order) + 1)
    for a, b in zip(scaled, scaled[1:]):
        if a == b:
            continue
        diff[index[min(a, b)]] += 1
        diff[index[max(a, b)]] -= 1
    counts, running = [], 0
    for i in range(len(order) - 1):
        running += diff[i]
        counts.append(running)
    return den, order, counts


def level_gaps(f: PwlFunction) -> list[LevelGap]:
    """Preimage counts on every gap between consecutive critical values."""
    den, order, counts = _scaled_gap_counts(f)
    return [
        LevelGap(Fraction(order[i], den), Fraction(order[i + 1], den), c)
        for i, c in enumerate(counts)
    ]


def sup_preimage_count(f: PwlFunction) -> tuple[int, tuple[Fraction, Fraction]]:
    """Essential supremum of #f^{-1}(t) and the lowest level gap attaining it."""
    den, order, counts = _scaled_gap_counts(f)
    if not counts:
        raise ValueError("constant function has no level gaps")
    best = max(counts)
    i = counts.index(best)
    return best, (Fraction(order[i], den), Fraction(order[i + 1], den))


def runs(f: PwlFunction) -> list[tuple[Fraction, Fraction, int]]:
    """Maximal intervals of constant slope sign, as ``(a, b, sign)``."""
    out: list[tuple[Fraction, Fraction, int]] = []
    for (x0, x1, v0, v1), m in zip(f.segments(), f.slopes):
        sign = (m > 0) - (m < 0)
        if out and out[-1][2] == sign:
            out[-1] = (out[-1][0], x1, sign)
        else:
            out.append((x0, x1, sign))
    return out


def max_monotone_run(f: PwlFunction) -> tuple[Fraction, tuple[Fraction, Fraction]]:
    """Longest run of nonzero constant slope sign (first one on ties)."""
    best = None
    for a, b, sign in runs(f):
        if sign != 0 and (best is None or b - a > best[1] - best[0]):
            best = (a, b)
    if best is None:
        raise ValueError("function has no strictly monotone piece")
    return best[1] - best[0], best


def find_monotone_interval(g: PwlFunction, M: int) -> tuple[Fraction, Fraction]:
    """Open interval on which g is strictly monotone.

    Follows the level-set argument: take a non-critical level t carried by
    the maximal number of preimages x_1 < ... < x_m, give each x_i the
    linear piece around it as a neighbourhood, widen the level window as
    far as the gap allows, and return the piece of g^{-1}(window) around x_1.
    """
    if any(m == 0 for m in g.slopes):
        raise HypothesisViolated("g has a flat piece; g' must be nonzero a.e.")
    m_sup, (lo, hi) = sup_preimage_count(g)
    if m_sup > M:
        raise HypothesisViolated(f"preimage count {m_sup} exceeds M={M}")
    t = (lo + hi) / 2
    eps = (hi - lo) / 2
    windows = []
    for x0, x1, v0, v1 in g.segments():
        if min(v0, v1) < t < max(v0, v1):
            a = x0 + (t - eps - v0) * (x1 - x0) / (v1 - v0)
            b = x0 + (t + eps - v0) * (x1 - x0) / (v1 - v0)
            windows.append((min(a, b), max(a, b)))
    assert len(windows) == m_sup
    # the window lies in the gap, so each J_i carries exactly one preimage of
    # every level in it and sits inside a single linear piece
    return windows[0]


def area_formula_check(f: PwlFunction) -> Fraction:
    """Integral of the preimage count over all levels, computed two ways."""
    by_levels = sum(((g.hi - g.lo) * g.count for g in level_gaps(f)), Fraction(0))
    by_length = sum(
        (abs(v1 - v0) for _, _, v0, v1 in f.segments()), Fraction(0)
    )
    if by_levels != by_length:
        raise AssertionError(f"area formula mismatch: {by_levels} != {by_length}")
    return by_levels


def cone_gap(f: PwlFunction, s: StageState, x, y) -> tuple[Fraction, Fraction]:
    """``(|f(y) - f(x)|, (y - x) - 2 min(p_mass, n_mass))`` on (x, y)."""
    x, y = Fraction(x), Fraction(y)
    if not (0 <= x < y <= 1):
        raise InvalidInterval(f"need 0 <= x < y <= 1, got ({x}, {y})")
    p, n = interval_mass(s, x, y)
    return abs(f(y) - f(x)), (y - x) - 2 * min(p, n)


def polyline_csv(f: PwlFunction) -> str:
    """Graph {(f(x), x)} as CSV rows, exact and float, with segment signs.

    ``sign`` is the slope sign of the segment that starts at the row (empty on
    the last row).
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x", "t_float", "x_float", "sign"])
    slopes = f.slopes
    for i, (x, v) in enumerate(zip(f.breakpoints, f.values)):
        sign = ""
        if i < len(slopes):
            sign = "+" if slopes[i] > 0 else "-" if slopes[i] < 0 else "0"
        w.writerow([format_q(v), format_q(x), format_float(v), format_float(x), sign])
    return buf.getvalue()
