"""Finite-stage construction of the sign pattern behind the sets P and N.

Stage 0 is the constant slope +1 on [0, 1].  Stage k flips the sign on a
small interval centred at the k-th dyadic rational of (0, 1), taken in
breadth-first order.  Widths shrink fast enough that the total width of all
later flips is bounded by half the current width (see :func:`tail_bound`).

Everything is exact: endpoints are Fractions whose reduced denominators
carry a factor 3, so no flip endpoint ever coincides with a dyadic centre.
"""
from __future__ import annotations

import bisect
import json
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidInterval, ResourceLimitExceeded
from .rational import format_q, parse_q

__all__ = [
    "SlopeFunction",
    "StageState",
    "DEFAULT_MAX_STAGE",
    "dyadic",
    "init_stage",
    "advance",
    "build",
    "interval_mass",
    "tail_bound",
    "stable_mixing_stage",
]

DEFAULT_MAX_STAGE = 4096

ONE = Fraction(1)
ZERO = Fraction(0)


@dataclass(frozen=True)
class SlopeFunction:
    """Piecewise constant +/-1 function on [0, 1].

    ``signs[i]`` is the value on the open interval
    ``(breakpoints[i], breakpoints[i+1])``; the value at a breakpoint is 0.
    """

    breakpoints: tuple[Fraction, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        bp = self.breakpoints
        if len(bp) < 2 or bp[0] != 0 or bp[-1] != 1:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if any(a >= b for a, b in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if len(self.signs) != len(bp) - 1:
            raise ValueError("need one sign per interval")
        if any(s not in (1, -1) for s in self.signs):
            raise ValueError("signs must be +1 or -1")

    def __call__(self, x) -> int:
        x = Fraction(x)
        if x < 0 or x > 1:
            raise ValueError(f"{x} outside [0, 1]")
        i = bisect.bisect_left(self.breakpoints, x)
        if i < len(self.breakpoints) and self.breakpoints[i] == x:
            return 0
        return self.signs[i - 1]

    def piece_index(self, x) -> int:
        """Index of the open piece containing ``x`` (x must not be a breakpoint)."""
        return bisect.bisect_right(self.breakpoints, Fraction(x)) - 1

    def intervals(self):
        """Yield ``(a, b, sign)`` for every open piece."""
        bp = self.breakpoints
        for i, s in enumerate(self.signs):
            yield bp[i], bp[i + 1], s

    def mass(self, a, b) -> tuple[Fraction, Fraction]:
        a, b = Fraction(a), Fraction(b)
        p = n = ZERO
        for lo, hi, s in self.intervals():
            if hi <= a:
                continue
            if lo >= b:
                break
            w = min(hi, b) - max(lo, a)
            if s > 0:
                p += w
            else:
                n += w
        return p, n

    def flip(self, a: Fraction, b: Fraction) -> "SlopeFunction":
        """Negate the sign on (a, b); the interval must sit inside one piece."""
        i = self.piece_index(a)
        bp = self.breakpoints
        if not (bp[i] < a < b < bp[i + 1]):
            raise ValueError("flip interval must lie strictly inside one piece")
        s = self.signs[i]
        return SlopeFunction(
            bp[: i + 1] + (a, b) + bp[i + 1 :],
            self.signs[:i] + (s, -s, s) + self.signs[i + 1 :],
        )


@dataclass(frozen=True)
class StageState:
    k: int
    eps: tuple[Fraction, ...]
    flips: tuple[tuple[Fraction, Fraction], ...]
    boundary_set: tuple[Fraction, ...]
    slopes: SlopeFunction

    @property
    def centres(self) -> tuple[Fraction, ...]:
        return tuple(dyadic(j) for j in range(1, self.k + 1))

    def invariant_violations(self) -> list[str]:
        """Exact re-check of the construction invariants; empty when valid."""
        out = []
        if self.eps[0] != 1:
            out.append("eps_0 != 1")
        if len(self.eps) != self.k + 1 or len(self.flips) != self.k:
            out.append("length mismatch")
        for j in range(1, self.k + 1):
            if not self.eps[j] < self.eps[j - 1] / 2**j:
                out.append(f"eps_{j} too large")
        e_prev = {ZERO, ONE}
        for j, (a, b) in enumerate(self.flips, start=1):
            if b - a != self.eps[j]:
                out.append(f"I_{j} has wrong width")
            if any(a <= e <= b for e in e_prev):
                out.append(f"closure of I_{j} meets E_{j - 1}")
            e_prev |= {a, b}
        if tuple(sorted(e_prev)) != self.boundary_set:
            out.append("boundary set mismatch")
        if any(e.denominator % 3 for e in self.boundary_set if e not in (0, 1)):
            out.append("boundary point without factor 3 in denominator")
        if self.slopes.breakpoints != self.boundary_set:
            out.append("slope breakpoints differ from boundary set")
        return out

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "eps": [format_q(e) for e in self.eps],
            "flips": [[format_q(a), format_q(b)] for a, b in self.flips],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "StageState":
        """Rebuild by replaying the recorded flips; every field is re-derived."""
        state = init_stage()
        eps = [parse_q(e) for e in data["eps"]]
        flips = [(parse_q(a), parse_q(b)) for a, b in data["flips"]]
        if len(flips) != data["k"] or len(eps) != data["k"] + 1 or eps[0] != 1:
            raise ValueError("inconsistent stage document")
        for e, (a, b) in zip(eps[1:], flips):
            state = _apply_flip(state, e, a, b)
        if state.invariant_violations():
            raise ValueError("; ".join(state.invariant_violations()))
        return state

    @classmethod
    def from_json(cls, text: str) -> "StageState":
        return cls.from_dict(json.loads(text))


def dyadic(k: int) -> Fraction:
    """k-th dyadic rational of (0, 1) in breadth-first order, k >= 1."""
    if k < 1:
        raise ValueError("k must be >= 1")
    level = k.bit_length()
    pos = k - (1 << (level - 1))
    return Fraction(2 * pos + 1, 1 << level)


def init_stage() -> StageState:
    return StageState(
        k=0,
        eps=(ONE,),
        flips=(),
        boundary_set=(ZERO, ONE),
        slopes=SlopeFunction((ZERO, ONE), (1,)),
    )


def _apply_flip(s: StageState, e: Fraction, a: Fraction, b: Fraction) -> StageState:
    bset = list(s.boundary_set)
    bisect.insort(bset, a)
    bisect.insort(bset, b)
    return StageState(
        k=s.k + 1,
        eps=s.eps + (e,),
        flips=s.flips + ((a, b),),
        boundary_set=tuple(bset),
        slopes=s.slopes.flip(a, b),
    )


def _window_is_free(boundary: tuple[Fraction, ...], lo: Fraction, hi: Fraction) -> bool:
    i = bisect.bisect_right(boundary, lo)
    return i >= len(boundary) or boundary[i] >= hi


def advance(s: StageState) -> StageState:
    k = s.k + 1
    q = dyadic(k)
    bound = s.eps[-1] / 2**k
    # smallest j >= 1 with 1/(3 * 2**j) < bound, found from bit lengths then corrected
    ratio = 1 / (3 * bound)
    j = max(1, ratio.numerator.bit_length() - ratio.denominator.bit_length() - 1)
    while not Fraction(1, 3 << j) < bound:
        j += 1
    while True:
        e = Fraction(1, 3 << j)
        lo, hi = q - e, q + e
        if lo >= 0 and hi <= 1 and _window_is_free(s.boundary_set, lo, hi):
            break
        j += 1
        # dist(q, E_k) > 0 because q is dyadic and E_k is not
        assert j < 64 + 4 * k * k, "no admissible width"
    return _apply_flip(s, e, q - e / 2, q + e / 2)


def build(K: int, max_stage: int = DEFAULT_MAX_STAGE) -> StageState:
    if K < 0:
        raise ValueError("K must be non-negative")
    if K > max_stage:
        raise ResourceLimitExceeded(f"K={K} exceeds the configured cap {max_stage}")
    s = init_stage()
    for _ in range(K):
        s = advance(s)
    return s


def interval_mass(s: StageState, a, b) -> tuple[Fraction, Fraction]:
    """Exact measures of {slope = +1} and {slope = -1} inside (a, b)."""
    a, b = Fraction(a), Fraction(b)
    if not (0 <= a < b <= 1):
        raise InvalidInterval(f"need 0 <= a < b <= 1, got ({a}, {b})")
    return s.slopes.mass(a, b)


def tail_bound(s: StageState) -> Fraction:
    return s.eps[-1] / 2


def stable_mixing_stage(a, b, max_stage: int = 256, start: StageState | None = None):
    """First stage at which (a, b) holds both signs with margin above the tail.

    Once ``min(p_mass, n_mass) > tail_bound`` no later flip can empty either
    set, so positivity then holds at every later stage.  Returns
    ``(K, state)`` or ``(None, last_state)`` if ``max_stage`` is reached.
    """
    s = start or init_stage()
    while True:
        p, n = interval_mass(s, a, b)
        if min(p, n) > tail_bound(s):
            return s.k, s
        if s.k >= max_stage:
            return None, s
        s = advance(s)
