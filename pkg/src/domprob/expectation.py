"""Interval enclosures of expected values.

A :class:`StepFunctional` is a step function ``g : D -> I(R+)`` given by
pieces ``(b, [a, c])``; at ``d`` it takes the intersection of the values of
all pieces with ``b << d``.  Where no piece applies ``g`` is the bottom of
``I(R+)``, i.e. ``[0, infinity)``; that is reported through an ``unbounded``
flag and numerically represented by ``[0, cap]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .domain import BOT, Domain, IntervalReal, IntervalUnit
from .dyadic import ONE, ZERO, Dyadic, DyInterval, dy
from .errors import IllFormedFunctional, MissingGridValue, PickOutsideInterval
from .randvar import StepRV, rv_T
from .valuation import SimpleValuation

__all__ = [
    "StepFunctional",
    "Expectation",
    "DEFAULT_CAP",
    "expect",
    "expect_detailed",
    "monte_carlo",
    "fubini",
    "fubini_orders",
    "square_functional",
]

DEFAULT_CAP = Dyadic(1 << 32)


@dataclass
class StepFunctional:
    """``g = sup_i value_i * chi(up(generator_i))``."""

    domain: Domain
    pieces: List[Tuple[object, DyInterval]]
    _lo: Optional[np.ndarray] = field(default=None, repr=False)
    _hi: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        for b, v in self.pieces:
            self.domain.check(b)
            if v.lo < ZERO:
                raise IllFormedFunctional(f"piece value {v} is not non-negative")
        if isinstance(self.domain, (IntervalUnit, IntervalReal)) and len(self.pieces) > 64:
            # float pre-filter on generator endpoints; exact test follows
            unit = isinstance(self.domain, IntervalUnit)
            lo = []
            hi = []
            for b, _ in self.pieces:
                if b is BOT:
                    lo.append(0.0 if unit else -np.inf)
                    hi.append(1.0 if unit else np.inf)
                else:
                    lo.append(float(b.lo))
                    hi.append(float(b.hi))
            self._lo = np.array(lo)
            self._hi = np.array(hi)

    def _candidates(self, d) -> Sequence[int]:
        if self._lo is None or d is BOT:
            return range(len(self.pieces))
        slack = 1e-9
        mask = (self._lo <= float(d.lo) + slack) & (self._hi >= float(d.hi) - slack)
        return np.nonzero(mask)[0].tolist()

    def value(self, d) -> Tuple[Optional[DyInterval], bool]:
        """``(interval, unbounded)``; interval is None when no piece applies."""
        D = self.domain
        acc: Optional[DyInterval] = None
        for i in self._candidates(d):
            b, v = self.pieces[i]
            if D.way_below(b, d):
                if acc is None:
                    acc = v
                else:
                    lo, hi = max(acc.lo, v.lo), min(acc.hi, v.hi)
                    if lo > hi:
                        raise IllFormedFunctional(
                            f"pieces disagree at {D.format_elem(d)}: {acc} and {v} do not intersect"
                        )
                    acc = DyInterval(lo, hi)
        return acc, acc is None

    def evaluate(self, d, cap: Dyadic = DEFAULT_CAP) -> DyInterval:
        v, unbounded = self.value(d)
        return DyInterval(ZERO, cap) if unbounded else v


@dataclass(frozen=True)
class Expectation:
    interval: DyInterval
    unbounded: bool

    def __str__(self) -> str:
        return str(self.interval) + (" (unbounded)" if self.unbounded else "")


def _as_valuation(r: Union[StepRV, SimpleValuation]) -> SimpleValuation:
    return rv_T(r) if isinstance(r, StepRV) else r


def expect_detailed(r, g: StepFunctional, cap: Dyadic = DEFAULT_CAP) -> Expectation:
    """``sum over atoms (w, d) of T(r) of w * g(d)``."""
    alpha = _as_valuation(r)
    lo = ZERO
    hi = ZERO
    unbounded = False
    for w, d in alpha.atoms:
        v, unb = g.value(d)
        if unb:
            unbounded = True
            hi = hi + w * cap
        else:
            lo = lo + w * v.lo
            hi = hi + w * v.hi
    return Expectation(DyInterval(lo, hi), unbounded)


def expect(r, g: StepFunctional, cap: Dyadic = DEFAULT_CAP) -> DyInterval:
    return expect_detailed(r, g, cap).interval


def monte_carlo(r, g: StepFunctional, picks: Mapping) -> Dyadic:
    """``S = sum_k q_k nu(r^-1(d_k))`` with a chosen point ``q_k`` of each ``g(d_k)``."""
    alpha = _as_valuation(r)
    D = alpha.domain
    S = ZERO
    for w, d in alpha.atoms:
        if d not in picks:
            raise PickOutsideInterval(f"no pick for {D.format_elem(d)}")
        q = dy(picks[d])
        v, unb = g.value(d)
        if unb:
            if q < ZERO:
                raise PickOutsideInterval(f"pick {q} is negative")
        elif not v.contains(q):
            raise PickOutsideInterval(f"pick {q} is outside {v}")
        S = S + w * q
    return S


def _grid(beta, gamma, f):
    out = {}
    for _, d in beta.atoms:
        for _, e in gamma.atoms:
            if (d, e) not in f:
                D = beta.domain
                raise MissingGridValue(f"f undefined at ({D.format_elem(d)}, {gamma.domain.format_elem(e)})")
            out[(d, e)] = f[(d, e)]
    return out


def fubini_orders(
    beta: SimpleValuation, gamma: SimpleValuation, f: Mapping
) -> Tuple[DyInterval, DyInterval, DyInterval]:
    """The double sum in three orders: rows first, columns first, product measure."""
    F = _grid(beta, gamma, f)
    # rows first: sum_j b_j (sum_k c_k f(d_j, e_k))
    lo1 = hi1 = ZERO
    for b, d in beta.atoms:
        il = ih = ZERO
        for c, e in gamma.atoms:
            il = il + c * F[(d, e)].lo
            ih = ih + c * F[(d, e)].hi
        lo1 = lo1 + b * il
        hi1 = hi1 + b * ih
    # columns first
    lo2 = hi2 = ZERO
    for c, e in gamma.atoms:
        il = ih = ZERO
        for b, d in beta.atoms:
            il = il + b * F[(d, e)].lo
            ih = ih + b * F[(d, e)].hi
        lo2 = lo2 + c * il
        hi2 = hi2 + c * ih
    # product valuation sum
    lo3 = hi3 = ZERO
    for b, d in beta.atoms:
        for c, e in gamma.atoms:
            w = b * c
            lo3 = lo3 + w * F[(d, e)].lo
            hi3 = hi3 + w * F[(d, e)].hi
    return DyInterval(lo1, hi1), DyInterval(lo2, hi2), DyInterval(lo3, hi3)


def fubini(beta: SimpleValuation, gamma: SimpleValuation, f: Mapping) -> DyInterval:
    """``sum_{j,k} b_j c_k f(d_j, e_k)``; all summation orders agree exactly."""
    a, b, c = fubini_orders(beta, gamma, f)
    if not (a == b == c):
        raise AssertionError("summation orders disagree")
    return a


def square_functional(max_level: int) -> StepFunctional:
    """A step functional on I[0,1] enclosing ``x -> x**2``.

    At every level ``l <= max_level`` it has pieces on the three-cell windows
    ``[(j-1)/2^l, (j+2)/2^l]`` (clipped to [0,1]) with the exact range of
    ``x**2`` on the window.
    """
    D = IntervalUnit()
    pieces = []
    for lvl in range(max_level + 1):
        n = 1 << lvl
        for j in range(n):
            lo = max(ZERO, Dyadic(j - 1, lvl))
            hi = min(ONE, Dyadic(j + 2, lvl))
            pieces.append((D.canon(DyInterval(lo, hi)), DyInterval(lo * lo, hi * hi)))
    return StepFunctional(D, pieces)
