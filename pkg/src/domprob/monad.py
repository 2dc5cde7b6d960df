"""The random-variable monad over the two canonical sample spaces.

A nested random variable is a step partition of the sample space whose
cells hold random variables (``StepRV`` or, for triple nesting, further
:class:`NestedRV`).  Multiplication ``mu`` evaluates ``r(h1 w)(h2 w)`` where
``(h1, h2)`` is the pairing of the space: bit interleaving on the Cantor
kinds, the Hilbert curve on the unit-interval kinds.  At a finite output
depth each output cell receives the infimum over every outer/inner cell its
image can reach, which is the finite truncation of the lower envelope.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .domain import Domain, Product
from .dyadic import ONE, ZERO, Dyadic
from .errors import MissingMapping, NonMonotoneMap, SpaceMismatch
from .pairing import project
from .randvar import MAX_DEPTH, StepRV, preimage_mass, rv_const, rv_T
from .sample_space import SpaceKind

__all__ = [
    "NestedRV",
    "eta",
    "eta_R",
    "R_eta",
    "mu",
    "mu_R",
    "R_mu",
    "rmap",
    "kleisli",
    "strength",
    "costrength",
    "pair_rv",
    "check_laws",
    "basic_eq_sides",
    "pairing_for",
]

RV = Union[StepRV, "NestedRV"]


@dataclass(frozen=True)
class NestedRV:
    """A step partition whose cells carry random variables over one space."""

    space: SpaceKind
    depth: int
    cells: Tuple[RV, ...]

    def __post_init__(self):
        if len(self.cells) != 1 << self.depth:
            raise ValueError(f"depth {self.depth} needs {1 << self.depth} cells")
        for c in self.cells:
            if c.space is not self.space:
                raise SpaceMismatch("inner variables must live on the same space")

    @property
    def level(self) -> int:
        """1 for ``Omega -> Omega -> D``, 2 for triple nesting, ..."""
        inner = self.cells[0]
        return 1 if isinstance(inner, StepRV) else 1 + inner.level

    @property
    def codomain(self) -> Domain:
        inner = self.cells[0]
        return inner.codomain

    def max_depth(self) -> int:
        return max(c.depth for c in self.cells)


def pairing_for(space: SpaceKind) -> str:
    return "interleave" if space.is_cantor else "hilbert"


def eta(d, space: SpaceKind, codomain: Domain) -> StepRV:
    """Constant random variable."""
    return rv_const(space, d, codomain)


def eta_R(r: RV) -> NestedRV:
    """Unit at a random-variable type, in the pointwise form
    ``(w1, w2) -> r(w1)``: the outer partition is ``r``'s own and every
    inner variable is constant.  ``mu(eta_R(r)) = r o h1``."""
    if isinstance(r, StepRV):
        cells = tuple(rv_const(r.space, c, r.codomain) for c in r.cells)
        return NestedRV(r.space, r.depth, cells)
    # nested argument: constant inner copies at the next level down
    cells = tuple(NestedRV(r.space, 0, (c,)) for c in r.cells)
    return NestedRV(r.space, r.depth, cells)


def R_eta(r: RV) -> NestedRV:
    """Lifted unit in the pointwise form ``(w1, w2) -> r(w2)``: a constant
    outer variable whose single value is ``r``.  ``mu(R_eta(r)) = r o h2``."""
    return NestedRV(r.space, 0, (r,))


def _inf_rv(xs: Sequence[RV]) -> RV:
    """Pointwise infimum of random variables (used by the envelope)."""
    xs = list(xs)
    if len(xs) == 1:
        return xs[0]
    first = xs[0]
    n = max(x.depth for x in xs)
    if isinstance(first, StepRV):
        D = first.codomain
        cols = [x.cells_at(n) for x in xs]
        return StepRV(first.space, n, [D.inf(vals) for vals in zip(*cols)], D)
    cols = [_nested_cells_at(x, n) for x in xs]
    return NestedRV(first.space, n, tuple(_inf_rv(vals) for vals in zip(*cols)))


def _nested_cells_at(x: NestedRV, n: int) -> Tuple[RV, ...]:
    k = 1 << (n - x.depth)
    return tuple(c for c in x.cells for _ in range(k))


def _value_inf(vals: List, D: Optional[Domain]):
    if len(vals) == 1:
        return vals[0]
    if D is not None:
        return D.inf(vals)
    return _inf_rv(vals)


def _prefix_range(prefix: str, depth: int) -> range:
    """Indices of depth-``depth`` cells compatible with a binary prefix."""
    if len(prefix) >= depth:
        i = int(prefix[:depth], 2) if depth else 0
        return range(i, i + 1)
    k = depth - len(prefix)
    base = (int(prefix, 2) if prefix else 0) << k
    return range(base, base + (1 << k))


def _cells_of(x: RV):
    return x.cells


@lru_cache(maxsize=1 << 16)
def _hilbert_prefixes(word: str) -> Tuple[Tuple[str, str], ...]:
    """(x-prefix, y-prefix) pairs for a binary output cell under the Hilbert pairing."""
    full = len(word) // 2
    quat = "".join(str(2 * int(word[2 * i]) + int(word[2 * i + 1])) for i in range(full))
    if len(word) % 2:
        b = int(word[-1])
        cands = [quat + str(2 * b), quat + str(2 * b + 1)]
    else:
        cands = [quat]
    return tuple((project("h1", "hilbert", q), project("h2", "hilbert", q)) for q in cands)


def _split_prefixes(space: SpaceKind, word: str) -> Tuple[Tuple[str, str], ...]:
    if space.is_cantor:
        return ((word[0::2], word[1::2]),)
    return _hilbert_prefixes(word)


def mu(rr: NestedRV, out_depth: Optional[int] = None) -> RV:
    """Multiplication: ``w -> rr*(h1 w)(h2 w)`` truncated to ``out_depth``.

    The default depth ``2 * max(outer, inner)`` makes every lookup exact on
    the Cantor kinds.
    """
    inner_depth = rr.max_depth()
    N = 2 * max(rr.depth, inner_depth) if out_depth is None else out_depth
    if N > MAX_DEPTH:
        raise ValueError(f"output depth {N} exceeds {MAX_DEPTH}")
    base_D = rr.codomain if rr.level == 1 else None
    out = []
    for i in range(1 << N):
        word = format(i, f"0{N}b") if N else ""
        vals = []
        for xp, yp in _split_prefixes(rr.space, word):
            for c in _prefix_range(xp, rr.depth):
                inner = rr.cells[c]
                for j in _prefix_range(yp, inner.depth):
                    v = inner.cells[j]
                    if v not in vals:
                        vals.append(v)
        out.append(_value_inf(vals, base_D))
    if base_D is not None:
        return StepRV(rr.space, N, out, base_D)
    return _normalize_nested(NestedRV(rr.space, N, tuple(out)))


def _normalize_nested(x: NestedRV) -> NestedRV:
    cells, depth = x.cells, x.depth
    while depth > 0 and all(cells[2 * i] == cells[2 * i + 1] for i in range(len(cells) // 2)):
        cells = cells[::2]
        depth -= 1
    return NestedRV(x.space, depth, cells)


def mu_R(rrr: NestedRV, out_depth: Optional[int] = None) -> NestedRV:
    """``mu`` at a random-variable type: flattens the two outer levels."""
    if rrr.level < 2:
        raise ValueError("mu_R needs triple nesting")
    return mu(rrr, out_depth)


def R_mu(rrr: NestedRV, out_depth: Optional[int] = None) -> NestedRV:
    """Lifted ``mu``: apply ``mu`` inside every outer cell."""
    if rrr.level < 2:
        raise ValueError("R_mu needs triple nesting")
    return NestedRV(rrr.space, rrr.depth, tuple(mu(c, out_depth) for c in rrr.cells))


def _check_monotone(f: Mapping, values: Sequence, D: Domain, E: Domain) -> None:
    for a in values:
        for b in values:
            if D.below(a, b) and not E.below(f[a], f[b]):
                raise NonMonotoneMap(f"f({D.format_elem(a)}) is not below f({D.format_elem(b)})")


def rmap(f: Mapping, r: StepRV, codomain: Optional[Domain] = None) -> StepRV:
    """Cell-wise application of a finite monotone map."""
    E = codomain or r.codomain
    vals = list(dict.fromkeys(r.cells))
    for v in vals:
        if v not in f:
            raise MissingMapping(f"no image for {r.codomain.format_elem(v)}")
        E.check(f[v])
    _check_monotone(f, vals, r.codomain, E)
    return StepRV(r.space, r.depth, [f[c] for c in r.cells], E)


def lift(f: Mapping, r: StepRV) -> NestedRV:
    """``R f`` for ``f : D -> R E`` given as a finite map to step variables."""
    vals = list(dict.fromkeys(r.cells))
    for v in vals:
        if v not in f:
            raise MissingMapping(f"no image for {r.codomain.format_elem(v)}")
    return NestedRV(r.space, r.depth, tuple(f[c] for c in r.cells))


def kleisli(f: Mapping, r: StepRV, out_depth: Optional[int] = None) -> StepRV:
    """``f-dagger(r) = mu(R f (r))``: ``w -> f(r(h1 w))(h2 w)``."""
    return mu(lift(f, r), out_depth)


def strength(d, s: StepRV, left: Domain) -> StepRV:
    """``t(d, s) = <eta(d), s>`` into ``left x s.codomain``."""
    P = Product(left, s.codomain)
    return StepRV(s.space, s.depth, [(d, c) for c in s.cells], P)


def costrength(r: StepRV, e, right: Domain) -> StepRV:
    P = Product(r.codomain, right)
    return StepRV(r.space, r.depth, [(c, e) for c in r.cells], P)


def pair_rv(r: StepRV, s: StepRV) -> StepRV:
    """Pointwise pairing ``w -> (r(w), s(w))``."""
    n = max(r.depth, s.depth)
    P = Product(r.codomain, s.codomain)
    return StepRV(r.space, n, list(zip(r.cells_at(n), s.cells_at(n))), P)


def double_strength_left(r: StepRV, s: StepRV) -> StepRV:
    """``w -> (r(h1 w), s(h2 w))``: bind ``r`` first, then strengthen."""
    f = {d: strength(d, s, r.codomain) for d in set(r.cells)}
    return kleisli(f, r)


def double_strength_right(r: StepRV, s: StepRV) -> StepRV:
    """``w -> (r(h2 w), s(h1 w))``: bind ``s`` first, then costrengthen."""
    f = {e: costrength(r, e, s.codomain) for e in set(s.cells)}
    return kleisli(f, s)


# ---------------------------------------------------------------------------
# Random instances and executable law checks


def random_step(rng: random.Random, space: SpaceKind, D: Domain, depth: int, pool: Sequence) -> StepRV:
    return StepRV(space, depth, [rng.choice(pool) for _ in range(1 << depth)], D)


def random_nested(
    rng: random.Random, space: SpaceKind, D: Domain, pool: Sequence, max_outer: int = 3, max_inner: int = 3
) -> NestedRV:
    m = rng.randint(0, max_outer)
    cells = tuple(random_step(rng, space, D, rng.randint(0, max_inner), pool) for _ in range(1 << m))
    return NestedRV(space, m, cells)


def random_triple(rng: random.Random, space: SpaceKind, D: Domain, pool: Sequence, max_depth: int = 2) -> NestedRV:
    m = rng.randint(0, max_depth)
    cells = tuple(random_nested(rng, space, D, pool, max_depth, max_depth) for _ in range(1 << m))
    return NestedRV(space, m, cells)


def flatten(rr: NestedRV) -> StepRV:
    """``mu`` at the exact default depth (shorthand used by the law checks)."""
    return mu(rr)


def check_laws(samples: int, space: SpaceKind, D: Domain, pool: Sequence, seed: int = 0) -> Dict[str, object]:
    """Run the unit and associativity laws at the level of ``T``.

    Returns counts and the first failing instance description per law.
    """
    rng = random.Random(seed)
    report: Dict[str, object] = {"samples": samples, "unit_left": 0, "unit_right": 0, "assoc": 0, "failures": []}
    for k in range(samples):
        rr = random_nested(rng, space, D, pool)
        r = mu(rr)
        if rv_T(mu(eta_R(r))) == rv_T(r):
            report["unit_left"] += 1
        else:
            report["failures"].append(("unit_left", k))
        if rv_T(mu(R_eta(r))) == rv_T(r):
            report["unit_right"] += 1
        else:
            report["failures"].append(("unit_right", k))
        rrr = random_triple(rng, space, D, pool)
        a = mu(mu_R(rrr))
        b = mu(R_mu(rrr))
        if rv_T(a) == rv_T(b):
            report["assoc"] += 1
        else:
            report["failures"].append(("assoc", k))
    return report


def basic_eq_sides(rr: NestedRV, O: Sequence) -> Tuple[Dyadic, Dyadic]:
    """Both sides of the layer-cake identity for a nested step variable.

    Left: ``sum over outer cells of nu(cell) * nu(rr(cell)^-1(O))``.  Right:
    ``integral_0^1 nu{w : nu(rr(w)^-1(O)) > q} dq`` evaluated exactly as a step
    integral in ``q`` over the breakpoints of the integrand.
    """
    if rr.level != 1:
        raise ValueError("basic_eq_sides needs Omega -> Omega -> D")
    cell = Dyadic(1, rr.depth)
    masses = [preimage_mass(inner, O) for inner in rr.cells]
    lhs = ZERO
    for m in masses:
        lhs = lhs + cell * m
    qs = sorted(set([ZERO, ONE] + masses), key=lambda d: d.to_fraction())
    rhs = ZERO
    for a, b in zip(qs, qs[1:]):
        # on (a, b) the set {w : mass(w) > q} is the cells with mass >= b
        level = ZERO
        for m in masses:
            if m >= b:
                level = level + cell
        rhs = rhs + (b - a) * level
    return lhs, rhs
