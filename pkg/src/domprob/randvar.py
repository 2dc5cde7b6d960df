"""Step-function random variables and the probability map ``T``.

A :class:`StepRV` is a full dyadic partition of the sample space at some
depth together with one domain element per cell.  On the unit-interval
kinds the value at an interior cell boundary is never stored; it is the
infimum of the two neighbouring cell values.  ``T(r)`` pushes the uniform
measure forward: every distinct value receives the total measure of the
cells carrying it, and boundary points are null.
"""

from __future__ import annotations

import json
from typing import Dict, List, Sequence, Tuple, Union

from .domain import UNBOUNDED, Domain, FinitePoset, IntervalReal, IntervalUnit, Product, parse_domain
from .dyadic import ONE, ZERO, Dyadic, dy
from .errors import (
    ChainNotIncreasing,
    DepthOverflow,
    NotEquivalent,
    ParseError,
    PointOutsideSpace,
    PreconditionFailed,
    SpaceMismatch,
    UnboundedJoin,
    Unsupported,
)
from .sample_space import BasicOpen, DyadicPartition, SpaceKind, parse_kind
from .valuation import Flow, SimpleValuation, val_leq

__all__ = [
    "StepRV",
    "MAX_DEPTH",
    "rv_make",
    "rv_const",
    "rv_eval",
    "rv_T",
    "rv_leq",
    "rv_way_below",
    "rv_equiv",
    "rv_refine_up",
    "rv_restrict_down",
    "rv_chain_from_valuations",
    "rv_way_above",
    "rv_approx_degree",
    "rv_member_q_open",
    "rv_precompose",
    "rv_equiv_witness",
    "domain_to_json",
    "domain_from_json",
]

MAX_DEPTH = 24


class StepRV:
    """Canonical step random variable ``space -> codomain``."""

    __slots__ = ("space", "depth", "cells", "codomain")

    def __init__(self, space: SpaceKind, depth: int, cells: Sequence, codomain: Domain, normalize: bool = True):
        cells = tuple(cells)
        if len(cells) != 1 << depth:
            raise ValueError(f"depth {depth} needs {1 << depth} cells, got {len(cells)}")
        if normalize:
            while depth > 0 and all(cells[2 * i] == cells[2 * i + 1] for i in range(len(cells) // 2)):
                cells = cells[::2]
                depth -= 1
        self.space = space
        self.depth = depth
        self.cells = cells
        self.codomain = codomain

    def __repr__(self) -> str:
        vals = ", ".join(self.codomain.format_elem(c) for c in self.cells)
        return f"StepRV({self.space}, depth={self.depth}, [{vals}])"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, StepRV)
            and self.space is other.space
            and self.depth == other.depth
            and self.cells == other.cells
            and self.codomain == other.codomain
        )

    def __hash__(self) -> int:
        return hash((self.space, self.depth, self.cells))

    def cells_at(self, n: int) -> Tuple:
        """Cell values on the depth-``n`` partition (``n >= depth``)."""
        if n < self.depth:
            raise ValueError("cannot coarsen by refinement")
        k = 1 << (n - self.depth)
        if k == 1:
            return self.cells
        return tuple(c for c in self.cells for _ in range(k))

    def boundary_value(self, n: int, k: int):
        """Value at the boundary point ``k / 2**n`` (Unit kinds, ``0 < k < 2**n``)."""
        cs = self.cells_at(max(n, self.depth))
        m = k << (max(n, self.depth) - n)
        return self.codomain.inf([cs[m - 1], cs[m]])

    def to_json(self) -> str:
        D = self.codomain
        return json.dumps(
            {
                "space": self.space.value,
                "depth": self.depth,
                "codomain": domain_to_json(D),
                "cells": [D.format_elem(c) for c in self.cells],
            }
        )

    @classmethod
    def from_json(cls, text: Union[str, dict]) -> "StepRV":
        obj = json.loads(text) if isinstance(text, str) else text
        try:
            D = domain_from_json(obj["codomain"])
            space = parse_kind(obj["space"])
            cells = [D.parse_elem(c) for c in obj["cells"]]
            depth = int(obj["depth"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad StepRV JSON: {exc}") from exc
        if len(cells) != 1 << depth:
            raise ParseError(f"depth {depth} needs {1 << depth} cells")
        return cls(space, depth, cells, D, normalize=False)


def domain_to_json(D: Domain):
    if isinstance(D, IntervalUnit):
        return "unit"
    if isinstance(D, IntervalReal):
        return "real"
    if isinstance(D, FinitePoset):
        return {"elements": list(D.elements), "edges": [list(e) for e in D.hasse], "bottom": D.bottom}
    if isinstance(D, Product):
        return {"product": [domain_to_json(D.left), domain_to_json(D.right)]}
    raise TypeError(f"cannot serialise {D!r}")


def domain_from_json(obj) -> Domain:
    if isinstance(obj, str):
        return parse_domain(obj)
    if "product" in obj:
        l, r = obj["product"]
        return Product(domain_from_json(l), domain_from_json(r))
    return FinitePoset(obj["elements"], [tuple(e) for e in obj["edges"]], obj["bottom"])


def rv_const(space: SpaceKind, d, codomain: Domain) -> StepRV:
    codomain.check(d)
    return StepRV(space, 0, (d,), codomain)


def _open_depth(O: BasicOpen) -> int:
    if O.kind.is_cantor:
        return max((len(w) for w in O.parts), default=0)
    return max((max(lo.e, hi.e) for lo, hi in O.parts), default=0)


def rv_make(space: SpaceKind, assignments: Sequence[Tuple[BasicOpen, object]], codomain: Domain) -> StepRV:
    """``sup_i d_i chi_{O_i}``: cells inside several opens get the join of their values."""
    depth = 0
    for O, d in assignments:
        if O.kind is not space:
            raise SpaceMismatch(f"open of kind {O.kind} in a {space} variable")
        codomain.check(d)
        depth = max(depth, _open_depth(O))
    if depth > MAX_DEPTH:
        raise DepthOverflow(f"depth {depth} exceeds {MAX_DEPTH}")
    P = DyadicPartition(space, depth)
    cells = [codomain.bottom] * P.size
    for O, d in assignments:
        for i in P.cells_in(O):
            j = codomain.join(cells[i], d)
            if j is UNBOUNDED:
                raise UnboundedJoin(
                    f"values {codomain.format_elem(cells[i])} and {codomain.format_elem(d)} overlap without a join"
                )
            cells[i] = j
    return StepRV(space, depth, cells, codomain)


def rv_eval(r: StepRV, point):
    """Value at a bit string (Cantor kinds) or a dyadic point (Unit kinds)."""
    D = r.codomain
    if r.space.is_cantor:
        if not isinstance(point, str) or any(c not in "01" for c in point):
            raise PointOutsideSpace(f"{point!r} is not a bit string")
        if len(point) >= r.depth:
            return r.cells[int(point[: r.depth], 2) if r.depth else 0]
        k = r.depth - len(point)
        base = (int(point, 2) if point else 0) << k
        return D.inf(r.cells[base : base + (1 << k)])
    x = dy(point)
    if x < ZERO or x > ONE:
        raise PointOutsideSpace(f"{x} is outside [0,1]")
    n = r.depth
    if r.space is SpaceKind.UNIT_OPEN and (x == ZERO or x == ONE):
        raise PointOutsideSpace(f"{x} is not in the open unit interval")
    scaled = x.shift(n)
    if scaled.is_integer():
        k = scaled.m
        if k == 0:
            return r.cells[0]
        if k == 1 << n:
            return r.cells[-1]
        return D.inf([r.cells[k - 1], r.cells[k]])
    return r.cells[scaled.floor()]


def rv_T(r: StepRV) -> SimpleValuation:
    """Push-forward of the uniform measure: ``sum_d nu(r = d) delta(d)``."""
    counts: Dict[object, int] = {}
    for c in r.cells:
        counts[c] = counts.get(c, 0) + 1
    return SimpleValuation(r.codomain, [(Dyadic(k, r.depth), d) for d, k in counts.items()])


def _common(r: StepRV, s: StepRV) -> Tuple[int, Tuple, Tuple]:
    if r.space is not s.space:
        raise SpaceMismatch(f"{r.space} vs {s.space}")
    if r.codomain != s.codomain:
        raise SpaceMismatch("codomains differ")
    n = max(r.depth, s.depth)
    return n, r.cells_at(n), s.cells_at(n)


def rv_leq(r: StepRV, s: StepRV) -> bool:
    """Pointwise order.  Boundary values are infima of cell values, and the
    infimum is monotone, so cell-wise comparison already covers them."""
    _, a, b = _common(r, s)
    D = r.codomain
    return all(D.below(x, y) for x, y in zip(a, b))


def rv_way_below(r: StepRV, s: StepRV) -> bool:
    """Way-below between step variables.

    Cantor: cell-wise way-below (cylinders are compact).  Unit kinds: each
    non-bottom value of ``r`` must be way below ``s`` on the closure of its
    cell, i.e. on the cell and both neighbours; on the open interval the two
    extreme cells of ``r`` must be bottom.
    """
    if r.space is SpaceKind.CANTOR_ZERO:
        raise Unsupported("way-below of step variables on the space without eventually-zero sequences")
    n, a, b = _common(r, s)
    D = r.codomain
    if r.space is SpaceKind.CANTOR:
        return all(D.way_below(x, y) for x, y in zip(a, b))
    size = len(a)
    if r.space is SpaceKind.UNIT_OPEN and not (D.is_bottom(a[0]) and D.is_bottom(a[-1])):
        return False
    for i, x in enumerate(a):
        if D.is_bottom(x):
            continue
        for j in (i - 1, i, i + 1):
            if 0 <= j < size and not D.way_below(x, b[j]):
                return False
    return True


def rv_equiv(r: StepRV, s: StepRV) -> bool:
    """``r ~ s``: equal push-forward valuations (spaces may differ)."""
    if r.codomain != s.codomain:
        raise SpaceMismatch("codomains differ")
    return rv_T(r) == rv_T(s)


def _value_classes(r: StepRV, n: int) -> Dict[object, List[int]]:
    classes: Dict[object, List[int]] = {}
    for i, c in enumerate(r.cells_at(n)):
        classes.setdefault(c, []).append(i)
    return classes


def _split_classes(r: StepRV, alloc: Dict[object, List[Tuple[Dyadic, object]]]) -> StepRV:
    """Split each value class of ``r`` into runs of the given measures.

    ``alloc[c]`` lists ``(measure, new_value)`` pairs summing to the measure of
    the class of ``c``; cells are handed out in index order.
    """
    N = r.depth
    for parts in alloc.values():
        for t, _ in parts:
            N = max(N, t.e)
    if N > MAX_DEPTH:
        raise DepthOverflow(f"refinement needs depth {N} > {MAX_DEPTH}")
    classes = _value_classes(r, N)
    cells = list(r.cells_at(N))
    for c, idx in classes.items():
        pos = 0
        for t, d in alloc.get(c, []):
            k = t.m << (N - t.e)
            for i in idx[pos : pos + k]:
                cells[i] = d
            pos += k
        if pos != len(idx):
            raise AssertionError("allocation does not exhaust the class")
    return StepRV(r.space, N, cells, r.codomain)


def rv_refine_up(r1: StepRV, alpha2: SimpleValuation) -> StepRV:
    """A step variable ``r2 >= r1`` with ``T(r2) = alpha2``.

    Each value class ``c_i`` of ``r1`` is cut into pieces of measure ``t_ij``
    from a transport witness of ``T(r1) <= alpha2`` and piece ``j`` receives
    ``d_j``.  Because ``c_i <= d_j`` on every used edge, the join with ``r1``
    leaves every cell at ``d_j``.
    """
    a1 = rv_T(r1)
    ok, flow = val_leq(a1, alpha2)
    if not ok:
        raise PreconditionFailed("T(r1) is not below the target valuation")
    alloc: Dict[object, List[Tuple[Dyadic, object]]] = {}
    for (i, j), t in sorted(flow.entries.items()):
        alloc.setdefault(a1.atoms[i][1], []).append((t, alpha2.atoms[j][1]))
    r2 = _split_classes(r1, alloc)
    D = r1.codomain
    n = max(r1.depth, r2.depth)
    joined = []
    for x, y in zip(r1.cells_at(n), r2.cells_at(n)):
        j = D.join(x, y)
        joined.append(j)
    return StepRV(r2.space, n, joined, D)


def co_occurrence(r1: StepRV, r2: StepRV, a1: SimpleValuation, a2: SimpleValuation) -> Flow:
    """``t_ij = nu{r1 = c_i and r2 = d_j}`` indexed by the atoms of ``a1``, ``a2``."""
    n, x, y = _common(r1, r2)
    i_of = {e: i for i, (_, e) in enumerate(a1.atoms)}
    j_of = {e: j for j, (_, e) in enumerate(a2.atoms)}
    counts: Dict[Tuple[int, int], int] = {}
    for c, d in zip(x, y):
        key = (i_of[c], j_of[d])
        counts[key] = counts.get(key, 0) + 1
    return Flow({k: Dyadic(v, n) for k, v in counts.items()})


def rv_restrict_down(r2: StepRV, alpha1: SimpleValuation) -> Tuple[StepRV, Flow]:
    """A step variable ``r1 <= r2`` with ``T(r1) = alpha1`` and its measured flow."""
    a2 = rv_T(r2)
    ok, flow = val_leq(alpha1, a2)
    if not ok:
        raise PreconditionFailed("target valuation is not below T(r2)")
    alloc: Dict[object, List[Tuple[Dyadic, object]]] = {}
    for (i, j), t in sorted(flow.entries.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        alloc.setdefault(a2.atoms[j][1], []).append((t, alpha1.atoms[i][1]))
    r1 = _split_classes(r2, alloc)
    return r1, co_occurrence(r1, r2, alpha1, a2)


def rv_way_above(b: StepRV, alpha: SimpleValuation, max_depth: int = 16) -> StepRV:
    """A step variable ``r`` with ``b << r`` and ``T(r) = alpha`` on the open interval.

    Works for finite-poset codomains, where way-below is the order.  At depth
    ``N`` every fine cell must carry a value above ``b`` on the cell and its
    two neighbours, so ``b`` is thickened by those joins and lifted to
    ``alpha`` with :func:`rv_refine_up`.  Deepening shrinks the thickened
    margins; the first depth whose thickening is below ``alpha`` is used.
    When neighbouring values need a join that ``alpha`` never reaches, no
    depth works and DepthOverflow is raised.
    """
    if b.space is not SpaceKind.UNIT_OPEN:
        raise Unsupported("way-above lifting is built on the open unit interval")
    D = b.codomain
    if not isinstance(D, FinitePoset):
        raise Unsupported("way-above lifting needs a finite-poset codomain")
    if not (D.is_bottom(b.cells[0]) and D.is_bottom(b.cells[-1])):
        raise PreconditionFailed("b must be bottom near both ends")
    for n in range(max(b.depth, 1) + 1, max_depth + 1):
        cs = b.cells_at(n)
        need = []
        for i in range(len(cs)):
            j = cs[i]
            for k in (i - 1, i + 1):
                if 0 <= k < len(cs):
                    j = D.join(j, cs[k])
                    if j is UNBOUNDED:
                        raise UnboundedJoin("neighbouring values of b have no upper bound")
            need.append(j)
        thick = StepRV(b.space, n, need, D)
        if val_leq(rv_T(thick), alpha)[0]:
            return rv_refine_up(thick, alpha)
    raise DepthOverflow(f"no way-above lift up to depth {max_depth}")


def rv_chain_from_valuations(alphas: Sequence[SimpleValuation], space: SpaceKind) -> List[StepRV]:
    """Increasing step variables realising an increasing chain of valuations."""
    if not alphas:
        return []
    for a, b in zip(alphas, alphas[1:]):
        if not val_leq(a, b)[0]:
            raise ChainNotIncreasing("valuations are not increasing")
    D = alphas[0].domain
    r = rv_const(space, D.bottom, D)
    out = []
    for a in alphas:
        r = rv_refine_up(r, a)
        out.append(r)
    return out


def rv_approx_degree(r: StepRV, n: int) -> StepRV:
    """Depth-``n`` approximation: each cell gets the infimum of ``r`` over it."""
    if n >= r.depth:
        return r
    k = 1 << (r.depth - n)
    D = r.codomain
    cells = [D.inf(r.cells[i * k : (i + 1) * k]) for i in range(1 << n)]
    return StepRV(r.space, n, cells, D)


def preimage_mass(r: StepRV, O: Sequence) -> Dyadic:
    """``nu(r^-1(union_b up(b)))``."""
    D = r.codomain
    hits = sum(1 for c in r.cells if any(D.way_below(b, c) for b in O))
    return Dyadic(hits, r.depth)


def rv_member_q_open(r: StepRV, q, O: Sequence) -> bool:
    """Membership in ``[q -> O]``: ``nu(r^-1(O)) > q``."""
    return preimage_mass(r, O) > dy(q)


def _bits_to_quat(w: str) -> str:
    return "".join(str(2 * int(w[i]) + int(w[i + 1])) for i in range(0, len(w) - 1, 2))


def rv_precompose(r: StepRV, h) -> StepRV:
    """``r o h`` for a measure-preserving reparametrisation ``h``.

    ``h`` may be ``("perm", pi)`` (bit positions: ``h(w)_i = w_{pi[i]}``), a
    :class:`~domprob.pairing.PairingDescriptor` with role ``h1``/``h2``, or
    ``None`` for the identity.
    """
    from .pairing import PairingDescriptor, hilbert_cell

    if h is None:
        return r
    D = r.codomain
    n = r.depth
    if isinstance(h, tuple) and h and h[0] == "perm":
        pi = list(h[1])
        if sorted(pi) != list(range(len(pi))):
            raise ValueError("not a permutation")
        if not r.space.is_cantor:
            raise Unsupported("bit permutations act on Cantor spaces")
        N = max(n, len(pi))
        if N > MAX_DEPTH:
            raise DepthOverflow(f"depth {N} > {MAX_DEPTH}")
        P = DyadicPartition(r.space, N)
        cells = []
        for i in range(P.size):
            w = P.word(i)
            hw = "".join(w[pi[k]] if k < len(pi) else w[k] for k in range(N))
            cells.append(r.cells[int(hw[:n], 2) if n else 0])
        return StepRV(r.space, N, cells, D)
    if isinstance(h, PairingDescriptor):
        if h.role not in ("h1", "h2"):
            raise ValueError("precomposition needs a projection h1 or h2")
        N = 2 * n
        if N > MAX_DEPTH:
            raise DepthOverflow(f"depth {N} > {MAX_DEPTH}")
        P = DyadicPartition(r.space, N)
        cells = []
        for i in range(P.size):
            w = P.word(i)
            if h.kind == "interleave":
                part = w[0::2] if h.role == "h1" else w[1::2]
                cells.append(r.cells[int(part, 2) if n else 0])
            else:
                x, y = hilbert_cell(_bits_to_quat(w))
                iv = x if h.role == "h1" else y
                cells.append(r.cells[iv.lo.floor_at(n)])
        return StepRV(r.space, N, cells, D)
    raise TypeError(f"unsupported reparametrisation {h!r}")


def rv_equiv_witness(r: StepRV, s: StepRV) -> List[int]:
    """Permutation ``sigma`` of depth-``N`` cylinders with ``r = s o h``.

    ``h`` sends the cylinder of cell ``i`` onto the cylinder of cell
    ``sigma[i]`` (keeping the tail), so ``r.cells[i] == s.cells[sigma[i]]``
    at the common depth ``N = max(r.depth, s.depth)``.
    """
    if r.space is not SpaceKind.CANTOR or s.space is not SpaceKind.CANTOR:
        raise Unsupported("equivalence witnesses are built on Cantor space")
    if not rv_equiv(r, s):
        raise NotEquivalent("push-forward valuations differ")
    n, a, b = _common(r, s)
    pool: Dict[object, List[int]] = {}
    for j, d in enumerate(b):
        pool.setdefault(d, []).append(j)
    for v in pool.values():
        v.reverse()
    return [pool[c].pop() for c in a]


def apply_witness(s: StepRV, sigma: Sequence[int]) -> StepRV:
    """``s o h`` for the cylinder permutation ``sigma``."""
    N = (len(sigma) - 1).bit_length()
    cs = s.cells_at(N)
    return StepRV(s.space, N, [cs[j] for j in sigma], s.codomain)
