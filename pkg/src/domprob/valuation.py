"""Normalised simple valuations and their exact order/way-below deciders.

A simple valuation is a finite convex combination ``sum p_i delta(c_i)`` with
dyadic weights.  Comparisons are decided through the transport formulation:
``alpha <= beta`` exactly when mass can be moved from the atoms of ``alpha``
to the atoms of ``beta`` along edges ``c_i <= d_j`` so that every row sends
``p_i`` and every column receives ``q_j``.  Weights are scaled to integers at
a common denominator and the feasibility question becomes an integer
max-flow problem, so every answer is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from .domain import UNBOUNDED, Domain, IntervalUnit, Product, _split_top
from .dyadic import ONE, ZERO, Dyadic, DyInterval, dy
from .errors import ChainNotIncreasing, DegenerateConditioning, DomainMismatch, ParseError

__all__ = [
    "SimpleValuation",
    "ProductValuation",
    "Flow",
    "val_leq",
    "val_way_below",
    "val_way_below_subset_test",
    "mass_on_open",
    "lower_bounds",
    "bayes_bounds",
    "uniform_unit_valuation",
]


class SimpleValuation:
    """``sum p_i delta(c_i)`` with positive dyadic weights summing to one."""

    __slots__ = ("domain", "atoms")

    def __init__(self, domain: Domain, atoms: Iterable[Tuple[object, object]]):
        merged: Dict[object, Dyadic] = {}
        for w, e in atoms:
            w = dy(w)
            domain.check(e)
            if w <= ZERO:
                raise ValueError(f"weight {w} is not positive")
            merged[e] = merged.get(e, ZERO) + w
        total = ZERO
        for w in merged.values():
            total = total + w
        if total != ONE:
            raise ValueError(f"weights sum to {total}, not 1")
        self.domain = domain
        self.atoms: Tuple[Tuple[Dyadic, object], ...] = tuple((w, e) for e, w in merged.items())

    @classmethod
    def point(cls, domain: Domain, e) -> "SimpleValuation":
        return cls(domain, [(ONE, e)])

    @property
    def weights(self) -> List[Dyadic]:
        return [w for w, _ in self.atoms]

    @property
    def elems(self) -> list:
        return [e for _, e in self.atoms]

    def as_dict(self) -> Dict[object, Dyadic]:
        return {e: w for w, e in self.atoms}

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SimpleValuation)
            and self.domain == other.domain
            and self.as_dict() == other.as_dict()
        )

    def __hash__(self) -> int:
        return hash(frozenset(self.as_dict().items()))

    def __len__(self) -> int:
        return len(self.atoms)

    def format(self) -> str:
        return " + ".join(f"{w}*delta({self.domain.format_elem(e)})" for w, e in self.atoms)

    __str__ = format

    def __repr__(self) -> str:
        return f"SimpleValuation({self.format()})"

    def sorted_format(self) -> str:
        """Order-independent text form, used when comparing outputs."""
        parts = sorted(f"{w}*delta({self.domain.format_elem(e)})" for w, e in self.atoms)
        return " + ".join(parts)

    @classmethod
    def parse(cls, domain: Domain, text: str) -> "SimpleValuation":
        atoms = []
        for term in _split_top(text, "+"):
            if not term:
                raise ParseError(f"empty term in valuation {text!r}")
            if "*" not in term:
                raise ParseError(f"valuation term must be 'w*delta(e)': {term!r}")
            w, rest = term.split("*", 1)
            rest = rest.strip()
            if not (rest.startswith("delta(") and rest.endswith(")")):
                raise ParseError(f"valuation term must be 'w*delta(e)': {term!r}")
            atoms.append((Dyadic.parse(w), domain.parse_elem(rest[len("delta("):-1])))
        try:
            return cls(domain, atoms)
        except ValueError as exc:
            raise ParseError(str(exc)) from exc

    def bottom_index(self) -> Optional[int]:
        for i, (_, e) in enumerate(self.atoms):
            if self.domain.is_bottom(e):
                return i
        return None

    def denominator_exponent(self) -> int:
        return max(w.e for w, _ in self.atoms)

    def expand(self) -> "SimpleValuation":
        return self


@dataclass
class Flow:
    """A transport plan ``t[(i, j)]`` between the atoms of two valuations."""

    entries: Dict[Tuple[int, int], Dyadic] = field(default_factory=dict)

    def row_sum(self, i: int) -> Dyadic:
        return sum((t for (a, _), t in self.entries.items() if a == i), ZERO)

    def col_sum(self, j: int) -> Dyadic:
        return sum((t for (_, b), t in self.entries.items() if b == j), ZERO)

    def validate(
        self,
        alpha: SimpleValuation,
        beta: SimpleValuation,
        edge_ok: Callable[[object, object], bool],
        strict_row: Optional[int] = None,
    ) -> bool:
        """Check marginals, positivity, edge admissibility and (optionally) a full row."""
        for (i, j), t in self.entries.items():
            if not (ZERO < t <= ONE):
                return False
            if not edge_ok(alpha.atoms[i][1], beta.atoms[j][1]):
                return False
        for i, (p, _) in enumerate(alpha.atoms):
            if self.row_sum(i) != p:
                return False
        for j, (q, _) in enumerate(beta.atoms):
            if self.col_sum(j) != q:
                return False
        if strict_row is not None:
            if any((strict_row, j) not in self.entries for j in range(len(beta.atoms))):
                return False
        return True

    def format(self, alpha: SimpleValuation = None, beta: SimpleValuation = None) -> str:
        lines = []
        for (i, j), t in sorted(self.entries.items()):
            if alpha is not None and beta is not None:
                D = alpha.domain
                lines.append(f"{D.format_elem(alpha.atoms[i][1])} -> {D.format_elem(beta.atoms[j][1])}: {t}")
            else:
                lines.append(f"({i},{j}): {t}")
        return "\n".join(lines)


def _same_domain(alpha, beta) -> None:
    if alpha.domain != beta.domain:
        raise DomainMismatch(f"{alpha.domain!r} vs {beta.domain!r}")


def _transport(
    supply: Sequence[int],
    demand: Sequence[int],
    edges: Iterable[Tuple[int, int]],
) -> Optional[Dict[Tuple[int, int], int]]:
    """Integer transport plan meeting all supplies and demands, or None."""
    total = sum(supply)
    if total != sum(demand):
        return None
    G = nx.DiGraph()
    G.add_node("s")
    G.add_node("t")
    for i, a in enumerate(supply):
        if a:
            G.add_edge("s", ("r", i), capacity=a)
    for j, b in enumerate(demand):
        if b:
            G.add_edge(("c", j), "t", capacity=b)
    for i, j in edges:
        if supply[i] and demand[j]:
            G.add_edge(("r", i), ("c", j))
    if total == 0:
        return {}
    value, flow = nx.maximum_flow(G, "s", "t")
    if value != total:
        return None
    plan: Dict[Tuple[int, int], int] = {}
    for u, nbrs in flow.items():
        if isinstance(u, tuple) and u[0] == "r":
            for v, f in nbrs.items():
                if f:
                    plan[(u[1], v[1])] = f
    return plan


def _scaled(ws: Sequence[Dyadic], N: int) -> List[int]:
    return [w.m << (N - w.e) for w in ws]


def val_leq(alpha: SimpleValuation, beta: SimpleValuation) -> Tuple[bool, Optional[Flow]]:
    """Decide ``alpha <= beta``; a witness flow is returned when it holds."""
    alpha, beta = alpha.expand(), beta.expand()
    _same_domain(alpha, beta)
    D = alpha.domain
    N = max(alpha.denominator_exponent(), beta.denominator_exponent())
    edges = [
        (i, j)
        for i, (_, c) in enumerate(alpha.atoms)
        for j, (_, d) in enumerate(beta.atoms)
        if D.below(c, d)
    ]
    plan = _transport(_scaled(alpha.weights, N), _scaled(beta.weights, N), edges)
    if plan is None:
        return False, None
    return True, Flow({k: Dyadic(v, N) for k, v in plan.items()})


def val_way_below(alpha: SimpleValuation, beta: SimpleValuation) -> Tuple[bool, Optional[Flow]]:
    """Decide ``alpha << beta`` via a flow whose bottom row is strictly positive.

    Strictness is enforced by reserving ``2**-(N+n+1)`` on every edge of the
    bottom row (``n`` = number of columns) before solving the remaining
    transport problem.  All quantities are multiples of ``2**-N``, so a
    strictly positive flow exists exactly when this reservation leaves a
    feasible problem.
    """
    alpha, beta = alpha.expand(), beta.expand()
    _same_domain(alpha, beta)
    D = alpha.domain
    i0 = alpha.bottom_index()
    if i0 is None:
        return False, None
    n = len(beta.atoms)
    N = max(alpha.denominator_exponent(), beta.denominator_exponent())
    M = N + n + 1
    supply = _scaled(alpha.weights, M)
    demand = _scaled(beta.weights, M)
    supply[i0] -= n
    if supply[i0] < 0:
        return False, None
    demand = [q - 1 for q in demand]
    edges = [
        (i, j)
        for i, (_, c) in enumerate(alpha.atoms)
        for j, (_, d) in enumerate(beta.atoms)
        if D.way_below(c, d)
    ]
    plan = _transport(supply, demand, edges)
    if plan is None:
        return False, None
    for j in range(n):
        plan[(i0, j)] = plan.get((i0, j), 0) + 1
    return True, Flow({k: Dyadic(v, M) for k, v in plan.items() if v})


def _up_mass(beta: SimpleValuation, gens: Sequence) -> Dyadic:
    """``beta`` of the union of ``{x : g << x}`` over the generators."""
    D = beta.domain
    total = ZERO
    for q, d in beta.atoms:
        if any(D.way_below(g, d) for g in gens):
            total = total + q
    return total


def val_way_below_subset_test(sigma: SimpleValuation, beta: SimpleValuation) -> bool:
    """Subset form of the way-below criterion.

    ``sigma << beta`` iff ``sigma`` has a bottom atom and, for every non-empty
    set ``J`` of its other atoms, ``sum_J p_j < beta(union_J up(c_j))`` where
    ``up(c)`` is the set of elements way above ``c``.
    """
    sigma, beta = sigma.expand(), beta.expand()
    _same_domain(sigma, beta)
    if sigma.bottom_index() is None:
        return False
    D = sigma.domain
    rest = [(p, c) for p, c in sigma.atoms if not D.is_bottom(c)]
    for k in range(1, len(rest) + 1):
        for J in combinations(rest, k):
            lhs = ZERO
            for p, _ in J:
                lhs = lhs + p
            if not lhs < _up_mass(beta, [c for _, c in J]):
                return False
    return True


def mass_on_open(alpha, O: Sequence) -> Dyadic:
    """Mass of the open set ``union_{b in O} {x : b << x}``."""
    if isinstance(alpha, ProductValuation):
        return alpha.mass_on_open(O)
    return _up_mass(alpha, list(O))


class ProductValuation:
    """Product ``left (x) right`` of simple valuations on a product domain.

    Kept factorised so that fine product grids (a million atoms) never need
    to be materialised.
    """

    def __init__(self, left: SimpleValuation, right: SimpleValuation):
        self.left = left
        self.right = right
        self.domain = Product(left.domain, right.domain)

    def __repr__(self) -> str:
        return f"ProductValuation({len(self.left)}x{len(self.right)} atoms)"

    def expand(self) -> SimpleValuation:
        return SimpleValuation(
            self.domain,
            [(p * q, (a, b)) for p, a in self.left.atoms for q, b in self.right.atoms],
        )

    def mass_on_open(self, O: Sequence) -> Dyadic:
        L = self.left.domain
        total = ZERO
        cache: Dict[frozenset, Dyadic] = {}
        for p, a in self.left.atoms:
            live = frozenset(i for i, g in enumerate(O) if L.way_below(g[0], a))
            if not live:
                continue
            if live not in cache:
                cache[live] = _up_mass(self.right, [O[i][1] for i in sorted(live)])
            total = total + p * cache[live]
        return total

    def leq(self, other: "ProductValuation") -> bool:
        """Sufficient test: both factors increase."""
        return val_leq(self.left, other.left)[0] and val_leq(self.right, other.right)[0]


def _chain_ok(chain: Sequence) -> None:
    for a, b in zip(chain, chain[1:]):
        if isinstance(a, ProductValuation) and isinstance(b, ProductValuation):
            ok = a.leq(b)
        else:
            ok = val_leq(a, b)[0]
        if not ok:
            raise ChainNotIncreasing("chain is not increasing")


def lower_bounds(chain: Sequence, O: Sequence) -> List[Dyadic]:
    """Masses of ``O`` along an increasing chain (non-decreasing lower bounds)."""
    _chain_ok(chain)
    return [mass_on_open(a, O) for a in chain]


def _meet_generators(D: Domain, U: Sequence, V: Sequence) -> list:
    """Generators of ``up(U) & up(V)`` via pairwise joins."""
    out = []
    for u in U:
        for v in V:
            j = D.join(u, v)
            if j is not UNBOUNDED and j not in out:
                out.append(j)
    return out


def _ratio(num: Dyadic, den: Dyadic, precision: int, up: bool) -> Dyadic:
    from .dyadic import _div_round

    return _div_round(num, den, precision, up)


def bayes_bounds(
    chain: Sequence,
    U: Sequence,
    V: Sequence,
    V_ext: Sequence,
    UV_ext: Optional[Sequence] = None,
    precision: int = 64,
) -> List[DyInterval]:
    """Stage-wise enclosures of the conditional probability ``P(U | V)``.

    Opens are generator lists.  ``V_ext`` must generate the exterior of ``V``
    and ``UV_ext`` (optional) the exterior of ``U & V``; boundaries are taken
    to be null.  Lower ends are ``L(U&V) / (1 - L(V_ext))`` rounded down, upper
    ends ``(1 - L(UV_ext)) / L(V)`` rounded up (or the trivial 1), clipped to
    ``[0, 1]``.
    """
    _chain_ok(chain)
    if not chain:
        return []
    D = chain[0].domain
    UV = _meet_generators(D, U, V)
    out: List[DyInterval] = []
    any_positive = False
    for a in chain:
        l_uv = mass_on_open(a, UV)
        l_v = mass_on_open(a, V)
        l_vext = mass_on_open(a, V_ext)
        up_v = ONE - l_vext
        if l_v > ZERO:
            any_positive = True
        if up_v <= ZERO:
            out.append(DyInterval(ZERO, ONE))
            continue
        lo = min(ONE, _ratio(l_uv, up_v, precision, False))
        if l_v > ZERO:
            up_uv = ONE - mass_on_open(a, UV_ext) if UV_ext is not None else up_v
            up_uv = min(up_uv, up_v)
            hi = min(ONE, _ratio(up_uv, l_v, precision, True))
        else:
            hi = ONE
        out.append(DyInterval(lo, max(lo, hi)))
    if not any_positive:
        raise DegenerateConditioning("every lower bound of P(V) is 0")
    return out


def uniform_unit_valuation(depth: int, domain: Domain = None) -> SimpleValuation:
    """Equal mass on each closed dyadic cell of [0,1] at the given depth."""
    D = domain or IntervalUnit()
    w = Dyadic(1, depth)
    return SimpleValuation(
        D, [(w, D.canon(DyInterval(Dyadic(i, depth), Dyadic(i + 1, depth)))) for i in range(1 << depth)]
    )
