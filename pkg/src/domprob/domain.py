"""Bounded-complete domains with decidable order, way-below, joins and infima.

Four concrete kinds are supported:

* ``FinitePoset``: explicit finite poset with a bottom, validated to be
  bounded complete.  Finite posets are algebraic, so way-below equals below.
* ``IntervalReal``: compact dyadic intervals of the real line under reverse
  inclusion, with ``BOT`` standing for the whole line.
* ``IntervalUnit``: the same inside ``[0, 1]``; ``BOT`` is ``[0, 1]`` itself.
* ``Product``: binary product, ordered componentwise.  Elements are tuples.

Elements are plain hashable values: poset names are ``str``, interval
elements are :class:`DyInterval` or :data:`BOT`, product elements are pairs.
"""

from __future__ import annotations

from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .dyadic import ONE, ZERO, Dyadic, DyInterval
from .errors import DomainConstructionError, ElementDomainMismatch, ParseError

__all__ = [
    "BOT",
    "UNBOUNDED",
    "Domain",
    "FinitePoset",
    "IntervalReal",
    "IntervalUnit",
    "Product",
    "below",
    "way_below",
    "join",
    "inf",
    "basis_enum",
    "interpolate",
    "parse_domain",
]


class _Bottom:
    __slots__ = ()
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = object.__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "BOT"

    def __str__(self) -> str:
        return "bot"

    def __reduce__(self):
        return (_Bottom, ())


class _Unbounded:
    __slots__ = ()

    def __repr__(self) -> str:
        return "UNBOUNDED"

    def __bool__(self) -> bool:
        return False


BOT = _Bottom()
UNBOUNDED = _Unbounded()


def _split_top(text: str, sep: str = ",") -> List[str]:
    """Split on ``sep`` outside brackets."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts]


class Domain:
    """Common interface; concrete subclasses implement the order structure."""

    name = "domain"

    @property
    def bottom(self):
        raise NotImplementedError

    def check(self, a) -> None:
        if not self.is_element(a):
            raise ElementDomainMismatch(f"{a!r} is not an element of {self}")

    def is_element(self, a) -> bool:
        raise NotImplementedError

    def below(self, a, b) -> bool:
        raise NotImplementedError

    def way_below(self, a, b) -> bool:
        raise NotImplementedError

    def join(self, a, b):
        raise NotImplementedError

    def inf(self, xs: Sequence):
        raise NotImplementedError

    def basis(self, level: int) -> list:
        raise NotImplementedError

    def parse_elem(self, text: str):
        raise NotImplementedError

    def format_elem(self, a) -> str:
        raise NotImplementedError

    def is_bottom(self, a) -> bool:
        return a == self.bottom

    def interpolate(self, a, b):
        """Return some basis element ``z`` with ``a << z << b``."""
        raise NotImplementedError


class FinitePoset(Domain):
    """A finite bounded-complete poset given by covering edges ``lo < hi``."""

    def __init__(self, elements: Sequence[str], hasse: Iterable[Tuple[str, str]], bottom: str):
        self.elements: Tuple[str, ...] = tuple(elements)
        if len(set(self.elements)) != len(self.elements):
            raise DomainConstructionError("duplicate element names")
        names = set(self.elements)
        self.hasse: Tuple[Tuple[str, str], ...] = tuple((str(a), str(b)) for a, b in hasse)
        for a, b in self.hasse:
            if a not in names or b not in names:
                raise DomainConstructionError(f"edge {a}<{b} mentions unknown element")
            if a == b:
                raise DomainConstructionError(f"self-loop on {a}")
        if bottom not in names:
            raise DomainConstructionError(f"bottom {bottom!r} is not an element")
        self._bottom = bottom
        succ: Dict[str, set] = {x: set() for x in self.elements}
        for a, b in self.hasse:
            succ[a].add(b)
        # reflexive-transitive closure: up[x] = {y : x <= y}
        up: Dict[str, FrozenSet[str]] = {}
        for x in self.elements:
            seen = {x}
            stack = [x]
            while stack:
                for y in succ[stack.pop()]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            up[x] = frozenset(seen)
        for x in self.elements:
            for y in up[x]:
                if y != x and x in up[y]:
                    raise DomainConstructionError(f"cycle through {x} and {y}")
        if up[bottom] != names:
            raise DomainConstructionError(f"{bottom} is not below every element")
        self.up = up
        self.down = {x: frozenset(y for y in self.elements if x in up[y]) for x in self.elements}
        self._joins: Dict[Tuple[str, str], object] = {}
        for a in self.elements:
            for b in self.elements:
                ub = up[a] & up[b]
                if not ub:
                    self._joins[(a, b)] = UNBOUNDED
                    continue
                least = [c for c in ub if ub <= up[c]]
                if not least:
                    raise DomainConstructionError(f"{a} and {b} are bounded but have no least upper bound")
                self._joins[(a, b)] = least[0]

    name = "poset"

    def __repr__(self) -> str:
        return f"FinitePoset({list(self.elements)}, bottom={self._bottom!r})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FinitePoset)
            and self.elements == other.elements
            and set(self.hasse) == set(other.hasse)
            and self._bottom == other._bottom
        )

    def __hash__(self) -> int:
        return hash((self.elements, frozenset(self.hasse), self._bottom))

    @property
    def bottom(self) -> str:
        return self._bottom

    def is_element(self, a) -> bool:
        return isinstance(a, str) and a in self.up

    def below(self, a, b) -> bool:
        return b in self.up[a]

    def way_below(self, a, b) -> bool:
        return b in self.up[a]

    def join(self, a, b):
        return self._joins[(a, b)]

    def inf(self, xs):
        common = frozenset(self.elements)
        for x in xs:
            common &= self.down[x]
        for c in common:
            if all(c in self.up[d] for d in common):
                return c
        raise AssertionError("bounded completeness violated")

    def basis(self, level: int) -> list:
        return list(self.elements)

    def parse_elem(self, text: str):
        t = text.strip()
        if t not in self.up:
            raise ParseError(f"unknown poset element {t!r}")
        return t

    def format_elem(self, a) -> str:
        return a

    def interpolate(self, a, b):
        return a

    @classmethod
    def parse(cls, text: str) -> "FinitePoset":
        """Read the line format::

            elements bot c d
            bottom bot
            bot < c
            c < d

        Blank lines and ``#`` comments are ignored.
        """
        elements: List[str] = []
        edges: List[Tuple[str, str]] = []
        bottom: Optional[str] = None
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("elements"):
                elements.extend(line.split()[1:])
            elif line.startswith("bottom"):
                parts = line.split()
                if len(parts) != 2:
                    raise ParseError(f"bad bottom line: {raw!r}")
                bottom = parts[1]
            elif "<" in line:
                chain = [p.strip() for p in line.split("<")]
                if any(not p for p in chain):
                    raise ParseError(f"bad edge line: {raw!r}")
                edges.extend(zip(chain, chain[1:]))
            else:
                raise ParseError(f"unrecognised poset line: {raw!r}")
        if bottom is None:
            raise ParseError("poset description has no bottom line")
        return cls(elements, edges, bottom)

    def dump(self) -> str:
        lines = ["elements " + " ".join(self.elements), f"bottom {self._bottom}"]
        lines += [f"{a} < {b}" for a, b in self.hasse]
        return "\n".join(lines) + "\n"


class _IntervalDomain(Domain):
    def __eq__(self, other) -> bool:
        return type(self) is type(other)

    def __hash__(self) -> int:
        return hash(type(self).__name__)

    def __repr__(self) -> str:
        return type(self).__name__ + "()"

    @property
    def bottom(self):
        return BOT

    def canon(self, a):
        return a

    def below(self, a, b) -> bool:
        if a is BOT:
            return True
        if b is BOT:
            return False
        return a.lo <= b.lo and b.hi <= a.hi

    def join(self, a, b):
        if a is BOT:
            return b
        if b is BOT:
            return a
        lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
        if lo > hi:
            return UNBOUNDED
        return self.canon(DyInterval(lo, hi))

    def inf(self, xs):
        xs = list(xs)
        if any(x is BOT for x in xs):
            return BOT
        return self.canon(DyInterval(min(x.lo for x in xs), max(x.hi for x in xs)))

    def parse_elem(self, text: str):
        t = text.strip()
        if t in ("bot", "⊥"):
            return BOT
        iv = DyInterval.parse(t)
        a = self.canon(iv)
        self.check(a)
        return a

    def format_elem(self, a) -> str:
        return "bot" if a is BOT else str(a)


class IntervalReal(_IntervalDomain):
    name = "real"

    def is_element(self, a) -> bool:
        return a is BOT or isinstance(a, DyInterval)

    def way_below(self, a, b) -> bool:
        if a is BOT:
            return True
        if b is BOT:
            return False
        return a.lo < b.lo and b.hi < a.hi

    def basis(self, level: int) -> list:
        n = 1 << level
        pts = [Dyadic(i, level) for i in range(-n * n, n * n + 1)]
        out: list = [BOT]
        for i, lo in enumerate(pts):
            for hi in pts[i:]:
                out.append(DyInterval(lo, hi))
        return out

    def interpolate(self, a, b):
        if not self.way_below(a, b):
            raise ValueError("interpolation needs a << b")
        if b is BOT:
            return BOT
        if a is BOT:
            return DyInterval(b.lo - ONE, b.hi + ONE)
        return DyInterval((a.lo + b.lo).half(), (a.hi + b.hi).half())


class IntervalUnit(_IntervalDomain):
    """Intervals inside [0, 1]; touching 0 or 1 counts as interior."""

    name = "unit"
    _FULL = DyInterval(ZERO, ONE)

    def canon(self, a):
        if a is not BOT and a.lo == ZERO and a.hi == ONE:
            return BOT
        return a

    def is_element(self, a) -> bool:
        if a is BOT:
            return True
        return isinstance(a, DyInterval) and a.lo >= ZERO and a.hi <= ONE and not (a.lo == ZERO and a.hi == ONE)

    def as_interval(self, a) -> DyInterval:
        return self._FULL if a is BOT else a

    def below(self, a, b) -> bool:
        a, b = self.as_interval(a), self.as_interval(b)
        return a.lo <= b.lo and b.hi <= a.hi

    def way_below(self, a, b) -> bool:
        if a is BOT:
            return True
        b = self.as_interval(b)
        return (a.lo < b.lo or a.lo == ZERO) and (b.hi < a.hi or a.hi == ONE)

    def basis(self, level: int) -> list:
        n = 1 << level
        pts = [Dyadic(i, level) for i in range(n + 1)]
        out: list = []
        for i, lo in enumerate(pts):
            for hi in pts[i:]:
                out.append(self.canon(DyInterval(lo, hi)))
        return out

    def interpolate(self, a, b):
        if not self.way_below(a, b):
            raise ValueError("interpolation needs a << b")
        a, b = self.as_interval(a), self.as_interval(b)
        lo = a.lo if a.lo == b.lo else (a.lo + b.lo).half()
        hi = a.hi if a.hi == b.hi else (a.hi + b.hi).half()
        return self.canon(DyInterval(lo, hi))


class Product(Domain):
    """Binary product ordered componentwise; elements are pairs."""

    name = "product"

    def __init__(self, left: Domain, right: Domain):
        self.left = left
        self.right = right

    def __repr__(self) -> str:
        return f"Product({self.left!r}, {self.right!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Product) and self.left == other.left and self.right == other.right

    def __hash__(self) -> int:
        return hash(("product", self.left, self.right))

    @property
    def bottom(self):
        return (self.left.bottom, self.right.bottom)

    def is_element(self, a) -> bool:
        return (
            isinstance(a, tuple)
            and len(a) == 2
            and self.left.is_element(a[0])
            and self.right.is_element(a[1])
        )

    def below(self, a, b) -> bool:
        return self.left.below(a[0], b[0]) and self.right.below(a[1], b[1])

    def way_below(self, a, b) -> bool:
        return self.left.way_below(a[0], b[0]) and self.right.way_below(a[1], b[1])

    def join(self, a, b):
        l = self.left.join(a[0], b[0])
        r = self.right.join(a[1], b[1])
        if l is UNBOUNDED or r is UNBOUNDED:
            return UNBOUNDED
        return (l, r)

    def inf(self, xs):
        xs = list(xs)
        return (self.left.inf([x[0] for x in xs]), self.right.inf([x[1] for x in xs]))

    def basis(self, level: int) -> list:
        return [(l, r) for l in self.left.basis(level) for r in self.right.basis(level)]

    def parse_elem(self, text: str):
        t = text.strip()
        if not (t.startswith("(") and t.endswith(")")):
            raise ParseError(f"product element must be '(a, b)': {text!r}")
        parts = _split_top(t[1:-1])
        if len(parts) != 2:
            raise ParseError(f"product element needs two components: {text!r}")
        return (self.left.parse_elem(parts[0]), self.right.parse_elem(parts[1]))

    def format_elem(self, a) -> str:
        return f"({self.left.format_elem(a[0])}, {self.right.format_elem(a[1])})"

    def interpolate(self, a, b):
        return (self.left.interpolate(a[0], b[0]), self.right.interpolate(a[1], b[1]))


def _checked(D: Domain, *xs) -> None:
    for x in xs:
        D.check(x)


def below(D: Domain, a, b) -> bool:
    _checked(D, a, b)
    return D.below(a, b)


def way_below(D: Domain, a, b) -> bool:
    _checked(D, a, b)
    return D.way_below(a, b)


def join(D: Domain, a, b):
    """Least upper bound, or :data:`UNBOUNDED` when ``{a, b}`` has no upper bound."""
    _checked(D, a, b)
    return D.join(a, b)


def inf(D: Domain, xs: Sequence):
    xs = list(xs)
    if not xs:
        raise ValueError("inf of an empty list")
    _checked(D, *xs)
    return D.inf(xs)


def basis_enum(D: Domain, level: int) -> list:
    return D.basis(level)


def interpolate(D: Domain, a, b):
    _checked(D, a, b)
    return D.interpolate(a, b)


def basis_level(D: Domain, a) -> int:
    """Smallest level whose basis slice contains ``a``."""
    if isinstance(D, FinitePoset):
        return 0
    if isinstance(D, Product):
        return max(basis_level(D.left, a[0]), basis_level(D.right, a[1]))
    if a is BOT:
        return 0
    lvl = max(a.lo.e, a.hi.e)
    if isinstance(D, IntervalReal):
        while max(abs(a.lo), abs(a.hi)) > Dyadic(1 << lvl):
            lvl += 1
    return lvl


def parse_domain(text: str, read_file=None) -> Domain:
    """Parse ``unit``, ``real``, ``poset:PATH`` or ``product(D1, D2)``."""
    t = text.strip()
    if t in ("unit", "IntervalUnit"):
        return IntervalUnit()
    if t in ("real", "IntervalReal"):
        return IntervalReal()
    if t.startswith("poset:"):
        path = t[len("poset:"):]
        if read_file is None:
            with open(path, encoding="utf-8") as fh:
                src = fh.read()
        else:
            src = read_file(path)
        return FinitePoset.parse(src)
    if t.startswith("product(") and t.endswith(")"):
        parts = _split_top(t[len("product("):-1])
        if len(parts) != 2:
            raise ParseError(f"product needs two factors: {text!r}")
        return Product(parse_domain(parts[0], read_file), parse_domain(parts[1], read_file))
    raise ParseError(f"unknown domain {text!r}")


def chain_poset(n: int) -> FinitePoset:
    """The chain ``bot < c1 < ... < cn``; handy for examples."""
    names = ["bot"] + [f"c{i}" for i in range(1, n + 1)]
    return FinitePoset(names, list(zip(names, names[1:])), "bot")


def product_of(domains: Sequence[Domain]) -> Domain:
    """Right-nested product ``D1 x (D2 x (...))``."""
    if len(domains) == 1:
        return domains[0]
    return Product(domains[0], product_of(domains[1:]))


def flatten_product(a, k: int) -> list:
    """Inverse of right nesting for a ``k``-fold product element."""
    out = []
    for _ in range(k - 1):
        out.append(a[0])
        a = a[1]
    out.append(a)
    return out


def nest_product(xs: Sequence) -> object:
    if len(xs) == 1:
        return xs[0]
    return (xs[0], nest_product(xs[1:]))
