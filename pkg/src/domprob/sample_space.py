"""The four sample spaces, their canonical basic opens and exact measure.

Cantor kinds (``Cantor``, ``CantorZero``) use finite unions of cylinders,
stored as a sorted antichain of bit strings with sibling pairs merged, so two
opens are equal as sets exactly when their representations are equal.  Unit
kinds (``UnitClosed``, ``UnitOpen``) use sorted, merged open intervals with
dyadic endpoints.  Touching intervals are merged, which only adds a null set
(the shared endpoint).
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

from .dyadic import ONE, ZERO, Dyadic, dy
from .errors import KindMismatch, ParseError, Unsupported

__all__ = [
    "SpaceKind",
    "BasicOpen",
    "DyadicPartition",
    "measure",
    "boolean",
    "open_way_below",
    "split_indices",
    "parse_kind",
]


class SpaceKind(enum.Enum):
    CANTOR = "Cantor"
    CANTOR_ZERO = "CantorZero"
    UNIT_CLOSED = "UnitClosed"
    UNIT_OPEN = "UnitOpen"

    @property
    def is_cantor(self) -> bool:
        return self in (SpaceKind.CANTOR, SpaceKind.CANTOR_ZERO)

    @property
    def is_unit(self) -> bool:
        return not self.is_cantor

    def __str__(self) -> str:
        return self.value


_KIND_ALIASES = {
    "cantor": SpaceKind.CANTOR,
    "cantorzero": SpaceKind.CANTOR_ZERO,
    "cantor0": SpaceKind.CANTOR_ZERO,
    "unitclosed": SpaceKind.UNIT_CLOSED,
    "unit": SpaceKind.UNIT_CLOSED,
    "unitopen": SpaceKind.UNIT_OPEN,
}


def parse_kind(text: str) -> SpaceKind:
    key = text.strip().lower().replace("_", "").replace("-", "")
    if key not in _KIND_ALIASES:
        raise ParseError(f"unknown sample space {text!r}")
    return _KIND_ALIASES[key]


def _canon_cylinders(words: Iterable[str]) -> Tuple[str, ...]:
    ws = set(words)
    for w in ws:
        if any(c not in "01" for c in w):
            raise ValueError(f"cylinder {w!r} is not a bit string")
    ws = {w for w in ws if not any(w[:k] in ws for k in range(len(w)))}
    if not ws:
        return ()
    by_len: dict = {}
    for w in ws:
        by_len.setdefault(len(w), set()).add(w)
    for L in range(max(by_len), 0, -1):
        bucket = by_len.get(L, set())
        for w in sorted(bucket):
            if w[-1] == "0" and w in bucket and (w[:-1] + "1") in bucket:
                bucket.discard(w)
                bucket.discard(w[:-1] + "1")
                by_len.setdefault(L - 1, set()).add(w[:-1])
    return tuple(sorted(w for b in by_len.values() for w in b))


def _canon_intervals(parts: Iterable[Tuple[Dyadic, Dyadic]]) -> Tuple[Tuple[Dyadic, Dyadic], ...]:
    items = []
    for lo, hi in parts:
        lo, hi = dy(lo), dy(hi)
        lo, hi = max(lo, ZERO), min(hi, ONE)
        if lo < hi:
            items.append((lo, hi))
    items.sort(key=lambda p: (p[0].to_fraction(), p[1].to_fraction()))
    out: List[Tuple[Dyadic, Dyadic]] = []
    for lo, hi in items:
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return tuple(out)


@dataclass(frozen=True)
class BasicOpen:
    """A finite union of cylinders or of open dyadic intervals."""

    kind: SpaceKind
    parts: tuple

    @classmethod
    def make(cls, kind: SpaceKind, parts: Iterable) -> "BasicOpen":
        if kind.is_cantor:
            return cls(kind, _canon_cylinders(parts))
        return cls(kind, _canon_intervals(parts))

    @classmethod
    def empty(cls, kind: SpaceKind) -> "BasicOpen":
        return cls(kind, ())

    @classmethod
    def whole(cls, kind: SpaceKind) -> "BasicOpen":
        if kind.is_cantor:
            return cls(kind, ("",))
        return cls(kind, ((ZERO, ONE),))

    def is_empty(self) -> bool:
        return not self.parts

    def __str__(self) -> str:
        if not self.parts:
            return "empty"
        if self.kind.is_cantor:
            return "+".join("cyl:" + w for w in self.parts)
        return "+".join(f"({lo},{hi})" for lo, hi in self.parts)

    def contains_point(self, x: Dyadic) -> bool:
        """Membership of a dyadic point (Unit kinds only)."""
        return any(lo < x < hi for lo, hi in self.parts)

    def contains_cylinder(self, w: str) -> bool:
        return any(w.startswith(c) for c in self.parts)


_UNIT_PART = re.compile(r"^\(\s*([^,()]+)\s*,\s*([^,()]+)\s*\)$")


def parse_open(kind: SpaceKind, text: str) -> BasicOpen:
    t = text.strip()
    if t in ("empty", "", "∅"):
        return BasicOpen.empty(kind)
    parts = [p.strip() for p in t.split("+")]
    if kind.is_cantor:
        words = []
        for p in parts:
            if not p.startswith("cyl:"):
                raise ParseError(f"cylinder must look like 'cyl:0101': {p!r}")
            w = p[4:]
            if any(c not in "01" for c in w):
                raise ParseError(f"cylinder {p!r} is not a bit string")
            words.append(w)
        return BasicOpen.make(kind, words)
    ivs = []
    for p in parts:
        mt = _UNIT_PART.match(p)
        if not mt:
            raise ParseError(f"open interval must look like '(a,b)': {p!r}")
        lo, hi = Dyadic.parse(mt.group(1)), Dyadic.parse(mt.group(2))
        if not (ZERO <= lo < hi <= ONE):
            raise ParseError(f"interval {p!r} must satisfy 0 <= a < b <= 1")
        ivs.append((lo, hi))
    return BasicOpen.make(kind, ivs)


def measure(O: BasicOpen) -> Dyadic:
    if O.kind.is_cantor:
        total = ZERO
        for w in O.parts:
            total = total + Dyadic(1, len(w))
        return total
    total = ZERO
    for lo, hi in O.parts:
        total = total + (hi - lo)
    return total


def _cantor_complement(words: Sequence[str]) -> List[str]:
    out: List[str] = []
    ws = set(words)

    def rec(prefix: str) -> None:
        if any(prefix.startswith(w) for w in ws):
            return
        if not any(w.startswith(prefix) for w in ws):
            out.append(prefix)
            return
        rec(prefix + "0")
        rec(prefix + "1")

    rec("")
    return out


def _same_kind(A: BasicOpen, B: BasicOpen) -> None:
    if A.kind is not B.kind:
        raise KindMismatch(f"{A.kind} vs {B.kind}")


def boolean(op: str, A: BasicOpen, B: BasicOpen = None) -> BasicOpen:
    """``union``, ``intersect`` or ``complement_interior`` (B ignored)."""
    if op == "complement_interior":
        if A.kind.is_cantor:
            return BasicOpen.make(A.kind, _cantor_complement(A.parts))
        gaps = []
        prev = ZERO
        for lo, hi in A.parts:
            if prev < lo:
                gaps.append((prev, lo))
            prev = hi
        if prev < ONE:
            gaps.append((prev, ONE))
        return BasicOpen.make(A.kind, gaps)
    _same_kind(A, B)
    if op == "union":
        return BasicOpen.make(A.kind, list(A.parts) + list(B.parts))
    if op == "intersect":
        if A.kind.is_cantor:
            out = []
            for u in A.parts:
                for v in B.parts:
                    if v.startswith(u):
                        out.append(v)
                    elif u.startswith(v):
                        out.append(u)
            return BasicOpen.make(A.kind, out)
        out = []
        for a0, a1 in A.parts:
            for b0, b1 in B.parts:
                lo, hi = max(a0, b0), min(a1, b1)
                if lo < hi:
                    out.append((lo, hi))
        return BasicOpen.make(A.kind, out)
    raise ValueError(f"unknown boolean op {op!r}")


def open_way_below(U: BasicOpen, V: BasicOpen) -> bool:
    """Way-below in the lattice of opens.

    Cantor: clopens are compact, so this is inclusion.  Unit kinds: the
    closure of ``U`` (taken in the reals) must lie inside ``V``.
    """
    _same_kind(U, V)
    if U.kind is SpaceKind.CANTOR_ZERO:
        raise Unsupported("way-below on opens of the space without eventually-zero sequences")
    if U.kind is SpaceKind.CANTOR:
        return boolean("intersect", U, V) == U
    for lo, hi in U.parts:
        if not any(vlo < lo and hi < vhi for vlo, vhi in V.parts):
            return False
        if U.kind is SpaceKind.UNIT_OPEN and (lo == ZERO or hi == ONE):
            return False
    return True


def split_indices(s: str) -> Tuple[str, str]:
    """Even- and odd-position subsequences of a bit string."""
    return s[0::2], s[1::2]


@dataclass(frozen=True)
class DyadicPartition:
    """The ``2**depth`` cells of a sample space at a given depth.

    Cell ``i`` is the cylinder of the ``depth``-bit binary word of ``i``, or
    the open interval ``(i/2**depth, (i+1)/2**depth)``.
    """

    kind: SpaceKind
    depth: int

    @property
    def size(self) -> int:
        return 1 << self.depth

    def word(self, i: int) -> str:
        return format(i, f"0{self.depth}b") if self.depth else ""

    def cell_open(self, i: int) -> BasicOpen:
        if self.kind.is_cantor:
            return BasicOpen(self.kind, (self.word(i),))
        return BasicOpen(self.kind, ((Dyadic(i, self.depth), Dyadic(i + 1, self.depth)),))

    def cell_measure(self) -> Dyadic:
        return Dyadic(1, self.depth)

    def cells_in(self, O: BasicOpen) -> List[int]:
        """Indices of the cells contained in ``O``."""
        out = []
        for i in range(self.size):
            if self.kind.is_cantor:
                if O.contains_cylinder(self.word(i)):
                    out.append(i)
            else:
                lo, hi = Dyadic(i, self.depth), Dyadic(i + 1, self.depth)
                if any(a <= lo and hi <= b for a, b in O.parts):
                    out.append(i)
        return out


def union_of_cells(kind: SpaceKind, depth: int, cells: Iterable[int]) -> BasicOpen:
    P = DyadicPartition(kind, depth)
    if kind.is_cantor:
        return BasicOpen.make(kind, [P.word(i) for i in cells])
    return BasicOpen.make(kind, [(Dyadic(i, depth), Dyadic(i + 1, depth)) for i in cells])
