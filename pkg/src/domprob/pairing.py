"""Measure-preserving pairings of a sample space with its square.

Cantor space is paired by bit interleaving.  The unit interval is paired by
the Hilbert curve, described by four affine contractions of the unit square
indexed by quaternary digits; the cell of a digit word ``w0 w1 ... w(i-1)``
is ``H_w0(H_w1(... H_w(i-1)([0,1]^2)))``, a square of side ``2**-i``.
All maps are exact dyadic affine maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

from .dyadic import HALF, ONE, ZERO, Dyadic, DyInterval
from .errors import BadDigit, LengthMismatch, Misaligned

__all__ = [
    "PairingDescriptor",
    "interleave",
    "deinterleave",
    "hilbert_cell",
    "hilbert_point",
    "hilbert_preimage",
    "project",
    "HILBERT_MAPS",
]


@dataclass(frozen=True)
class PairingDescriptor:
    kind: str  # "interleave" or "hilbert"
    role: str = "full_h"  # "full_h", "h1" or "h2"

    def __post_init__(self):
        if self.kind not in ("interleave", "hilbert"):
            raise ValueError(f"unknown pairing {self.kind!r}")
        if self.role not in ("full_h", "h1", "h2"):
            raise ValueError(f"unknown pairing role {self.role!r}")


def interleave(x: str, y: str) -> str:
    """``w[2i] = x[i]``, ``w[2i+1] = y[i]``."""
    if len(x) not in (len(y), len(y) + 1):
        raise LengthMismatch(f"cannot interleave lengths {len(x)} and {len(y)}")
    out = []
    for i, a in enumerate(x):
        out.append(a)
        if i < len(y):
            out.append(y[i])
    return "".join(out)


def deinterleave(w: str) -> Tuple[str, str]:
    return w[0::2], w[1::2]


# (a11, a12, a21, a22, b1, b2): (x, y) -> (a11 x + a12 y + b1, a21 x + a22 y + b2)
_Z = ZERO
_H = HALF
HILBERT_MAPS = (
    (_Z, _H, _H, _Z, _Z, _Z),  # (y/2, x/2)
    (_H, _Z, _Z, _H, _Z, _H),  # (x/2, y/2 + 1/2)
    (_H, _Z, _Z, _H, _H, _H),  # (x/2 + 1/2, y/2 + 1/2)
    (_Z, -_H, -_H, _Z, ONE, _H),  # (1 - y/2, 1/2 - x/2)
)

_IDENTITY = (ONE, _Z, _Z, ONE, _Z, _Z)


def _compose(f, g):
    """``f o g`` for affine maps in the tuple layout above."""
    a11, a12, a21, a22, b1, b2 = f
    c11, c12, c21, c22, d1, d2 = g
    return (
        a11 * c11 + a12 * c21,
        a11 * c12 + a12 * c22,
        a21 * c11 + a22 * c21,
        a21 * c12 + a22 * c22,
        a11 * d1 + a12 * d2 + b1,
        a21 * d1 + a22 * d2 + b2,
    )


def _apply(f, x: Dyadic, y: Dyadic) -> Tuple[Dyadic, Dyadic]:
    a11, a12, a21, a22, b1, b2 = f
    return a11 * x + a12 * y + b1, a21 * x + a22 * y + b2


def _check_digits(w: str) -> None:
    for c in w:
        if c not in "0123":
            raise BadDigit(f"{c!r} is not a quaternary digit")


def hilbert_map(w: str):
    _check_digits(w)
    f = _IDENTITY
    for c in w:
        f = _compose(f, HILBERT_MAPS[int(c)])
    return f


def hilbert_cell(w: str) -> Tuple[DyInterval, DyInterval]:
    """The exact sub-square ``H_w0 ... H_w(i-1) [0,1]^2``."""
    f = hilbert_map(w)
    corners = [_apply(f, x, y) for x in (ZERO, ONE) for y in (ZERO, ONE)]
    xs = [c[0] for c in corners]
    ys = [c[1] for c in corners]
    return DyInterval(min(xs), max(xs)), DyInterval(min(ys), max(ys))


def hilbert_point(prefix: str) -> Tuple[DyInterval, DyInterval]:
    """Enclosure of ``h(omega)`` for every ``omega`` with this quaternary prefix."""
    return hilbert_cell(prefix)


def hilbert_curve_point(w: str) -> Tuple[Dyadic, Dyadic]:
    """Image of the left end of the digit cell ``0.w`` (a corner of its square)."""
    return _apply(hilbert_map(w), ZERO, ZERO)


def _aligned(v: Dyadic, i: int) -> bool:
    return v.e <= i


def hilbert_preimage(rect: Tuple[DyInterval, DyInterval], i: int) -> List[str]:
    """Depth-``i`` digit words whose square lies inside the grid-aligned rectangle."""
    X, Y = rect
    for v in (X.lo, X.hi, Y.lo, Y.hi):
        if not _aligned(v, i):
            raise Misaligned(f"{v} is not a multiple of 2^-{i}")
        if v < ZERO or v > ONE:
            raise Misaligned(f"{v} lies outside the unit square")
    out: List[str] = []

    def rec(w: str) -> None:
        x, y = hilbert_cell(w)
        if x.hi <= X.lo or x.lo >= X.hi or y.hi <= Y.lo or y.lo >= Y.hi:
            return
        if X.contains(x) and Y.contains(y):
            if len(w) == i:
                out.append(w)
            else:
                # fully inside: every descendant qualifies
                k = i - len(w)
                for n in range(4 ** k):
                    out.append(w + _quat(n, k))
            return
        if len(w) < i:
            for c in "0123":
                rec(w + c)

    rec("")
    return sorted(out)


def _quat(n: int, k: int) -> str:
    ds = []
    for _ in range(k):
        ds.append(str(n % 4))
        n //= 4
    return "".join(reversed(ds))


def project(role: str, kind: str, prefix: str) -> str:
    """Binary prefix of ``h1`` (or ``h2``) determined by a prefix of ``omega``.

    Interleave: even (odd) positions of the bit prefix.  Hilbert: the digit
    prefix fixes an aligned square; its x (y) side is ``[a/2^i, (a+1)/2^i]``,
    whose longest determined binary prefix is the ``i``-bit word of ``a``.
    """
    if role not in ("h1", "h2"):
        raise ValueError(f"unknown projection {role!r}")
    if kind == "interleave":
        e, o = deinterleave(prefix)
        return e if role == "h1" else o
    if kind == "hilbert":
        x, y = hilbert_cell(prefix)
        iv = x if role == "h1" else y
        i = len(prefix)
        if i == 0:
            return ""
        return format(iv.lo.floor_at(i), f"0{i}b")
    raise ValueError(f"unknown pairing {kind!r}")


def cells_adjacent(a: Tuple[DyInterval, DyInterval], b: Tuple[DyInterval, DyInterval]) -> bool:
    """True when two closed squares share an edge of positive length."""
    (ax, ay), (bx, by) = a, b
    share_x = ax.hi == bx.lo or bx.hi == ax.lo
    share_y = ay.hi == by.lo or by.hi == ay.lo
    overlap_x = min(ax.hi, bx.hi) > max(ax.lo, bx.lo)
    overlap_y = min(ay.hi, by.hi) > max(ay.lo, by.lo)
    return (share_x and overlap_y) or (share_y and overlap_x)
