"""Exact dyadic rationals and outward-rounded interval enclosures.

A dyadic number is ``m / 2**e`` with ``e >= 0``.  The class keeps the pair in
canonical form (``e == 0`` or ``m`` odd), so structural equality is numeric
equality.  Interval enclosures of elementary functions are rounded outward
onto the grid ``2**-(p + 1)``; because the grids refine as ``p`` grows, the
enclosures for increasing precision are nested.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Tuple, Union

from .errors import DivisionByIntervalContainingZero, DomainViolation, ParseError

__all__ = [
    "Dyadic",
    "DyInterval",
    "dy",
    "dy_arith",
    "ival_arith",
    "ival_elem",
    "iroot",
]

Number = Union["Dyadic", int]


def _canon(m: int, e: int) -> Tuple[int, int]:
    if m == 0:
        return 0, 0
    if e < 0:
        return m << (-e), 0
    if e > 0 and not m & 1:
        tz = (m & -m).bit_length() - 1
        k = min(tz, e)
        return m >> k, e - k
    return m, e


class Dyadic:
    """An exact binary rational ``mantissa / 2**exponent``."""

    __slots__ = ("m", "e")

    def __init__(self, mantissa: int = 0, exponent: int = 0):
        if not isinstance(mantissa, int) or not isinstance(exponent, int):
            raise TypeError("Dyadic needs integer mantissa and exponent")
        self.m, self.e = _canon(mantissa, exponent)

    @classmethod
    def _raw(cls, m: int, e: int) -> "Dyadic":
        obj = object.__new__(cls)
        obj.m, obj.e = _canon(m, e)
        return obj

    @property
    def mantissa(self) -> int:
        return self.m

    @property
    def exponent(self) -> int:
        return self.e

    @classmethod
    def coerce(cls, x) -> "Dyadic":
        if isinstance(x, Dyadic):
            return x
        if isinstance(x, bool):
            return cls._raw(int(x), 0)
        if isinstance(x, int):
            return cls._raw(x, 0)
        if isinstance(x, Fraction):
            return cls.from_fraction(x)
        if isinstance(x, str):
            return cls.parse(x)
        if isinstance(x, float):
            n, d = x.as_integer_ratio()
            return cls._raw(n, d.bit_length() - 1)
        raise TypeError(f"cannot convert {type(x).__name__} to Dyadic")

    @classmethod
    def from_fraction(cls, q: Fraction) -> "Dyadic":
        d = q.denominator
        if d & (d - 1):
            raise ValueError(f"{q} is not dyadic")
        return cls._raw(q.numerator, d.bit_length() - 1)

    _PAT = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(?:2\s*\^\s*(\d+)|(\d+)))?\s*$")

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        """Parse ``m``, ``m/2^n`` or ``m/d`` with ``d`` a power of two."""
        mt = cls._PAT.match(text)
        if not mt:
            raise ParseError(f"not a dyadic literal: {text!r}")
        m = int(mt.group(1))
        if mt.group(2) is not None:
            return cls._raw(m, int(mt.group(2)))
        if mt.group(3) is not None:
            d = int(mt.group(3))
            if d <= 0 or d & (d - 1):
                raise ParseError(f"denominator of {text!r} is not a power of two")
            return cls._raw(m, d.bit_length() - 1)
        return cls._raw(m, 0)

    def __str__(self) -> str:
        if self.e == 0:
            return str(self.m)
        return f"{self.m}/2^{self.e}"

    def __repr__(self) -> str:
        return f"Dyadic({self.m}, {self.e})"

    def to_fraction(self) -> Fraction:
        return Fraction(self.m, 1 << self.e)

    def __float__(self) -> float:
        return self.m / (1 << self.e) if self.e < 1000 else float(self.to_fraction())

    def __hash__(self) -> int:
        return hash(self.m) if self.e == 0 else hash((self.m, self.e))

    def _cmpkey(self, other: "Dyadic") -> Tuple[int, int]:
        e = max(self.e, other.e)
        return self.m << (e - self.e), other.m << (e - other.e)

    def cmp(self, other) -> int:
        o = Dyadic.coerce(other)
        a, b = self._cmpkey(o)
        return (a > b) - (a < b)

    def __eq__(self, other) -> bool:
        if isinstance(other, Dyadic):
            return self.m == other.m and self.e == other.e
        if isinstance(other, int):
            return self.e == 0 and self.m == other
        return NotImplemented

    def __lt__(self, other) -> bool:
        return self.cmp(other) < 0

    def __le__(self, other) -> bool:
        return self.cmp(other) <= 0

    def __gt__(self, other) -> bool:
        return self.cmp(other) > 0

    def __ge__(self, other) -> bool:
        return self.cmp(other) >= 0

    def __add__(self, other) -> "Dyadic":
        if isinstance(other, int):
            other = Dyadic._raw(other, 0)
        elif not isinstance(other, Dyadic):
            return NotImplemented
        a, b = self._cmpkey(other)
        return Dyadic._raw(a + b, max(self.e, other.e))

    __radd__ = __add__

    def __neg__(self) -> "Dyadic":
        return Dyadic._raw(-self.m, self.e)

    def __sub__(self, other) -> "Dyadic":
        if isinstance(other, int):
            other = Dyadic._raw(other, 0)
        elif not isinstance(other, Dyadic):
            return NotImplemented
        a, b = self._cmpkey(other)
        return Dyadic._raw(a - b, max(self.e, other.e))

    def __rsub__(self, other) -> "Dyadic":
        return Dyadic.coerce(other) - self

    def __mul__(self, other) -> "Dyadic":
        if isinstance(other, int):
            return Dyadic._raw(self.m * other, self.e)
        if not isinstance(other, Dyadic):
            return NotImplemented
        return Dyadic._raw(self.m * other.m, self.e + other.e)

    __rmul__ = __mul__

    def __abs__(self) -> "Dyadic":
        return self if self.m >= 0 else -self

    def __bool__(self) -> bool:
        return self.m != 0

    def shift(self, k: int) -> "Dyadic":
        """Multiply by ``2**k`` (``k`` may be negative)."""
        return Dyadic._raw(self.m, self.e - k)

    def half(self) -> "Dyadic":
        return Dyadic._raw(self.m, self.e + 1)

    def floor_at(self, q: int) -> int:
        """``floor(self * 2**q)``."""
        s = q - self.e
        return self.m << s if s >= 0 else self.m >> (-s)

    def ceil_at(self, q: int) -> int:
        return -((-self).floor_at(q))

    def floor(self) -> int:
        return self.floor_at(0)

    def ceil(self) -> int:
        return self.ceil_at(0)

    def is_integer(self) -> bool:
        return self.e == 0

    def sign(self) -> int:
        return (self.m > 0) - (self.m < 0)


ZERO = Dyadic(0)
ONE = Dyadic(1)
HALF = Dyadic(1, 1)


def dy(x) -> Dyadic:
    """Shorthand constructor: ``dy(3)``, ``dy("3/4")``, ``dy(Fraction(1, 8))``."""
    return Dyadic.coerce(x)


def dy_arith(op: str, a: Dyadic, b: Dyadic = None):
    """Exact dyadic arithmetic; ``cmp`` returns -1, 0 or 1."""
    a = dy(a)
    if op == "neg":
        return -a
    b = dy(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "cmp":
        return a.cmp(b)
    raise ValueError(f"unknown dyadic op {op!r}")


def _div_round(a: Dyadic, b: Dyadic, q: int, up: bool) -> Dyadic:
    """``a / b`` exactly when dyadic, otherwise rounded to the ``2**-q`` grid."""
    num = a.m << b.e
    den = b.m << a.e
    if den < 0:
        num, den = -num, -den
    odd = den
    sh = 0
    while not odd & 1:
        odd >>= 1
        sh += 1
    if num % odd == 0:
        return Dyadic._raw(num // odd, sh)
    scaled = num << q
    if up:
        return Dyadic._raw(-((-scaled) // den), q)
    return Dyadic._raw(scaled // den, q)


class DyInterval:
    """A compact interval ``[lo, hi]`` with dyadic endpoints."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = dy(lo)
        hi = lo if hi is None else dy(hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo},{hi}]")
        self.lo = lo
        self.hi = hi

    @classmethod
    def point(cls, x) -> "DyInterval":
        return cls(x, x)

    _PAT = re.compile(r"^\s*\[\s*([^,\]]+)\s*,\s*([^,\]]+)\s*\]\s*$")

    @classmethod
    def parse(cls, text: str) -> "DyInterval":
        mt = cls._PAT.match(text)
        if not mt:
            raise ParseError(f"not an interval literal: {text!r}")
        lo, hi = Dyadic.parse(mt.group(1)), Dyadic.parse(mt.group(2))
        if lo > hi:
            raise ParseError(f"interval {text!r} has lo > hi")
        return cls(lo, hi)

    def __str__(self) -> str:
        return f"[{self.lo},{self.hi}]"

    def __repr__(self) -> str:
        return f"DyInterval({self.lo!s}, {self.hi!s})"

    def __eq__(self, other) -> bool:
        return isinstance(other, DyInterval) and self.lo == other.lo and self.hi == other.hi

    def __hash__(self) -> int:
        return hash((self.lo, self.hi))

    def width(self) -> Dyadic:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        if isinstance(x, DyInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        if isinstance(x, Fraction):
            return self.lo.to_fraction() <= x <= self.hi.to_fraction()
        x = dy(x)
        return self.lo <= x <= self.hi

    def contains_real(self, x) -> bool:
        """Containment for any value comparable with Fractions (Fraction, mpf)."""
        return self.lo.to_fraction() <= x <= self.hi.to_fraction()

    def is_point(self) -> bool:
        return self.lo == self.hi

    def hull(self, other: "DyInterval") -> "DyInterval":
        return DyInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def __add__(self, other: "DyInterval") -> "DyInterval":
        return ival_arith("add", self, other)

    def __sub__(self, other: "DyInterval") -> "DyInterval":
        return ival_arith("sub", self, other)

    def __mul__(self, other: "DyInterval") -> "DyInterval":
        return ival_arith("mul", self, other)

    def __neg__(self) -> "DyInterval":
        return DyInterval(-self.hi, -self.lo)

    def scale(self, c: Dyadic) -> "DyInterval":
        c = dy(c)
        a, b = self.lo * c, self.hi * c
        return DyInterval(min(a, b), max(a, b))


DEFAULT_DIV_PRECISION = 64


def ival_arith(op: str, I: DyInterval, J: DyInterval, precision: int = DEFAULT_DIV_PRECISION) -> DyInterval:
    """Interval arithmetic with exact endpoints.

    ``div`` is exact whenever the endpoint quotients are dyadic; otherwise each
    endpoint is rounded outward onto the ``2**-precision`` grid.
    """
    if op == "add":
        return DyInterval(I.lo + J.lo, I.hi + J.hi)
    if op == "sub":
        return DyInterval(I.lo - J.hi, I.hi - J.lo)
    if op == "mul":
        ps = (I.lo * J.lo, I.lo * J.hi, I.hi * J.lo, I.hi * J.hi)
        return DyInterval(min(ps), max(ps))
    if op == "div":
        if J.lo <= ZERO <= J.hi:
            raise DivisionByIntervalContainingZero(f"{I} / {J}")
        pairs = [(I.lo, J.lo), (I.lo, J.hi), (I.hi, J.lo), (I.hi, J.hi)]
        lows = [_div_round(a, b, precision, False) for a, b in pairs]
        highs = [_div_round(a, b, precision, True) for a, b in pairs]
        return DyInterval(min(lows), max(highs))
    if op == "min":
        return DyInterval(min(I.lo, J.lo), min(I.hi, J.hi))
    if op == "max":
        return DyInterval(max(I.lo, J.lo), max(I.hi, J.hi))
    raise ValueError(f"unknown interval op {op!r}")


# ---------------------------------------------------------------------------
# Fixed-point interval kernels.  A pair (lo, hi) of ints at scale w encloses
# the real interval [lo / 2**w, hi / 2**w].


def _cdiv(a: int, b: int) -> int:
    return -((-a) // b)


def _fi_mul(x, y, w):
    ps = (x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1])
    return min(ps) >> w, -((-max(ps)) >> w)


def _fi_rat(num: int, den: int, w: int):
    """Enclosure of num/den (den > 0)."""
    s = num << w
    return s // den, _cdiv(s, den)


def _fi_dyadic(x: Dyadic, w: int):
    return x.floor_at(w), x.ceil_at(w)


def _atanh_inv_series(z, w):
    """Enclose atanh over a non-negative interval z with z.hi < 2**w / 2."""
    z2 = _fi_mul(z, z, w)
    p = z
    lo = hi = 0
    k = 0
    while True:
        d = 2 * k + 1
        lo += p[0] // d
        hi += _cdiv(p[1], d)
        if p[1] <= 1:
            break
        p = _fi_mul(p, z2, w)
        k += 1
    # tail is below the last power times 1/(1 - z^2) <= 4/3 of an ulp
    return lo, hi + 2


@lru_cache(maxsize=64)
def _ln2(w: int):
    lo, hi = _atanh_inv_series(_fi_rat(1, 3, w + 4), w + 4)
    return (2 * lo) >> 4, _cdiv(2 * hi, 16)


def _atan_inv(k: int, w: int):
    """Enclose atan(1/k) for integer k >= 2."""
    lo = hi = 0
    j = 0
    one = 1 << w
    while True:
        d = (2 * j + 1) * k ** (2 * j + 1)
        tlo, thi = one // d, _cdiv(one, d)
        if j % 2 == 0:
            lo += tlo
            hi += thi
        else:
            lo -= thi
            hi -= tlo
        if thi <= 1:
            break
        j += 1
    return lo - 1, hi + 1


@lru_cache(maxsize=64)
def _pi(w: int):
    W = w + 8
    a = _atan_inv(5, W)
    b = _atan_inv(239, W)
    lo = 16 * a[0] - 4 * b[1]
    hi = 16 * a[1] - 4 * b[0]
    return lo >> 8, -((-hi) >> 8)


def _exp_enclose(x: Dyadic, w: int):
    neg = x.m < 0
    ax = abs(x)
    s = 0
    while ax > HALF:
        ax = ax.half()
        s += 1
    W = w + s + 8
    y = _fi_dyadic(ax, W)
    one = 1 << W
    term = (one, one)
    lo = hi = 0
    k = 0
    while True:
        lo += term[0]
        hi += term[1]
        if term[1] <= 1:
            break
        k += 1
        t = _fi_mul(term, y, W)
        term = (t[0] // k, _cdiv(t[1], k))
    hi += 2
    for _ in range(s):
        lo = (lo * lo) >> W
        hi = -((-(hi * hi)) >> W)
    lo >>= W - w
    hi = -((-hi) >> (W - w))
    if neg:
        top = 1 << (2 * w)
        return top // hi, _cdiv(top, max(lo, 1))
    return lo, hi


def _ln_enclose(x: Dyadic, w: int):
    b = x.m.bit_length() - 1
    k = b - x.e
    W = w + 8 + abs(k).bit_length()
    z = _fi_rat(x.m - (1 << b), x.m + (1 << b), W)
    at = _atanh_inv_series(z, W)
    lny = (2 * at[0], 2 * at[1])
    l2 = _ln2(W)
    if k >= 0:
        lo, hi = lny[0] + k * l2[0], lny[1] + k * l2[1]
    else:
        lo, hi = lny[0] + k * l2[1], lny[1] + k * l2[0]
    return lo >> (W - w), -((-hi) >> (W - w))


def _cos_series(t, w):
    t2 = _fi_mul(t, t, w)
    term = (1 << w, 1 << w)
    lo = hi = 0
    j = 0
    while True:
        if j % 2 == 0:
            lo += term[0]
            hi += term[1]
        else:
            lo -= term[1]
            hi += -term[0]
        if term[1] <= 1:
            break
        j += 1
        m = _fi_mul(term, t2, w)
        d = (2 * j - 1) * (2 * j)
        term = (m[0] // d, _cdiv(m[1], d))
    return lo - 1, hi + 1


def _sin_series(t, w):
    t2 = _fi_mul(t, t, w)
    term = t
    lo = hi = 0
    j = 0
    while True:
        if j % 2 == 0:
            lo += term[0]
            hi += term[1]
        else:
            lo -= term[1]
            hi -= term[0]
        if term[1] <= 1:
            break
        j += 1
        m = _fi_mul(term, t2, w)
        d = (2 * j) * (2 * j + 1)
        term = (m[0] // d, _cdiv(m[1], d))
    return lo - 1, hi + 1


_QUARTER = Dyadic(1, 2)
_EIGHTH = Dyadic(1, 3)


def _frac_part(x: Dyadic) -> Dyadic:
    return x - Dyadic(x.floor())


def _cos2pi_exact(x: Dyadic):
    u = _frac_part(x)
    if u == ZERO:
        return ONE
    if u == _QUARTER or u == Dyadic(3, 2):
        return ZERO
    if u == HALF:
        return -ONE
    return None


def _cos2pi_enclose(x: Dyadic, w: int):
    u = _frac_part(x)
    if u > HALF:
        u = ONE - u
    sign = 1
    if u > _QUARTER:
        u = HALF - u
        sign = -1
    W = w + 8
    pi = _pi(W)
    two_pi = (2 * pi[0], 2 * pi[1])
    if u <= _EIGHTH:
        t = _fi_mul(two_pi, _fi_dyadic(u, W), W)
        lo, hi = _cos_series(t, W)
    else:
        t = _fi_mul(two_pi, _fi_dyadic(_QUARTER - u, W), W)
        lo, hi = _sin_series(t, W)
    if sign < 0:
        lo, hi = -hi, -lo
    return lo >> (W - w), -((-hi) >> (W - w))


def _ziv(enclose: Callable[[int], Tuple[int, int]], q: int) -> Tuple[Dyadic, Dyadic]:
    """Bracket a value known not to lie on the ``2**-q`` grid between neighbours."""
    w = max(q, 0) + 24
    while True:
        lo, hi = enclose(w)
        a = lo >> (w - q) if w >= q else lo << (q - w)
        b = -((-hi) >> (w - q)) if w >= q else hi << (q - w)
        if b - a == 1:
            return Dyadic(a, q) if q >= 0 else Dyadic(a << -q), Dyadic(b, q) if q >= 0 else Dyadic(b << -q)
        if b - a < 1:
            raise ArithmeticError("enclosure collapsed onto a grid point")
        w = 2 * w + 16


def iroot(n: int, k: int) -> int:
    """``floor(n ** (1/k))`` for integers ``n >= 0``, ``k >= 1``."""
    if n < 0:
        raise ValueError("negative radicand")
    if k == 1 or n < 2:
        return n
    if k == 2:
        return math.isqrt(n)
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def _round_exact(v: Dyadic, q: int) -> Tuple[Dyadic, Dyadic]:
    return Dyadic(v.floor_at(q), q), Dyadic(v.ceil_at(q), q)


def _pow_point(x: Dyadic, a: Dyadic, q: int) -> Tuple[Dyadic, Dyadic]:
    """Outward grid rounding of ``x ** a`` using integer roots only."""
    if x.m < 0:
        raise DomainViolation(f"pow of negative base {x}")
    if x.m == 0:
        if a.m > 0:
            return ZERO, ZERO
        if a.m == 0:
            return ONE, ONE
        raise DomainViolation("pow(0, a) with a < 0")
    k, n = abs(a.m), 1 << a.e
    M, E = x.m ** k, x.e * k
    # x**a = (R / 2**(q*n))**(1/n) with R = M * 2**(q*n - E) (or its inverse)
    if a.m >= 0:
        num, den = M << (q * n), 1 << E
    else:
        num, den = 1 << (E + q * n), M
    R = num // den
    r = iroot(R, n)
    exact = num % den == 0 and r ** n == R
    return Dyadic(r, q), Dyadic(r if exact else r + 1, q)


def _point_bracket(fn: str, x: Dyadic, q: int, a: Dyadic = None) -> Tuple[Dyadic, Dyadic]:
    if fn == "sqrt":
        if x.m < 0:
            raise DomainViolation(f"sqrt of negative {x}")
        return _pow_point(x, HALF, q)
    if fn == "pow":
        return _pow_point(x, a, q)
    if fn == "exp":
        if x.m == 0:
            return ONE, ONE
        return _ziv(lambda w: _exp_enclose(x, w), q)
    if fn == "ln":
        if x.m <= 0:
            raise DomainViolation(f"ln of non-positive {x}")
        if x == ONE:
            return ZERO, ZERO
        return _ziv(lambda w: _ln_enclose(x, w), q)
    if fn == "cos2pi":
        ex = _cos2pi_exact(x)
        if ex is not None:
            return ex, ex
        return _ziv(lambda w: _cos2pi_enclose(x, w), q)
    raise ValueError(f"unknown elementary function {fn!r}")


def ival_elem(fn: str, I: DyInterval, precision: int, a=None) -> DyInterval:
    """Outward enclosure of ``fn`` over ``I``.

    ``fn`` is one of ``sqrt``, ``ln``, ``exp``, ``cos2pi`` or ``pow`` (with
    exponent ``a``).  Endpoints are rounded outward onto the ``2**-(p+1)``
    grid, so the excess width is at most ``2**-p`` and results for larger
    ``p`` are contained in results for smaller ``p``.
    """
    if precision < 0:
        raise ValueError("precision must be non-negative")
    q = precision + 1
    if fn == "ln" and I.lo.m <= 0:
        raise DomainViolation(f"ln of interval touching or below 0: {I}")
    if fn == "sqrt" and I.lo.m < 0:
        raise DomainViolation(f"sqrt of interval below 0: {I}")
    if fn == "pow":
        if a is None:
            raise ValueError("pow needs an exponent")
        a = dy(a)
        if I.lo.m < 0 or (a.m < 0 and I.lo.m == 0):
            raise DomainViolation(f"pow({I}, {a}) outside domain")
        if a.m >= 0:
            return DyInterval(_pow_point(I.lo, a, q)[0], _pow_point(I.hi, a, q)[1])
        return DyInterval(_pow_point(I.hi, a, q)[0], _pow_point(I.lo, a, q)[1])
    if fn in ("sqrt", "ln", "exp"):
        return DyInterval(_point_bracket(fn, I.lo, q)[0], _point_bracket(fn, I.hi, q)[1])
    if fn == "cos2pi":
        if I.hi - I.lo >= ONE:
            return DyInterval(-ONE, ONE)
        lo_b = _point_bracket(fn, I.lo, q)
        hi_b = _point_bracket(fn, I.hi, q)
        lo = min(lo_b[0], hi_b[0])
        hi = max(lo_b[1], hi_b[1])
        # interior extrema: maxima at integers, minima at half-integers
        if I.lo.ceil() <= I.hi.floor():
            hi = ONE
        if (I.lo - HALF).ceil() <= (I.hi - HALF).floor():
            lo = -ONE
        return DyInterval(lo, hi)
    raise ValueError(f"unknown elementary function {fn!r}")


def dyadic_sum(xs: Iterable[Dyadic]) -> Dyadic:
    total = ZERO
    for x in xs:
        total = total + x
    return total
