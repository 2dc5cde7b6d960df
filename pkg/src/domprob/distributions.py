"""Random variables for standard distributions.

Everything is a step random variable whose cells carry interval enclosures.
Singular points (``ln 0``, division by an interval containing 0, a negative
power at 0) give bottom cells instead of errors.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .domain import BOT, IntervalReal, IntervalUnit
from .dyadic import HALF, ONE, ZERO, Dyadic, DyInterval, _pi, dy, ival_arith, ival_elem
from .errors import BadAlpha, BadProbability, DepthOverflow, NotPSD, ParseError
from .pairing import PairingDescriptor, hilbert_cell
from .randvar import MAX_DEPTH, StepRV, rv_const, rv_precompose
from .sample_space import SpaceKind

__all__ = [
    "CdfSpec",
    "PiecewiseLinearCdf",
    "BuiltinCdf",
    "parse_cdf",
    "quantile_envelope",
    "rv_quantile",
    "identity_rv",
    "box_muller",
    "iid_copies",
    "chi_squared",
    "student_t",
    "cholesky_psd",
    "mvn",
    "dirichlet",
    "beta_enclosure",
    "ival_sq",
]

REAL = IntervalReal()
UNIT = IntervalUnit()


def _floor_grid(x: Fraction, q: int) -> Dyadic:
    return Dyadic(math.floor(x * (1 << q)), q)


def _ceil_grid(x: Fraction, q: int) -> Dyadic:
    return Dyadic(math.ceil(x * (1 << q)), q)


# ---------------------------------------------------------------------------
# cumulative distribution functions


class CdfSpec:
    """A non-decreasing right-continuous ``F`` with limits 0 and 1."""

    def enclose(self, x: Dyadic, precision: int) -> DyInterval:
        raise NotImplementedError

    def exact_bounds(self, p: Fraction) -> Optional[Tuple[Fraction, Fraction]]:
        """``(inf{F >= p}, inf{F > p})`` when available in closed form."""
        return None

    def support(self) -> Tuple[Optional[Fraction], Optional[Fraction]]:
        """``(inf{F > 0}, sup{F < 1})``; None stands for an infinite end."""
        raise NotImplementedError


@dataclass(frozen=True)
class PiecewiseLinearCdf(CdfSpec):
    """Linear between breakpoints, 0 before the first and 1 after the last.

    Repeated ``x`` values describe a jump; the last value at ``x`` is ``F(x)``.
    """

    breaks: Tuple[Tuple[Dyadic, Dyadic], ...]

    def __post_init__(self):
        bs = tuple((dy(x), dy(f)) for x, f in self.breaks)
        if not bs:
            raise ParseError("a piecewise-linear CDF needs at least one breakpoint")
        for (x0, f0), (x1, f1) in zip(bs, bs[1:]):
            if x1 < x0 or f1 < f0:
                raise ParseError("breakpoints must be non-decreasing in x and F")
        if bs[0][1] < ZERO or bs[-1][1] != ONE:
            raise ParseError("F must start at or above 0 and end at 1")
        object.__setattr__(self, "breaks", bs)

    def _groups(self) -> List[Tuple[Fraction, Fraction, Fraction]]:
        """``(x, left value, right value)`` per distinct breakpoint."""
        out: List[List[Fraction]] = []
        for x, f in self.breaks:
            xf, ff = x.to_fraction(), f.to_fraction()
            if out and out[-1][0] == xf:
                out[-1][2] = ff
            else:
                out.append([xf, ff, ff])
        return [tuple(g) for g in out]

    def value(self, x: Fraction) -> Fraction:
        gs = self._groups()
        if x < gs[0][0]:
            return Fraction(0)
        for g, (xg, _, rg) in enumerate(gs):
            if g + 1 == len(gs) or x < gs[g + 1][0]:
                if g + 1 == len(gs) or x == xg:
                    return rg
                xn, ln, _ = gs[g + 1]
                return rg + (x - xg) * (ln - rg) / (xn - xg)
        raise AssertionError("unreachable")

    def enclose(self, x: Dyadic, precision: int) -> DyInterval:
        v = self.value(x.to_fraction())
        return DyInterval(_floor_grid(v, precision), _ceil_grid(v, precision))

    def _first(self, p: Fraction, strict: bool) -> Fraction:
        """``inf{x : F(x) >= p}`` (or ``> p`` when strict)."""

        def hit(v):
            return v > p if strict else v >= p

        gs = self._groups()
        if hit(Fraction(0)):
            return gs[0][0]
        for g, (xg, lg, rg) in enumerate(gs):
            if g > 0 and hit(lg):
                xp, _, rp = gs[g - 1]
                if lg == rp:
                    return xg
                return xp + (p - rp) * (xg - xp) / (lg - rp)
            if hit(rg):
                return xg
        raise AssertionError("F never reaches the level")

    def exact_bounds(self, p: Fraction):
        return self._first(p, False), self._first(p, True)

    def support(self):
        return self._first(Fraction(0), True), self._first(Fraction(1), False)

    def __str__(self) -> str:
        return ", ".join(f"{x}:{f}" for x, f in self.breaks)


# enclosure of 1/sqrt(2 pi) at a fixed working scale
def _inv_sqrt_2pi(w: int) -> DyInterval:
    lo, hi = _pi(w + 4)
    two_pi = DyInterval(Dyadic(2 * lo, w + 4), Dyadic(2 * hi, w + 4))
    return ival_elem("pow", two_pi, w, a=Dyadic(-1, 1))


_NORMAL_TAIL = Dyadic(1, 100)  # bound on 1 - Phi(x) for x >= 12


def _phi_enclose(x: Dyadic, w: int) -> DyInterval:
    """Enclosure of the standard normal CDF at ``x`` via its alternating series."""
    if x >= Dyadic(12):
        return DyInterval(ONE - _NORMAL_TAIL, ONE)
    if x <= Dyadic(-12):
        return DyInterval(ZERO, _NORMAL_TAIL)
    xf = x.to_fraction()
    x2 = xf * xf
    term = xf  # x^(2n+1) / (2^n n!)
    s = Fraction(0)
    n = 0
    eps = Fraction(1, 1 << (w + 4))
    while True:
        t = term / (2 * n + 1)
        s += t if n % 2 == 0 else -t
        term = term * x2 / (2 * (n + 1))
        nxt = abs(term) / (2 * n + 3)
        # alternating with decreasing magnitudes once n exceeds x^2
        if n > x2 and nxt < eps:
            break
        n += 1
    S = DyInterval(_floor_grid(s - nxt, w + 4), _ceil_grid(s + nxt, w + 4))
    v = DyInterval(HALF) + S * _inv_sqrt_2pi(w + 4)
    lo = max(ZERO, Dyadic(v.lo.floor_at(w), w))
    hi = min(ONE, Dyadic(v.hi.ceil_at(w), w))
    return DyInterval(lo, hi)


@dataclass(frozen=True)
class BuiltinCdf(CdfSpec):
    name: str  # "uniform", "exponential" or "stdnormal"
    rate: Dyadic = ONE

    def __post_init__(self):
        if self.name not in ("uniform", "exponential", "stdnormal"):
            raise ParseError(f"unknown distribution {self.name!r}")
        object.__setattr__(self, "rate", dy(self.rate))
        if self.rate <= ZERO:
            raise ParseError("rate must be positive")

    def enclose(self, x: Dyadic, precision: int) -> DyInterval:
        if self.name == "uniform":
            v = min(max(x, ZERO), ONE)
            return DyInterval(v, v)
        if self.name == "exponential":
            if x <= ZERO:
                return DyInterval(ZERO, ZERO)
            e = ival_elem("exp", DyInterval(-(self.rate * x)), precision)
            return DyInterval(max(ZERO, ONE - e.hi), min(ONE, ONE - e.lo))
        return _phi_enclose(x, precision)

    def exact_bounds(self, p: Fraction):
        if self.name == "uniform":
            return p, p
        return None

    def support(self):
        if self.name == "uniform":
            return Fraction(0), Fraction(1)
        if self.name == "exponential":
            return Fraction(0), None
        return None, None

    def __str__(self) -> str:
        if self.name == "exponential":
            return f"exponential({self.rate})"
        return self.name


_BUILTIN = re.compile(r"^\s*(uniform|stdnormal|exponential)\s*(?:\(\s*([^)]*)\s*\))?\s*$")


def parse_cdf(text: str) -> CdfSpec:
    """``uniform``, ``exponential(RATE)``, ``stdnormal`` or ``x:F, x:F, ...``."""
    mt = _BUILTIN.match(text)
    if mt:
        name, arg = mt.group(1), mt.group(2)
        if name == "exponential":
            return BuiltinCdf(name, Dyadic.parse(arg) if arg else ONE)
        if arg:
            raise ParseError(f"{name} takes no parameter")
        return BuiltinCdf(name)
    breaks = []
    for item in re.split(r"[,\s]+", text.strip()):
        if not item:
            continue
        if item.count(":") != 1:
            raise ParseError(f"bad breakpoint {item!r}; expected x:F")
        x, f = item.split(":")
        breaks.append((Dyadic.parse(x), Dyadic.parse(f)))
    return PiecewiseLinearCdf(tuple(breaks))


# ---------------------------------------------------------------------------
# quantiles


def _surely(F: CdfSpec, x: Dyadic, p: Dyadic, precision: int, cmp: str) -> bool:
    """Decide ``F(x) < p`` (cmp "lt") or ``F(x) > p`` (cmp "gt") with certainty."""
    for w in (precision + 8, precision + 32, precision + 64):
        v = F.enclose(x, w)
        if cmp == "lt":
            if v.hi < p:
                return True
            if v.lo >= p:
                return False
        else:
            if v.lo > p:
                return True
            if v.hi <= p:
                return False
    return False


def _bracket(F: CdfSpec, p: Dyadic, precision: int) -> Tuple[Dyadic, Dyadic]:
    lo = Dyadic(-1)
    while not _surely(F, lo, p, precision, "lt"):
        lo = lo + lo
    hi = ONE
    while not _surely(F, hi, p, precision, "gt"):
        hi = hi + hi
    return lo, hi


def quantile_envelope(F: CdfSpec, p, precision: int) -> DyInterval:
    """Enclosure of ``[sup{F < p}, sup{F <= p}]``, each end within ``2**-precision``."""
    p = dy(p)
    if not (ZERO < p < ONE):
        raise BadProbability(f"{p} is not in (0, 1)")
    ex = F.exact_bounds(p.to_fraction())
    if ex is not None:
        return DyInterval(_floor_grid(ex[0], precision), _ceil_grid(ex[1], precision))
    step = Dyadic(1, precision)
    L0, U0 = _bracket(F, p, precision)
    # lower end: keep F(lo) < p certain
    lo, hi = L0, U0
    while hi - lo > step:
        m = (lo + hi).half()
        if _surely(F, m, p, precision, "lt"):
            lo = m
        else:
            hi = m
    x1 = lo
    # upper end: keep F(hi) > p certain
    lo, hi = L0, U0
    while hi - lo > step:
        m = (lo + hi).half()
        if _surely(F, m, p, precision, "gt"):
            hi = m
        else:
            lo = m
    return DyInterval(x1, hi)


def rv_quantile(F: CdfSpec, depth: int, precision: int) -> StepRV:
    """``G*`` on the open unit interval: cell ``i`` gets the hull of the
    quantile envelopes over ``[i/2^n, (i+1)/2^n]``; infinite ends give bottom."""
    if depth > MAX_DEPTH:
        raise DepthOverflow(f"depth {depth} > {MAX_DEPTH}")
    n = 1 << depth
    s_lo, s_hi = F.support()
    envs = [quantile_envelope(F, Dyadic(i, depth), precision) for i in range(1, n)]
    cells = []
    for i in range(n):
        lo = envs[i - 1].lo if i > 0 else (None if s_lo is None else _floor_grid(s_lo, precision))
        hi = envs[i].hi if i < n - 1 else (None if s_hi is None else _ceil_grid(s_hi, precision))
        cells.append(BOT if lo is None or hi is None else DyInterval(lo, hi))
    return StepRV(SpaceKind.UNIT_OPEN, depth, cells, REAL)


# ---------------------------------------------------------------------------
# pointwise interval helpers


def ival_sq(I: DyInterval) -> DyInterval:
    if I.lo >= ZERO:
        return DyInterval(I.lo * I.lo, I.hi * I.hi)
    if I.hi <= ZERO:
        return DyInterval(I.hi * I.hi, I.lo * I.lo)
    m = max(-I.lo, I.hi)
    return DyInterval(ZERO, m * m)


def _pointwise(rs: Sequence[StepRV], fn: Callable, codomain) -> StepRV:
    space = rs[0].space
    for r in rs:
        if r.space is not space:
            raise ValueError("variables live on different spaces")
    N = max(r.depth for r in rs)
    cols = [r.cells_at(N) for r in rs]
    cache: Dict[tuple, object] = {}
    cells = []
    for vals in zip(*cols):
        v = cache.get(vals)
        if v is None:
            v = fn(*vals)
            cache[vals] = v
        cells.append(v)
    return StepRV(space, N, cells, codomain)


def _pairing(space: SpaceKind) -> str:
    return "interleave" if space.is_cantor else "hilbert"


def identity_rv(space: SpaceKind, depth: int) -> StepRV:
    """The uniform variable: cell ``i`` maps to ``[i/2^k, (i+1)/2^k]``."""
    cells = [UNIT.canon(DyInterval(Dyadic(i, depth), Dyadic(i + 1, depth))) for i in range(1 << depth)]
    return StepRV(space, depth, cells, UNIT)


def _projection_indices(space: SpaceKind, k: int) -> List[Tuple[int, int]]:
    """For each depth-``2k`` cell, the depth-``k`` cells of its two projections."""
    out = []
    for i in range(1 << (2 * k)):
        w = format(i, f"0{2 * k}b") if k else ""
        if space.is_cantor:
            a, b = w[0::2], w[1::2]
            out.append((int(a, 2) if a else 0, int(b, 2) if b else 0))
        else:
            quat = "".join(str(2 * int(w[j]) + int(w[j + 1])) for j in range(0, 2 * k, 2))
            x, y = hilbert_cell(quat)
            out.append((x.lo.floor_at(k), y.lo.floor_at(k)))
    return out


def box_muller(depth: int, precision: int, space: SpaceKind = SpaceKind.CANTOR) -> Tuple[StepRV, StepRV]:
    """Two standard normals from the projections ``u1 = id o h1``, ``u2 = id o h2``.

    Each uniform is resolved to ``depth`` bits, so the normals have depth
    ``2 * depth``.  Cells whose uniform range touches 0 are bottom.
    """
    k = depth
    if 2 * k > MAX_DEPTH:
        raise DepthOverflow(f"depth {2 * k} > {MAX_DEPTH}")
    n = 1 << k
    radius: List[object] = []
    angle: List[DyInterval] = []
    for i in range(n):
        u = DyInterval(Dyadic(i, k), Dyadic(i + 1, k))
        if i == 0:
            radius.append(BOT)
        else:
            t = ival_elem("ln", u, precision).scale(Dyadic(-2))
            radius.append(ival_elem("sqrt", t, precision))
        angle.append(ival_elem("cos2pi", u, precision))

    def z(r, c):
        return BOT if r is BOT else r * c

    idx = _projection_indices(space, k)
    z1 = [z(radius[a], angle[b]) for a, b in idx]
    z2 = [z(radius[b], angle[a]) for a, b in idx]
    return StepRV(space, 2 * k, z1, REAL), StepRV(space, 2 * k, z2, REAL)


def iid_copies(r: StepRV, n: int) -> List[StepRV]:
    """``n`` independent copies ``r o h_b1 o ... o h_bm`` over distinct words ``b``.

    ``m = max(1, ceil(log2 n))``; digit 0 of the index selects ``h1`` and
    digit 1 selects ``h2``, most significant digit applied first.
    """
    if n < 1:
        raise ValueError("need at least one copy")
    m = max(1, (n - 1).bit_length())
    if r.depth << m > MAX_DEPTH:
        raise DepthOverflow(f"{n} copies of a depth-{r.depth} variable need depth {r.depth << m}")
    kind = _pairing(r.space)
    h = {"0": PairingDescriptor(kind, "h1"), "1": PairingDescriptor(kind, "h2")}
    out = []
    for j in range(n):
        c = r
        for digit in format(j, f"0{m}b"):
            c = rv_precompose(c, h[digit])
        out.append(c)
    return out


def _normals(count: int, depth: int, precision: int, space: SpaceKind) -> List[StepRV]:
    z1, _ = box_muller(depth, precision, space)
    return iid_copies(z1, count)


def _sum_squares(vals) -> object:
    if any(v is BOT for v in vals):
        return BOT
    acc = DyInterval(ZERO)
    for v in vals:
        acc = acc + ival_sq(v)
    return acc


def chi_squared(n: int, depth: int, precision: int, space: SpaceKind = SpaceKind.CANTOR) -> StepRV:
    """``sum_i r_i**2`` over ``n`` independent standard normals."""
    if n < 1:
        raise ValueError("need n >= 1")
    return _pointwise(_normals(n, depth, precision, space), lambda *v: _sum_squares(v), REAL)


def student_t(n: int, depth: int, precision: int, space: SpaceKind = SpaceKind.CANTOR) -> StepRV:
    """``r_(n+1) / sqrt(sum_i r_i**2 / n)``."""
    if n < 1:
        raise ValueError("need n >= 1")
    rs = _normals(n + 1, depth, precision, space)
    N = DyInterval(Dyadic(n))

    def f(*vals):
        s = _sum_squares(vals[:-1])
        top = vals[-1]
        if s is BOT or top is BOT:
            return BOT
        root = ival_elem("sqrt", ival_arith("div", s, N, precision), precision)
        if root.lo <= ZERO:
            return BOT
        return ival_arith("div", top, root, precision)

    return _pointwise(rs, f, REAL)


# ---------------------------------------------------------------------------
# multivariate normal


def cholesky_psd(S: Sequence[Sequence], precision: int = 64) -> List[List[DyInterval]]:
    """Lower-triangular interval ``L`` with ``S`` inside ``L L^T`` entrywise.

    Pivots are interval enclosures.  A pivot that is exactly 0 skips its
    column (residuals below it must contain 0); a pivot enclosure straddling
    0 gets ``[0, sqrt(hi)]`` and the column below it the bound
    ``|L_ij| <= sqrt(residual_ii)``.  A strictly negative pivot is an error.
    """
    k = len(S)
    A = [[dy(x) for x in row] for row in S]
    for row in A:
        if len(row) != k:
            raise ValueError("matrix is not square")
    for i in range(k):
        for j in range(i):
            if A[i][j] != A[j][i]:
                raise ValueError("matrix is not symmetric")
    zero = DyInterval(ZERO)
    L = [[zero] * k for _ in range(k)]

    def residual(i, j):
        acc = DyInterval(A[i][j])
        for p in range(j):
            acc = acc - L[i][p] * L[j][p]
        return acc

    for j in range(k):
        d = residual(j, j)
        if d.hi < ZERO:
            raise NotPSD(f"pivot {j} encloses {d}, which is negative")
        if d.lo > ZERO:
            L[j][j] = ival_elem("sqrt", d, precision)
            for i in range(j + 1, k):
                L[i][j] = ival_arith("div", residual(i, j), L[j][j], precision)
        elif d.lo == ZERO and d.hi == ZERO:
            for i in range(j + 1, k):
                if not residual(i, j).contains(ZERO):
                    raise NotPSD(f"zero pivot {j} with non-zero entry below it")
        else:
            L[j][j] = ival_elem("sqrt", DyInterval(ZERO, d.hi), precision)
            for i in range(j + 1, k):
                b = ival_elem("sqrt", DyInterval(ZERO, max(ZERO, residual(i, i).hi)), precision).hi
                L[i][j] = DyInterval(-b, b)
    return L


def mvn(m: Sequence, S: Sequence[Sequence], depth: int, precision: int, space: SpaceKind = SpaceKind.CANTOR) -> List[StepRV]:
    """Components of ``L r + m`` with ``r`` a vector of independent normals."""
    k = len(m)
    if len(S) != k:
        raise ValueError("mean and covariance sizes differ")
    mean = [dy(x) for x in m]
    L = cholesky_psd(S, precision)
    zero = DyInterval(ZERO)
    used = [j for j in range(k) if any(L[i][j] != zero for i in range(k))]
    if not used:
        return [rv_const(space, DyInterval(x), REAL) for x in mean]
    rs = _normals(k, depth, precision, space)
    out = []
    for i in range(k):
        cols = [j for j in range(k) if L[i][j] != zero]
        if not cols:
            out.append(rv_const(space, DyInterval(mean[i]), REAL))
            continue

        def f(*vals, i=i, cols=cols):
            acc = DyInterval(mean[i])
            for j, v in zip(cols, vals):
                if v is BOT:
                    return BOT
                acc = acc + L[i][j] * v
            return acc

        out.append(_pointwise([rs[j] for j in cols], f, REAL))
    return out


# ---------------------------------------------------------------------------
# Dirichlet


def _gamma_parts(a: Fraction) -> Tuple[Fraction, int]:
    """``Gamma(a) = q * sqrt(pi)**h`` for positive integer or half-integer ``a``."""
    if a.denominator == 1:
        return Fraction(math.factorial(a.numerator - 1)), 0
    n = (a - Fraction(1, 2)).numerator
    return Fraction(math.factorial(2 * n), 4 ** n * math.factorial(n)), 1


def beta_enclosure(alpha: Sequence, precision: int = 64) -> DyInterval:
    """``prod Gamma(a_i) / Gamma(sum a_i)`` for integer or half-integer ``a_i``."""
    al = [dy(a).to_fraction() for a in alpha]
    if not al:
        raise BadAlpha("empty parameter vector")
    for a in al:
        if a <= 0 or (2 * a).denominator != 1:
            raise BadAlpha(f"{a} is not a positive integer or half-integer")
    q, h = Fraction(1), 0
    for a in al:
        g, e = _gamma_parts(a)
        q *= g
        h += e
    g, e = _gamma_parts(sum(al))
    q /= g
    h -= e
    e = h // 2  # sqrt(pi) powers pair up into a whole power of pi
    if e == 0:
        return DyInterval(_floor_grid(q, precision), _ceil_grid(q, precision))
    w = precision + 16 + 4 * e
    lo, hi = _pi(w)
    return DyInterval(
        _floor_grid(q * Fraction(lo, 1 << w) ** e, precision),
        _ceil_grid(q * Fraction(hi, 1 << w) ** e, precision),
    )


def dirichlet(alpha: Sequence, rs: Sequence[StepRV], B: DyInterval, precision: int) -> StepRV:
    """Density ``prod_i r_i**(a_i - 1) / B`` with the interval power rule.

    Inputs are evaluated as given; keeping them on the simplex is up to the
    caller.
    """
    al = [dy(a) for a in alpha]
    if len(al) != len(rs) or not al:
        raise BadAlpha("need one parameter per input variable")
    if any(a <= ZERO for a in al):
        raise BadAlpha("parameters must be positive")
    if B.lo <= ZERO:
        raise BadAlpha(f"B enclosure {B} is not positive")
    for r in rs:
        if not isinstance(r.codomain, IntervalUnit):
            raise ValueError("Dirichlet inputs take values in I[0,1]")
    one = DyInterval(ONE)

    def f(*vals):
        acc = one
        for a, v in zip(al, vals):
            x = UNIT.as_interval(v)
            e = a - ONE
            if e == ZERO:
                continue
            if e < ZERO and x.lo == ZERO:
                return BOT
            acc = acc * ival_elem("pow", x, precision, a=e)
        return ival_arith("div", acc, B, precision)

    return _pointwise(list(rs), f, REAL)
