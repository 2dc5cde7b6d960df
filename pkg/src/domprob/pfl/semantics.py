"""Small-step call-by-value semantics with random bits and precision.

Evaluation of ``e`` with bits ``s`` at precision ``n`` starts from
``<e | s, n>``.  Extended terms push their parameters inwards: an
application splits ``s`` into its even and odd positions, a lambda carries
them into its body, ``sample`` reads them, and every other constant drops
them.  ``ite c a b`` splits like the curried application ``((ite c) a) b``.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

from ..domain import BOT
from ..dyadic import ZERO, Dyadic, DyInterval, ival_arith
from ..errors import FuelExhausted, PreconditionFailed, Stuck
from .syntax import BINARY, REAL, UNARY, App, Arrow, Const, Ext, Ite, Lam, Nat, Real, Term, Type, Var, show
from .typecheck import ends_in_real

__all__ = [
    "is_value",
    "candidates",
    "step",
    "evaluate",
    "run",
    "Outcome",
    "int_quadrature",
    "precision_sweep",
    "SweepReport",
    "lcg_bits",
    "sample_interval",
    "bottom_of",
    "DIV_PRECISION",
]

DIV_PRECISION = 64
TRUE = Const("tt")
FALSE = Const("ff")

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


def is_value(t: Term) -> bool:
    if isinstance(t, Const):
        return t.name != "sample"
    if isinstance(t, (Nat, Real, Lam)):
        return True
    if isinstance(t, App):
        return isinstance(t.fn, Const) and t.fn.name in BINARY and is_value(t.arg)
    return False


def subst(t: Term, x: str, v: Term) -> Term:
    """``t[v/x]`` for a closed value ``v``."""
    if isinstance(t, Var):
        return v if t.name == x else t
    if isinstance(t, Lam):
        return t if t.var == x else Lam(t.var, t.ty, subst(t.body, x, v))
    if isinstance(t, App):
        return App(subst(t.fn, x, v), subst(t.arg, x, v))
    if isinstance(t, Ite):
        return Ite(subst(t.cond, x, v), subst(t.then, x, v), subst(t.other, x, v))
    if isinstance(t, Ext):
        return Ext(subst(t.term, x, v), t.bits, t.n)
    return t


def bottom_of(ty: Type) -> Term:
    if isinstance(ty, Arrow):
        return Lam("_", ty.arg, bottom_of(ty.res))
    if ty == REAL:
        return Real(BOT)
    raise Stuck("no bottom value at a type not ending in real")


def sample_interval(bits: str, n: int) -> DyInterval:
    o = min(len(bits), n)
    s = ZERO
    for i in range(o):
        if bits[i] == "1":
            s = s + Dyadic(1, i + 1)
    return DyInterval(s, s + Dyadic(1, n))


# ---------------------------------------------------------------------------
# rules


def _real_op(name: str, a, b) -> Real:
    if a is BOT or b is BOT:
        return Real(BOT)
    if name == "div":
        if b.lo <= ZERO <= b.hi:
            return Real(BOT)
        return Real(ival_arith("div", a, b, DIV_PRECISION))
    return Real(ival_arith(name, a, b))


def _delta(op: str, args: Sequence[Term]) -> Optional[Term]:
    if op == "pos":
        v = args[0].value
        if v is BOT:
            return None
        if v.lo > ZERO:
            return TRUE
        if v.hi < ZERO:
            return FALSE
        return None
    if op == "npos":
        return TRUE if args[0].value > 0 else FALSE
    if op == "succ":
        return Nat(args[0].value + 1)
    if op == "pred":
        return Nat(max(0, args[0].value - 1))
    if op == "toreal":
        return Real(DyInterval(Dyadic(args[0].value)))
    if op == "nplus":
        return Nat(args[0].value + args[1].value)
    return _real_op(op, args[0].value, args[1].value)


def _quadrature_term(f: Term, n: int) -> Term:
    w = Real(DyInterval(Dyadic(1, n)))
    parts = [
        App(App(Const("mul"), w), App(f, Real(DyInterval(Dyadic(i, n), Dyadic(i + 1, n))))) for i in range(1 << n)
    ]
    while len(parts) > 1:
        nxt = [App(App(Const("add"), parts[i]), parts[i + 1]) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


Rule = Tuple[str, Callable[[], Term]]


def _ext_candidates(t: Ext) -> List[Rule]:
    e, s, n = t.term, t.bits, t.n
    if isinstance(e, App):
        return [("ext-app", lambda: App(Ext(e.fn, s[0::2], n), Ext(e.arg, s[1::2], n)))]
    if isinstance(e, Ite):
        # as ((ite c) a) b
        return [
            (
                "ext-ite",
                lambda: Ite(Ext(e.cond, s[0::2][0::2][1::2], n), Ext(e.then, s[0::2][1::2], n), Ext(e.other, s[1::2], n)),
            )
        ]
    if isinstance(e, Lam):
        return [("ext-lam", lambda: Lam(e.var, e.ty, Ext(e.body, s, n)))]
    if isinstance(e, Const) and e.name == "sample":
        return [("ext-sample", lambda: Real(sample_interval(s, n)))]
    if isinstance(e, Const) and e.name == "int" and e.level is None:
        return [("ext-int", lambda: Const("int", level=n))]
    if isinstance(e, (Const, Nat, Real)):
        return [("ext-const", lambda: e)]
    if isinstance(e, Ext):
        return [("ext-ext", lambda: e)]
    return []


def _y_candidates(y: Const, f: Term) -> List[Rule]:
    real = ends_in_real(y.ty)
    if isinstance(f, Lam) and isinstance(f.body, Ext):
        inner = f.body

        def unfold(n: int) -> Term:
            return Ext(subst(inner.term, f.var, App(y, Lam(f.var, f.ty, inner.term))), inner.bits, n)

        if real and inner.n == 0:
            return [("Y-bottom", lambda: bottom_of(y.ty))]
        if real:
            return [("Y-precision", lambda: unfold(inner.n - 1))]
        return [("Y-unfold", lambda: unfold(inner.n))]
    return [("Y-plain", lambda: App(f, App(y, f)))]


def candidates(t: Term) -> List[Rule]:
    """Every rule whose left-hand side matches ``t`` at the top."""
    if isinstance(t, Ext):
        return _ext_candidates(t)
    if isinstance(t, App):
        if not is_value(t.fn):
            return [("ctx-fn", lambda: App(step(t.fn), t.arg))]
        if not is_value(t.arg):
            return [("ctx-arg", lambda: App(t.fn, step(t.arg)))]
        f, a = t.fn, t.arg
        if isinstance(f, Lam):
            return [("beta", lambda: subst(f.body, f.var, a))]
        if isinstance(f, Const) and f.name in UNARY:
            r = _delta(f.name, [a])
            return [] if r is None else [(f.name, lambda: r)]
        if isinstance(f, App) and isinstance(f.fn, Const) and f.fn.name in BINARY:
            r = _delta(f.fn.name, [f.arg, a])
            return [(f.fn.name, lambda: r)]
        if isinstance(f, Const) and f.name == "Y":
            return _y_candidates(f, a)
        if isinstance(f, Const) and f.name == "int" and f.level is not None:
            return [("int", lambda: _quadrature_term(a, f.level))]
        return []
    if isinstance(t, Ite):
        if not is_value(t.cond):
            return [("ctx-ite", lambda: Ite(step(t.cond), t.then, t.other))]
        if t.cond == TRUE:
            return [("ite-tt", lambda: t.then)]
        if t.cond == FALSE:
            return [("ite-ff", lambda: t.other)]
    return []


def step(t: Term) -> Term:
    rules = candidates(t)
    if not rules:
        raise Stuck(f"no rule applies to {show(t)}")
    if len(rules) > 1:
        raise AssertionError(f"overlapping rules {[r for r, _ in rules]}")
    return rules[0][1]()


def evaluate(e: Term, bits: str, n: int, fuel: int = 100000) -> Term:
    """Reduce ``<e | bits, n>`` to a value."""
    t: Term = Ext(e, bits, n)
    for _ in range(fuel):
        if is_value(t):
            return t
        t = step(t)
    if is_value(t):
        return t
    raise FuelExhausted(f"no value after {fuel} steps")


@dataclass(frozen=True)
class Outcome:
    status: str  # "value", "stuck" or "diverged"
    value: Optional[Term] = None
    message: str = ""

    def __str__(self) -> str:
        if self.status == "value":
            return show(self.value)
        return f"{self.status}: {self.message}" if self.message else self.status


def run(e: Term, bits: str, n: int, fuel: int = 100000) -> Outcome:
    try:
        return Outcome("value", evaluate(e, bits, n, fuel))
    except Stuck as exc:
        return Outcome("stuck", None, str(exc))
    except FuelExhausted as exc:
        return Outcome("diverged", None, str(exc))


def _apply_value(f: Term, x: Term, fuel: int) -> Term:
    t: Term = App(f, x)
    for _ in range(fuel):
        if is_value(t):
            return t
        t = step(t)
    raise FuelExhausted(f"no value after {fuel} steps")


def int_quadrature(f: Term, n: int, fuel: int = 100000):
    """``sum_i 2**-n * f([i/2^n, (i+1)/2^n])``; BOT if any term is BOT."""
    total = DyInterval(ZERO)
    w = Dyadic(1, n)
    for i in range(1 << n):
        v = _apply_value(f, Real(DyInterval(Dyadic(i, n), Dyadic(i + 1, n))), fuel)
        if not isinstance(v, Real):
            raise PreconditionFailed("integrand does not return a real")
        if v.value is BOT:
            return BOT
        total = total + v.value.scale(w)
    return total


def _contains(outer: Term, inner: Term) -> bool:
    if isinstance(outer, Real) and isinstance(inner, Real):
        if outer.value is BOT:
            return True
        if inner.value is BOT:
            return False
        return outer.value.contains(inner.value)
    if isinstance(outer, (Nat, Const)) and isinstance(inner, (Nat, Const)):
        return outer == inner
    return True


@dataclass
class SweepReport:
    results: List[Outcome]
    violations: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def nested(self) -> bool:
        return not self.violations

    def lines(self) -> List[str]:
        return [str(o) for o in self.results]


def precision_sweep(e: Term, streams: Sequence[str], ns: Sequence[int], fuel: int = 100000) -> SweepReport:
    """Evaluate at ``(streams[k], ns[k])`` and report non-nested converged pairs."""
    if len(streams) != len(ns):
        raise PreconditionFailed("need one precision per stream")
    for a, b in zip(streams, streams[1:]):
        if not b.startswith(a):
            raise PreconditionFailed("streams must grow by extension")
    for a, b in zip(ns, ns[1:]):
        if b < a:
            raise PreconditionFailed("precisions must not decrease")
    results = [run(e, s, n, fuel) for s, n in zip(streams, ns)]
    report = SweepReport(results)
    done = [i for i, o in enumerate(results) if o.status == "value"]
    for x in range(len(done)):
        for y in range(x + 1, len(done)):
            i, j = done[x], done[y]
            if not _contains(results[i].value, results[j].value):
                report.violations.append((i, j))
    return report


_LCG_A = 6364136223846793005
_LCG_C = 1442695040888963407
_MASK = (1 << 64) - 1


def lcg_bits(seed: int, length: int) -> str:
    """Top bit of each state of the 64-bit linear congruential generator."""
    state = seed & _MASK
    out = []
    for _ in range(length):
        state = (_LCG_A * state + _LCG_C) & _MASK
        out.append("1" if state >> 63 else "0")
    return "".join(out)
