"""Types, terms and the concrete grammar of PFL.

Grammar (``#`` starts a comment)::

    term  ::= ("\\" | "λ" | "fun") IDENT ":" type "." term
            | "if" term "then" term "else" term
            | "let" IDENT ":" type "=" term "in" term
            | sum
    sum   ::= prod (("+" | "-") prod)*
    prod  ::= app (("*" | "/") app)*
    app   ::= "ite" atom atom atom | atom atom*
    atom  ::= IDENT | NAT | "[" DYADIC "," DYADIC "]" | "Y" "[" type "]"
            | "(" term ")"
    type  ::= base ("->" type)?
    base  ::= "bool" | "nat" | "real" | "o" | "ν" | "ρ" | "(" type ")"

Infix ``+ - * /`` act on reals.  Named constants: ``sample``, ``tt``,
``ff``, ``pos`` (real test ``0 <``), ``npos`` (nat test), ``min``, ``max``,
``succ``, ``pred``, ``nplus``, ``toreal`` and ``int``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

from ..domain import BOT
from ..dyadic import Dyadic, DyInterval
from ..errors import ParseError

__all__ = [
    "Type",
    "BOOL",
    "NAT",
    "REAL",
    "Arrow",
    "Const",
    "Nat",
    "Real",
    "Var",
    "App",
    "Lam",
    "Ite",
    "Ext",
    "Term",
    "PflSyntaxError",
    "parse",
    "parse_type",
    "show",
    "show_type",
    "CONSTANT_TYPES",
]


class PflSyntaxError(ParseError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at offset {pos}")
        self.pos = pos


@dataclass(frozen=True)
class Base:
    name: str  # "o", "nu" or "rho"


@dataclass(frozen=True)
class Arrow:
    arg: "Type"
    res: "Type"


Type = Union[Base, Arrow]
BOOL = Base("o")
NAT = Base("nu")
REAL = Base("rho")


def show_type(t: Type) -> str:
    if isinstance(t, Arrow):
        a = show_type(t.arg)
        if isinstance(t.arg, Arrow):
            a = f"({a})"
        return f"{a} -> {show_type(t.res)}"
    return {"o": "bool", "nu": "nat", "rho": "real"}[t.name]


def _arrows(*ts: Type) -> Type:
    out = ts[-1]
    for t in reversed(ts[:-1]):
        out = Arrow(t, out)
    return out


RR = Arrow(REAL, REAL)
CONSTANT_TYPES = {
    "sample": REAL,
    "tt": BOOL,
    "ff": BOOL,
    "pos": Arrow(REAL, BOOL),
    "npos": Arrow(NAT, BOOL),
    "add": _arrows(REAL, REAL, REAL),
    "sub": _arrows(REAL, REAL, REAL),
    "mul": _arrows(REAL, REAL, REAL),
    "div": _arrows(REAL, REAL, REAL),
    "min": _arrows(REAL, REAL, REAL),
    "max": _arrows(REAL, REAL, REAL),
    "succ": Arrow(NAT, NAT),
    "pred": Arrow(NAT, NAT),
    "nplus": _arrows(NAT, NAT, NAT),
    "toreal": Arrow(NAT, REAL),
    "int": Arrow(RR, REAL),
}
BINARY = {"add", "sub", "mul", "div", "min", "max", "nplus"}
UNARY = {"pos", "npos", "succ", "pred", "toreal"}


@dataclass(frozen=True)
class Const:
    """A named constant.  ``Y`` carries its type in ``ty``; ``int`` carries
    its quadrature precision in ``level`` once evaluation fixes it."""

    name: str
    ty: Optional[Type] = None
    level: Optional[int] = None


@dataclass(frozen=True)
class Nat:
    value: int


@dataclass(frozen=True)
class Real:
    """An interval constant; ``value`` is BOT for the whole real line."""

    value: object


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Lam:
    var: str
    ty: Type
    body: "Term"


@dataclass(frozen=True)
class Ite:
    cond: "Term"
    then: "Term"
    other: "Term"


@dataclass(frozen=True)
class Ext:
    """``<e | bits, n>``: ``e`` evaluated with random bits and precision."""

    term: "Term"
    bits: str
    n: int


Term = Union[Const, Nat, Real, Var, App, Lam, Ite, Ext]


def show_real(v) -> str:
    return "(-inf,+inf)" if v is BOT else str(v)


def show(t: Term) -> str:
    if isinstance(t, Const):
        if t.name == "Y":
            return f"Y[{show_type(t.ty)}]"
        if t.name == "int" and t.level is not None:
            return f"int@{t.level}"
        return t.name
    if isinstance(t, Nat):
        return str(t.value)
    if isinstance(t, Real):
        return show_real(t.value)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, App):
        f = show(t.fn)
        a = show(t.arg)
        if isinstance(t.fn, (Lam, Ite)):
            f = f"({f})"
        if isinstance(t.arg, (App, Lam, Ite)):
            a = f"({a})"
        return f"{f} {a}"
    if isinstance(t, Lam):
        return f"\\{t.var}:{show_type(t.ty)}. {show(t.body)}"
    if isinstance(t, Ite):
        return f"if {show(t.cond)} then {show(t.then)} else {show(t.other)}"
    if isinstance(t, Ext):
        return f"<{show(t.term)} | {t.bits or '-'}, {t.n}>"
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# lexer and parser

_TOKEN = re.compile(
    r"\s+|#[^\n]*|(?P<arrow>->)|(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*|λ|ν|ρ)|(?P<sym>[\\()\[\]:.,=+\-*/^])"
)
_KEYWORDS = {"if", "then", "else", "let", "in", "fun", "ite", "Y"}
_OPS = {"+": "add", "-": "sub", "*": "mul", "/": "div"}


def _lex(text: str) -> List[Tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise PflSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = mt.lastgroup
        if kind is not None:
            out.append((kind, mt.group(kind), pos))
        pos = mt.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _lex(text)
        self.i = 0

    def peek(self) -> Tuple[str, str, int]:
        return self.toks[self.i]

    def next(self) -> Tuple[str, str, int]:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str) -> None:
        kind, v, pos = self.next()
        if v != value:
            raise PflSyntaxError(f"expected {value!r}, found {v or 'end of input'!r}", pos)

    def ident(self) -> str:
        kind, v, pos = self.next()
        if kind != "ident" or v in _KEYWORDS:
            raise PflSyntaxError(f"expected a variable name, found {v!r}", pos)
        return v

    # types
    def type_(self) -> Type:
        a = self.base()
        if self.peek()[1] == "->":
            self.next()
            return Arrow(a, self.type_())
        return a

    def base(self) -> Type:
        kind, v, pos = self.next()
        if v in ("bool", "o"):
            return BOOL
        if v in ("nat", "ν"):
            return NAT
        if v in ("real", "ρ"):
            return REAL
        if v == "(":
            t = self.type_()
            self.expect(")")
            return t
        raise PflSyntaxError(f"expected a type, found {v!r}", pos)

    # terms
    def term(self) -> Term:
        kind, v, pos = self.peek()
        if v in ("\\", "λ", "fun"):
            self.next()
            x = self.ident()
            self.expect(":")
            ty = self.type_()
            self.expect(".")
            return Lam(x, ty, self.term())
        if v == "if":
            self.next()
            c = self.term()
            self.expect("then")
            a = self.term()
            self.expect("else")
            return Ite(c, a, self.term())
        if v == "let":
            self.next()
            x = self.ident()
            self.expect(":")
            ty = self.type_()
            self.expect("=")
            bound = self.term()
            self.expect("in")
            return App(Lam(x, ty, self.term()), bound)
        return self.sum()

    def sum(self) -> Term:
        t = self.prod()
        while self.peek()[1] in ("+", "-"):
            op = _OPS[self.next()[1]]
            t = App(App(Const(op), t), self.prod())
        return t

    def prod(self) -> Term:
        t = self.app()
        while self.peek()[1] in ("*", "/"):
            op = _OPS[self.next()[1]]
            t = App(App(Const(op), t), self.app())
        return t

    def _starts_atom(self) -> bool:
        kind, v, _ = self.peek()
        if kind == "num" or v in ("(", "[", "Y"):
            return True
        return kind == "ident" and v not in _KEYWORDS

    def app(self) -> Term:
        if self.peek()[1] == "ite":
            self.next()
            c = self.atom()
            a = self.atom()
            b = self.atom()
            return Ite(c, a, b)
        t = self.atom()
        while self._starts_atom():
            t = App(t, self.atom())
        return t

    def _dyadic(self) -> Dyadic:
        kind, v, pos = self.next()
        sign = ""
        if v == "-":
            sign = "-"
            kind, v, pos = self.next()
        if kind != "num":
            raise PflSyntaxError(f"expected a number, found {v!r}", pos)
        text = sign + v
        if self.peek()[1] == "/":
            self.next()
            k2, d, p2 = self.next()
            if k2 != "num":
                raise PflSyntaxError("expected a denominator", p2)
            text += "/" + d
            if self.peek()[1] == "^":
                self.next()
                k3, k, p3 = self.next()
                if k3 != "num":
                    raise PflSyntaxError("expected an exponent", p3)
                text += "^" + k
        try:
            return Dyadic.parse(text)
        except ParseError:
            raise PflSyntaxError(f"{text} is not a dyadic rational", pos) from None

    def atom(self) -> Term:
        kind, v, pos = self.next()
        if kind == "num":
            return Nat(int(v))
        if v == "[":
            lo = self._dyadic()
            self.expect(",")
            hi = self._dyadic()
            self.expect("]")
            if lo > hi:
                raise PflSyntaxError("interval has lo > hi", pos)
            return Real(DyInterval(lo, hi))
        if v == "(":
            t = self.term()
            self.expect(")")
            return t
        if v == "Y":
            self.expect("[")
            ty = self.type_()
            self.expect("]")
            return Const("Y", ty)
        if kind == "ident" and v not in _KEYWORDS:
            if v in CONSTANT_TYPES:
                return Const(v)
            return Var(v)
        raise PflSyntaxError(f"unexpected {v or 'end of input'!r}", pos)


def parse(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    kind, v, pos = p.peek()
    if kind != "eof":
        raise PflSyntaxError(f"trailing input {v!r}", pos)
    return t


def parse_type(text: str) -> Type:
    p = _Parser(text)
    t = p.type_()
    if p.peek()[0] != "eof":
        raise PflSyntaxError("trailing input after type", p.peek()[2])
    return t
