"""Simple-type checking for (extended) PFL terms."""

from __future__ import annotations

from typing import Dict, Optional

from ..errors import TypeErrorPFL
from .syntax import BOOL, CONSTANT_TYPES, NAT, REAL, App, Arrow, Const, Ext, Ite, Lam, Nat, Real, Term, Type, Var, show_type

__all__ = ["typecheck", "ends_in_real"]


def ends_in_real(t: Type) -> bool:
    """True for ``s1 -> ... -> sk -> real``."""
    while isinstance(t, Arrow):
        t = t.res
    return t == REAL


def typecheck(t: Term, env: Optional[Dict[str, Type]] = None) -> Type:
    env = env or {}
    if isinstance(t, Const):
        if t.name == "Y":
            if t.ty is None:
                raise TypeErrorPFL("Y needs a type annotation")
            return Arrow(Arrow(t.ty, t.ty), t.ty)
        return CONSTANT_TYPES[t.name]
    if isinstance(t, Nat):
        if t.value < 0:
            raise TypeErrorPFL("negative natural")
        return NAT
    if isinstance(t, Real):
        return REAL
    if isinstance(t, Var):
        if t.name not in env:
            raise TypeErrorPFL(f"unbound variable {t.name}")
        return env[t.name]
    if isinstance(t, Lam):
        inner = dict(env)
        inner[t.var] = t.ty
        return Arrow(t.ty, typecheck(t.body, inner))
    if isinstance(t, App):
        f = typecheck(t.fn, env)
        a = typecheck(t.arg, env)
        if not isinstance(f, Arrow):
            raise TypeErrorPFL(f"applying a non-function of type {show_type(f)}")
        if f.arg != a:
            raise TypeErrorPFL(f"argument of type {show_type(a)} where {show_type(f.arg)} is expected")
        return f.res
    if isinstance(t, Ite):
        c = typecheck(t.cond, env)
        if c != BOOL:
            raise TypeErrorPFL(f"condition has type {show_type(c)}, not bool")
        a = typecheck(t.then, env)
        b = typecheck(t.other, env)
        if a != b:
            raise TypeErrorPFL(f"branches have types {show_type(a)} and {show_type(b)}")
        return a
    if isinstance(t, Ext):
        return typecheck(t.term, env)
    raise TypeErrorPFL(f"not a term: {t!r}")
