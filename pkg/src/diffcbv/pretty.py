"""Printing types, surface terms and core terms as parseable surface text.

Core terms are printed through their obvious embedding into the surface
language: ``x <- t; s`` becomes ``let x = t in s`` and ``return v`` is just
``v``.  Re-parsing and elaborating the output gives a program of the same type
(not the same term: elaboration inserts administrative binds).
"""

from __future__ import annotations

from . import surface as S
from .syntax import (
    App,
    Arrow,
    Bind,
    CasePair,
    CaseRoll,
    CaseSum,
    CaseUnit,
    CaseVoid,
    Comp,
    ConstR,
    Inl,
    Inr,
    Iterate,
    Lam,
    Mu,
    Pair,
    PrimOp,
    Prod,
    Real,
    Return,
    Roll,
    Sign,
    Sum,
    Term,
    TVar,
    Ty,
    Unit,
    UnitV,
    Val,
    Var,
    Void,
)

# -- types ------------------------------------------------------------------

_TY_ARROW, _TY_SUM, _TY_PROD, _TY_ATOM = range(4)


def format_type(ty: Ty, prec: int = _TY_ARROW) -> str:
    match ty:
        case Real():
            return "real"
        case Unit():
            return "unit"
        case Void():
            return "void"
        case TVar(name):
            return name
        case Arrow(a, b):
            out, level = f"{format_type(a, _TY_SUM)} -> {format_type(b, _TY_ARROW)}", _TY_ARROW
        case Sum(a, b):
            out, level = f"{format_type(a, _TY_PROD)} + {format_type(b, _TY_SUM)}", _TY_SUM
        case Prod(a, b):
            out, level = f"{format_type(a, _TY_ATOM)} * {format_type(b, _TY_PROD)}", _TY_PROD
        case Mu(a, body):
            # mu extends as far right as possible; parenthesise unless outermost
            out = f"mu {a}. {format_type(body)}"
            return out if prec == _TY_ARROW else f"({out})"
        case _:
            raise TypeError(f"not a type: {ty!r}")
    return out if level >= prec else f"({out})"


# -- surface terms ----------------------------------------------------------

_OPEN, _CMP, _ADD, _MUL, _APP, _ATOM = range(6)
_INFIX = {"add": ("+", _ADD), "sub": ("-", _ADD), "mul": ("*", _MUL), "div": ("/", _MUL)}


def _lit(c: float) -> str:
    return repr(float(c))


def format_surface(t: S.STerm, prec: int = _OPEN) -> str:
    out, level = _fmt(t)
    return out if level >= prec else f"({out})"


def _fmt(t: S.STerm) -> tuple[str, int]:
    f = format_surface
    match t:
        case S.SVar(name):
            return name, _ATOM
        case S.SLit(c):
            return _lit(c), (_ATOM if c >= 0 and repr(c)[0] != "-" else _ADD)
        case S.SUnit():
            return "()", _ATOM
        case S.SPair(a, b):
            return f"({f(a)}, {f(b)})", _ATOM
        case S.SInl(v, ty) | S.SInr(v, ty) | S.SRoll(v, ty):
            kw = {S.SInl: "inl", S.SInr: "inr", S.SRoll: "roll"}[type(t)]
            asc = f"[{format_type(ty)}]" if ty is not None else ""
            return f"{kw}{asc} {f(v, _ATOM)}", _APP
        case S.SFun(x, ty, body):
            return f"fun ({x}: {format_type(ty)}) -> {f(body)}", _OPEN
        case S.SOp(op, args):
            if op in _INFIX and len(args) == 2:
                sym, level = _INFIX[op]
                return f"{f(args[0], level)} {sym} {f(args[1], level + 1)}", level
            return f"{op}({', '.join(f(a) for a in args)})", _ATOM
        case S.SApp(fn, arg):
            return f"{f(fn, _APP)} {f(arg, _ATOM)}", _APP
        case S.SLet(x, bound, body):
            return f"let {x} = {f(bound)} in {f(body)}", _OPEN
        case S.SIf(c, a, b):
            return f"if {f(c)} then {f(a)} else {f(b)}", _OPEN
        case S.SIfPos(c, a, b):
            return f"ifpos {f(c)} then {f(a)} else {f(b)}", _OPEN
        case S.SLess(a, b):
            return f"{f(a, _ADD)} < {f(b, _ADD)}", _CMP
        case S.SCaseSum(v, x, l, y, r):
            return f"case {f(v)} of inl {x} -> {f(l)} | inr {y} -> {f(r)}", _OPEN
        case S.SCasePair(v, x, y, body):
            return f"case {f(v)} of ({x}, {y}) -> {f(body)}", _OPEN
        case S.SCaseUnit(v, body):
            return f"case {f(v)} of () -> {f(body)}", _OPEN
        case S.SAbsurd(v, ty):
            return f"absurd[{format_type(ty)}] {f(v, _ATOM)}", _APP
        case S.SIterate(body, x, start):
            return f"iterate {f(body)} from {x} = {f(start)}", _OPEN
        case S.SSign(v):
            return f"sign {f(v, _ATOM)}", _APP
        case S.SUnroll(v, x, body):
            return f"unroll {f(v)} as {x} in {f(body)}", _OPEN
        case S.SRec(name, ty, body):
            return f"rec {name} : {format_type(ty)} = {f(body)}", _OPEN
    raise TypeError(f"not a surface term: {t!r}")


def format_surface_program(p: S.SurfaceProgram) -> str:
    params = ", ".join(f"{x}: {format_type(ty)}" for x, ty in p.params)
    return f"params {params};\nreturns {format_type(p.returns)};\nbody {format_surface(p.body)}\n"


# -- core terms -------------------------------------------------------------


def core_to_surface(t: Term) -> S.STerm:
    """Embed a core value or computation into the surface syntax."""
    c = core_to_surface
    match t:
        case Var(name):
            return S.SVar(name)
        case ConstR(v):
            return S.SLit(v)
        case UnitV():
            return S.SUnit()
        case Pair(a, b):
            return S.SPair(c(a), c(b))
        case Inl(v, ty):
            return S.SInl(c(v), ty)
        case Inr(v, ty):
            return S.SInr(c(v), ty)
        case Roll(v, ty):
            return S.SRoll(c(v), ty)
        case Lam(x, ty, body):
            return S.SFun(x, ty, c(body))
        case Return(v):
            return c(v)
        case Bind(x, first, rest):
            return S.SLet(x, c(first), c(rest))
        case CaseVoid(v, ty):
            return S.SAbsurd(c(v), ty)
        case CaseSum(v, x, l, y, r):
            return S.SCaseSum(c(v), x, c(l), y, c(r))
        case CaseUnit(v, body):
            return S.SCaseUnit(c(v), c(body))
        case CasePair(v, x, y, body):
            return S.SCasePair(c(v), x, y, c(body))
        case App(f, a):
            return S.SApp(c(f), c(a))
        case PrimOp(op, args):
            return S.SOp(op, tuple(c(a) for a in args))
        case Sign(v):
            return S.SSign(c(v))
        case Iterate(body, x, start):
            return S.SIterate(c(body), x, c(start))
        case CaseRoll(v, x, body):
            return S.SUnroll(c(v), x, c(body))
    raise TypeError(f"not a core term: {t!r}")


def format_term(t: Term) -> str:
    return format_surface(core_to_surface(t))


def format_val(v: Val) -> str:
    return format_term(v)


def format_comp(t: Comp) -> str:
    return format_term(t)


def format_program(params, returns: Ty, body: Comp) -> str:
    ps = ", ".join(f"{x}: {format_type(ty)}" for x, ty in params)
    return f"params {ps};\nreturns {format_type(returns)};\nbody {format_comp(body)}\n"
