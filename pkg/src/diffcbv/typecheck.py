"""Syntax-directed type checking for values and computations.

Every construct that cannot synthesise its own type carries an ascription
(injections, ``roll``, the empty case, lambda parameters), so checking is a
single bottom-up pass: synthesise, then compare up to alpha-equivalence of
types.  Recursive types are iso-recursive; ``Mu`` types are never unfolded
implicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import ops
from .syntax import (
    BOOL,
    REAL,
    UNIT,
    VOID,
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
    Return,
    Roll,
    Sign,
    Span,
    Sum,
    TVar,
    Ty,
    UnitV,
    Val,
    Var,
    Void,
    ty_alpha_eq,
    is_first_order,  # noqa: F401  (re-exported)
    unfold,
)

TYPE_MISMATCH = "TYPE_MISMATCH"
UNBOUND_VAR = "UNBOUND_VAR"
UNBOUND_TYVAR = "UNBOUND_TYVAR"
ARITY = "ARITY"


class TypeCheckError(Exception):
    def __init__(self, code: str, message: str, span: Span | None = None):
        self.code = code
        self.message = message
        self.span = span
        super().__init__(f"{code}: {message}" + (f" at {span}" if span else ""))

    def to_json(self) -> dict:
        out = {"code": self.code, "message": self.message}
        if self.span is not None:
            out["span"] = {"line": self.span.line, "col": self.span.col}
        return out


@dataclass(frozen=True)
class Ctx:
    """Term context (later bindings shadow earlier) plus in-scope type variables."""

    bindings: tuple[tuple[str, Ty], ...] = ()
    tvars: frozenset[str] = field(default_factory=frozenset)

    @classmethod
    def of(cls, *pairs: tuple[str, Ty], tvars=()) -> "Ctx":
        return cls(tuple(pairs), frozenset(tvars))

    def extend(self, name: str, ty: Ty) -> "Ctx":
        return Ctx(self.bindings + ((name, ty),), self.tvars)

    def lookup(self, name: str) -> Ty | None:
        for n, ty in reversed(self.bindings):
            if n == name:
                return ty
        return None

    def names(self) -> list[str]:
        return [n for n, _ in self.bindings]


def show_ty(ty: Ty) -> str:
    from .pretty import format_type

    return format_type(ty)


def kind_check(tvars, ty: Ty, span: Span | None = None) -> None:
    """Raise UNBOUND_TYVAR unless every type variable of ``ty`` is in scope."""
    match ty:
        case TVar(name):
            if name not in tvars:
                raise TypeCheckError(UNBOUND_TYVAR, f"unbound type variable {name}", span)
        case Mu(a, body):
            kind_check(frozenset(tvars) | {a}, body, span)
        case Sum(l, r) | Prod(l, r) | Arrow(l, r):
            kind_check(tvars, l, span)
            kind_check(tvars, r, span)


def _expect(expected: Ty, found: Ty, what: str, span: Span | None) -> None:
    if not ty_alpha_eq(expected, found):
        raise TypeCheckError(
            TYPE_MISMATCH,
            f"{what}: expected {show_ty(expected)}, found {show_ty(found)}",
            span,
        )


def synth_val(ctx: Ctx, v: Val, span: Span | None = None) -> Ty:
    span = v.span or span
    match v:
        case Var(name):
            ty = ctx.lookup(name)
            if ty is None:
                raise TypeCheckError(UNBOUND_VAR, f"unbound variable {name}", span)
            return ty
        case ConstR():
            return REAL
        case UnitV():
            return UNIT
        case Inl(payload, ty) | Inr(payload, ty):
            kind_check(ctx.tvars, ty, span)
            if not isinstance(ty, Sum):
                raise TypeCheckError(TYPE_MISMATCH, f"injection ascribed non-sum type {show_ty(ty)}", span)
            side = ty.left if isinstance(v, Inl) else ty.right
            check_val(ctx, payload, side, span)
            return ty
        case Pair(a, b):
            return Prod(synth_val(ctx, a, span), synth_val(ctx, b, span))
        case Lam(x, ty, body):
            kind_check(ctx.tvars, ty, span)
            return Arrow(ty, synth_comp(ctx.extend(x, ty), body, span))
        case Roll(payload, ty):
            kind_check(ctx.tvars, ty, span)
            if not isinstance(ty, Mu):
                raise TypeCheckError(TYPE_MISMATCH, f"roll ascribed non-recursive type {show_ty(ty)}", span)
            check_val(ctx, payload, unfold(ty), span)
            return ty
    raise TypeError(f"not a value: {v!r}")


def synth_comp(ctx: Ctx, t: Comp, span: Span | None = None) -> Ty:
    span = t.span or span
    match t:
        case Return(v):
            return synth_val(ctx, v, span)
        case Bind(x, first, rest):
            ty = synth_comp(ctx, first, span)
            return synth_comp(ctx.extend(x, ty), rest, span)
        case CaseVoid(v, ty):
            kind_check(ctx.tvars, ty, span)
            check_val(ctx, v, VOID, span)
            return ty
        case CaseSum(v, x, left, y, right):
            sty = synth_val(ctx, v, span)
            if not isinstance(sty, Sum):
                raise TypeCheckError(TYPE_MISMATCH, f"case on non-sum type {show_ty(sty)}", span)
            lt = synth_comp(ctx.extend(x, sty.left), left, span)
            rt = synth_comp(ctx.extend(y, sty.right), right, span)
            _expect(lt, rt, "case branches disagree", right.span or span)
            return lt
        case CaseUnit(v, body):
            check_val(ctx, v, UNIT, span)
            return synth_comp(ctx, body, span)
        case CasePair(v, x, y, body):
            pty = synth_val(ctx, v, span)
            if not isinstance(pty, Prod):
                raise TypeCheckError(TYPE_MISMATCH, f"pair match on non-product type {show_ty(pty)}", span)
            return synth_comp(ctx.extend(x, pty.left).extend(y, pty.right), body, span)
        case App(fn, arg):
            fty = synth_val(ctx, fn, span)
            if not isinstance(fty, Arrow):
                raise TypeCheckError(TYPE_MISMATCH, f"application of non-function type {show_ty(fty)}", span)
            check_val(ctx, arg, fty.domain, span)
            return fty.codomain
        case PrimOp(name, args):
            try:
                spec = ops.lookup(name)
            except ops.UnknownOp:
                raise TypeCheckError(UNBOUND_VAR, f"unknown operation {name}", span) from None
            if len(args) != spec.arity:
                raise TypeCheckError(ARITY, f"{name} expects {spec.arity} arguments, got {len(args)}", span)
            for a in args:
                check_val(ctx, a, REAL, span)
            return REAL
        case Sign(v):
            check_val(ctx, v, REAL, span)
            return BOOL
        case Iterate(body, x, start):
            sigma = synth_val(ctx, start, span)
            bty = synth_comp(ctx.extend(x, sigma), body, span)
            if not isinstance(bty, Sum):
                raise TypeCheckError(TYPE_MISMATCH, f"iterate body must return a sum, found {show_ty(bty)}", span)
            _expect(sigma, bty.left, "iterate state", span)
            return bty.right
        case CaseRoll(v, x, body):
            mty = synth_val(ctx, v, span)
            if not isinstance(mty, Mu):
                raise TypeCheckError(TYPE_MISMATCH, f"unroll of non-recursive type {show_ty(mty)}", span)
            return synth_comp(ctx.extend(x, unfold(mty)), body, span)
    raise TypeError(f"not a computation: {t!r}")


def check_val(ctx: Ctx, v: Val, ty: Ty, span: Span | None = None) -> None:
    _expect(ty, synth_val(ctx, v, span), "value", v.span or span)


def check_comp(ctx: Ctx, t: Comp, ty: Ty, span: Span | None = None) -> None:
    _expect(ty, synth_comp(ctx, t, span), "computation", t.span or span)


def check_ctx(ctx: Ctx) -> None:
    for name, ty in ctx.bindings:
        kind_check(ctx.tvars, ty)


def inhabited(ty: Ty) -> bool:
    """Whether ``ty`` has a closed value (recursive occurrences count as empty)."""
    match ty:
        case Void() | TVar():
            return False
        case Sum(l, r):
            return inhabited(l) or inhabited(r)
        case Prod(l, r):
            return inhabited(l) and inhabited(r)
        case Mu(_, body):
            return inhabited(body)
        case _:
            return True
