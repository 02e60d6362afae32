"""Elaboration of coarse-grain surface terms into the fine-grain core.

Every surface construct is translated by the standard sequencing translation:
subterms are evaluated left to right and bound to fresh variables before the
core construct consumes them.  Sugar:

* ``let x = t in u``        ->  ``x <- t; u``
* ``if c then a else b``    ->  ``w <- c; case w of inl _ -> a | inr _ -> b``
  (``c : unit + unit``, ``inl`` meaning true)
* ``ifpos v then a else b`` ->  ``w <- (x <- v; sign x); case w of ...``
* ``a < b``                 ->  ``sign(b - a)``; undefined when ``a = b``
* ``rec f : s -> t = body`` ->  self-application through ``mu r. r -> (s -> t)``
"""

from __future__ import annotations

from dataclasses import dataclass

from . import surface as S
from .pretty import format_surface, format_type
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
    NameSupply,
    Pair,
    PrimOp,
    Prod,
    Real,
    Return,
    Roll,
    Sign,
    Sum,
    TVar,
    Ty,
    Unit,
    UnitV,
    Val,
    Var,
    all_names,
    free_tvars,
    ty_alpha_eq,
    unfold,
)
from .typecheck import Ctx, check_comp, check_ctx, synth_comp, synth_val


@dataclass(frozen=True)
class Program:
    """An elaborated program: parameters, declared result type and core body."""

    params: tuple[tuple[str, Ty], ...]
    returns: Ty
    body: Comp
    source: S.SurfaceProgram | None = None

    @property
    def ctx(self) -> Ctx:
        return Ctx(self.params)

    def check(self) -> None:
        check_ctx(self.ctx)
        check_comp(self.ctx, self.body, self.returns)


class Elaborator:
    def __init__(self, supply: NameSupply):
        self.supply = supply

    def fresh(self, base: str = "x") -> str:
        return self.supply.fresh(base)

    def binder(self, name: str) -> str:
        return self.fresh("w") if name == "_" else name

    def comp(self, t: S.STerm) -> Comp:
        sp = t.span
        e = self.comp
        match t:
            case S.SVar(name):
                return Return(Var(name, span=sp), span=sp)
            case S.SLit(c):
                return Return(ConstR(c, span=sp), span=sp)
            case S.SUnit():
                return Return(UnitV(span=sp), span=sp)
            case S.SInl(v, ty) | S.SInr(v, ty) | S.SRoll(v, ty):
                cls = {S.SInl: Inl, S.SInr: Inr, S.SRoll: Roll}[type(t)]
                x = self.fresh()
                return Bind(x, e(v), Return(cls(Var(x), ty, span=sp), span=sp), span=sp)
            case S.SPair(a, b):
                x, y = self.fresh(), self.fresh()
                return Bind(x, e(a), Bind(y, e(b), Return(Pair(Var(x), Var(y), span=sp), span=sp)), span=sp)
            case S.SFun(x, ty, body):
                return Return(Lam(self.binder(x), ty, e(body), span=sp), span=sp)
            case S.SOp(op, args):
                names = [self.fresh() for _ in args]
                out: Comp = PrimOp(op, tuple(Var(n) for n in names), span=sp)
                return self._seq(list(zip(names, args)), out)
            case S.SApp(fn, arg):
                x, y = self.fresh(), self.fresh()
                return self._seq([(x, fn), (y, arg)], App(Var(x), Var(y), span=sp))
            case S.SLet(x, bound, body):
                return Bind(self.binder(x), e(bound), e(body), span=sp)
            case S.SIf(cond, a, b):
                w = self.fresh("w")
                return Bind(w, e(cond), self._branch(Var(w), a, b, sp), span=sp)
            case S.SIfPos(cond, a, b):
                w, x = self.fresh("w"), self.fresh()
                test = Bind(x, e(cond), Sign(Var(x), span=sp), span=sp)
                return Bind(w, test, self._branch(Var(w), a, b, sp), span=sp)
            case S.SLess(a, b):
                x, y, d = self.fresh(), self.fresh(), self.fresh()
                diff = Bind(d, PrimOp("sub", (Var(y), Var(x)), span=sp), Sign(Var(d), span=sp), span=sp)
                return self._seq([(x, a), (y, b)], diff)
            case S.SCaseSum(v, x, l, y, r):
                z = self.fresh("z")
                body = CaseSum(Var(z), self.binder(x), e(l), self.binder(y), e(r), span=sp)
                return Bind(z, e(v), body, span=sp)
            case S.SCasePair(v, x, y, body):
                z = self.fresh("z")
                return Bind(z, e(v), CasePair(Var(z), self.binder(x), self.binder(y), e(body), span=sp), span=sp)
            case S.SCaseUnit(v, body):
                z = self.fresh("z")
                return Bind(z, e(v), CaseUnit(Var(z), e(body), span=sp), span=sp)
            case S.SAbsurd(v, ty):
                z = self.fresh("z")
                return Bind(z, e(v), CaseVoid(Var(z), ty, span=sp), span=sp)
            case S.SIterate(body, x, start):
                y = self.fresh()
                return Bind(y, e(start), Iterate(e(body), x, Var(y), span=sp), span=sp)
            case S.SSign(v):
                x = self.fresh()
                return Bind(x, e(v), Sign(Var(x), span=sp), span=sp)
            case S.SUnroll(v, x, body):
                z = self.fresh("z")
                return Bind(z, e(v), CaseRoll(Var(z), self.binder(x), e(body), span=sp), span=sp)
            case S.SRec(f, ty, body):
                return desugar_rec(f, ty, e(body), self.supply)
        raise TypeError(f"not a surface term: {t!r}")

    def _seq(self, pairs, last: Comp) -> Comp:
        for name, sub in reversed(pairs):
            last = Bind(name, self.comp(sub), last, span=sub.span)
        return last

    def _branch(self, w: Val, a: S.STerm, b: S.STerm, sp) -> Comp:
        return CaseSum(w, self.fresh("w"), self.comp(a), self.fresh("w"), self.comp(b), span=sp)


def _supply_for(*terms: S.STerm, extra=()) -> NameSupply:
    avoid: set[str] = set(extra)
    for t in terms:
        avoid |= S.surface_names(t)
    return NameSupply(avoid)


def elaborate(t: S.STerm, supply: NameSupply | None = None) -> Comp:
    """The sequencing translation of a surface term into a core computation."""
    return Elaborator(supply or _supply_for(t)).comp(t)


def elaborate_program(p: S.SurfaceProgram) -> Program:
    supply = _supply_for(p.body, extra=[x for x, _ in p.params])
    return Program(p.params, p.returns, Elaborator(supply).comp(p.body), p)


def load_program(text: str, *, check: bool = True) -> Program:
    prog = elaborate_program(S.parse_program(text))
    if check:
        prog.check()
    return prog


def _fresh_tvar(ty: Ty, base: str = "r") -> str:
    used = free_tvars(ty)
    name = base
    while name in used:
        name += "'"
    return name


def rec_carrier(ty: Arrow) -> Mu:
    """``mu r. r -> ty``: the type through which a recursive function is knotted."""
    r = _fresh_tvar(ty)
    return Mu(r, Arrow(TVar(r), ty))


def desugar_rec(f: str, ty: Arrow, body: Comp, supply: NameSupply | None = None) -> Comp:
    """Encode ``rec f : ty = body`` by self-application through a recursive type.

    ``body`` is a computation of type ``ty`` with ``f : ty`` free.  The result
    binds the helper ``h = fun (x: R) -> fun (y: s) -> unroll x as x' in
    (f <- x' x; g <- body; g y)`` and returns ``h (roll h)``; each recursive
    call re-derives ``f`` with one unroll-and-apply step.
    """
    if supply is None:
        supply = NameSupply(all_names(body) | {f})
    carrier = rec_carrier(ty)
    x, y, x2, g, h = (supply.fresh(b) for b in ("self", "arg", "unr", "g", "h"))
    inner = CaseRoll(
        Var(x),
        x2,
        Bind(f, App(Var(x2), Var(x)), Bind(g, body, App(Var(g), Var(y)))),
    )
    helper = Lam(x, carrier, Return(Lam(y, ty.domain, inner)))
    return Bind(h, Return(helper), App(Var(h), Roll(Var(h), carrier)))


def iterate_to_rec(t: Comp, ctx: Ctx | None = None, supply: NameSupply | None = None) -> Comp:
    """Replace every ``iterate`` by its encoding through term recursion.

    ``iterate t from x = v`` becomes
    ``(rec z : s -> r = fun (x: s) -> y <- t; case y of inl x' -> z x' | inr x'' -> x'') v``.
    ``t`` must be well typed in ``ctx``; types are needed for the encoding.
    """
    ctx = ctx or Ctx()
    supply = supply or NameSupply(all_names(t) | set(ctx.names()))
    return _it2rec(t, ctx, supply)


def _it2rec(t, ctx: Ctx, supply: NameSupply):
    r = lambda u, c=ctx: _it2rec(u, c, supply)  # noqa: E731
    match t:
        case Var() | ConstR() | UnitV():
            return t
        case Inl(v, ty):
            return Inl(r(v), ty)
        case Inr(v, ty):
            return Inr(r(v), ty)
        case Roll(v, ty):
            return Roll(r(v), ty)
        case Pair(a, b):
            return Pair(r(a), r(b))
        case Lam(x, ty, body):
            return Lam(x, ty, r(body, ctx.extend(x, ty)))
        case Return(v):
            return Return(r(v))
        case Bind(x, first, rest):
            return Bind(x, r(first), r(rest, ctx.extend(x, synth_comp(ctx, first))))
        case CaseVoid(v, ty):
            return CaseVoid(r(v), ty)
        case CaseSum(v, x, left, y, right):
            sty = synth_val(ctx, v)
            return CaseSum(r(v), x, r(left, ctx.extend(x, sty.left)), y, r(right, ctx.extend(y, sty.right)))
        case CaseUnit(v, body):
            return CaseUnit(r(v), r(body))
        case CasePair(v, x, y, body):
            pty = synth_val(ctx, v)
            return CasePair(r(v), x, y, r(body, ctx.extend(x, pty.left).extend(y, pty.right)))
        case App(fn, arg):
            return App(r(fn), r(arg))
        case PrimOp(op, args):
            return PrimOp(op, tuple(r(a) for a in args))
        case Sign(v):
            return Sign(r(v))
        case CaseRoll(v, x, body):
            return CaseRoll(r(v), x, r(body, ctx.extend(x, unfold(synth_val(ctx, v)))))
        case Iterate(body, x, start):
            sigma = synth_val(ctx, start)
            bty = synth_comp(ctx.extend(x, sigma), body)
            assert isinstance(bty, Sum)
            body2 = r(body, ctx.extend(x, sigma))
            z, y, k, e, h = (supply.fresh(b) for b in ("loop", "step", "k", "done", "it"))
            fty = Arrow(sigma, bty.right)
            loop = Return(Lam(x, sigma, Bind(y, body2, CaseSum(Var(y), k, App(Var(z), Var(k)), e, Return(Var(e))))))
            return Bind(h, desugar_rec(z, fty, loop, supply), App(Var(h), r(start)))
    raise TypeError(f"not a term: {t!r}")


class ArgumentError(ValueError):
    pass


def literal_value(t: S.STerm, ty: Ty) -> Val:
    """Read a surface literal as a closed core value of type ``ty``.

    Injection and roll ascriptions may be omitted; they are taken from ``ty``.
    """

    def asc(given, want: Ty) -> None:
        if given is not None and not ty_alpha_eq(given, want):
            raise ArgumentError("ascription does not match the parameter type")

    match t, ty:
        case S.SLit(c), Real():
            return ConstR(c)
        case S.SOp("neg", (S.SLit(c),)), Real():
            return ConstR(-c)
        case S.SUnit(), Unit():
            return UnitV()
        case S.SPair(a, b), Prod(l, r):
            return Pair(literal_value(a, l), literal_value(b, r))
        case S.SInl(v, given), Sum(l, _):
            asc(given, ty)
            return Inl(literal_value(v, l), ty)
        case S.SInr(v, given), Sum(_, r):
            asc(given, ty)
            return Inr(literal_value(v, r), ty)
        case S.SRoll(v, given), Mu():
            asc(given, ty)
            return Roll(literal_value(v, unfold(ty)), ty)
    raise ArgumentError(f"{format_surface(t)} is not a literal of type {format_type(ty)}")


def read_args(text: str, params) -> list[Val]:
    """Parse a comma-separated list of literals against the parameter types."""
    terms = S.parse_args(text, require_ascriptions=False) if text.strip() else []
    if len(terms) != len(params):
        raise ArgumentError(f"expected {len(params)} arguments, got {len(terms)}")
    return [literal_value(t, ty) for t, (_, ty) in zip(terms, params)]
