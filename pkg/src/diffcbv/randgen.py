"""Random well-typed terms, for property tests.

Generation is type directed: ask for a value or computation of a given type
in a given context and get one back.  Binders are drawn from a small pool of
names so shadowing and potential capture are common.  The only recursive
type used is the list type ``mu a. unit + real * a``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

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
    Void,
    subst_many,
    term_depth,
    ty_alpha_eq,
    unfold,
)
from .typecheck import Ctx

LIST = Mu("a", Sum(UNIT, Prod(REAL, TVar("a"))))
NAMES = ("x", "y", "z", "f", "g")
CONSTANTS = (0.5, -1.5, 2.0, 3.0, -0.25, 1.0)


class Gen:
    def __init__(self, seed: int | random.Random = 0, *, names=NAMES, first_order_only: bool = False):
        self.rng = seed if isinstance(seed, random.Random) else random.Random(seed)
        self.names = names
        self.first_order_only = first_order_only

    # -- types ---------------------------------------------------------------

    def ty(self, depth: int = 2) -> Ty:
        r = self.rng
        if depth <= 0:
            return r.choice([REAL, REAL, REAL, UNIT, BOOL])
        k = r.choices(
            ["real", "unit", "sum", "prod", "arrow", "list", "voidsum"],
            [5, 1, 2, 2, 0 if self.first_order_only else 2, 1, 0.3],
        )[0]
        match k:
            case "real":
                return REAL
            case "unit":
                return UNIT
            case "sum":
                return Sum(self.ty(depth - 1), self.ty(depth - 1))
            case "prod":
                return Prod(self.ty(depth - 1), self.ty(depth - 1))
            case "arrow":
                dom = VOID if r.random() < 0.1 else self.ty(depth - 1)
                return Arrow(dom, self.ty(depth - 1))
            case "list":
                return LIST
            case _:
                return Sum(VOID, self.ty(depth - 1)) if r.random() < 0.5 else Sum(self.ty(depth - 1), VOID)

    def name(self) -> str:
        return self.rng.choice(self.names)

    # -- values --------------------------------------------------------------

    def vars_of(self, ctx: Ctx, ty: Ty) -> list[str]:
        seen, out = set(), []
        for x, t in reversed(ctx.bindings):
            if x in seen:
                continue
            seen.add(x)
            if ty_alpha_eq(t, ty):
                out.append(x)
        return out

    def val(self, ctx: Ctx, ty: Ty, depth: int = 3) -> Val:
        r = self.rng
        cands = self.vars_of(ctx, ty)
        if cands and r.random() < 0.5:
            return Var(r.choice(cands))
        match ty:
            case Real():
                return ConstR(r.choice(CONSTANTS))
            case Unit():
                return UnitV()
            case Sum(a, b):
                go_left = self._prefer_left(a, b, depth)
                side = a if go_left else b
                cls = Inl if go_left else Inr
                return cls(self.val(ctx, side, depth - 1), ty)
            case Prod(a, b):
                return Pair(self.val(ctx, a, depth - 1), self.val(ctx, b, depth - 1))
            case Arrow(a, b):
                x = self.name()
                return Lam(x, a, self.comp(ctx.extend(x, a), b, depth - 1))
            case Mu():
                return Roll(self.val(ctx, unfold(ty), depth - 1), ty)
            case Void():
                if cands:
                    return Var(r.choice(cands))
        raise ValueError(f"cannot build a closed value of {ty!r}")

    def _prefer_left(self, a: Ty, b: Ty, depth: int) -> bool:
        if isinstance(a, Void):
            return False
        if isinstance(b, Void):
            return True
        if depth <= 0:
            return _size(a) <= _size(b)
        return self.rng.random() < 0.5

    # -- computations --------------------------------------------------------

    def comp(self, ctx: Ctx, ty: Ty, depth: int = 4) -> Comp:
        r = self.rng
        if depth <= 0:
            return Return(self.val(ctx, ty, 0))
        forms = ["return", "bind", "bind", "case-sum", "case-pair", "case-unit", "app", "unroll", "iterate"]
        if isinstance(ty, Real):
            forms += ["op", "op", "op"]
        if ty_alpha_eq(ty, BOOL):
            forms += ["sign", "sign"]
        if self.vars_of(ctx, VOID):
            forms += ["absurd", "absurd"]
        k = r.choice(forms)
        d = depth - 1
        match k:
            case "return":
                return Return(self.val(ctx, ty, d))
            case "bind":
                x = self.name()
                s = BOOL if r.random() < 0.25 else self.ty(1)
                return Bind(x, self.comp(ctx, s, d), self.comp(ctx.extend(x, s), ty, d))
            case "case-sum":
                s = Sum(VOID, self.ty(1)) if r.random() < 0.15 else Sum(self.ty(1), self.ty(1))
                x, y = self.name(), self.name()
                return CaseSum(
                    self.val(ctx, s, d),
                    x,
                    self.comp(ctx.extend(x, s.left), ty, d),
                    y,
                    self.comp(ctx.extend(y, s.right), ty, d),
                )
            case "case-pair":
                s = Prod(self.ty(1), self.ty(1))
                x, y = self.name(), self.name()
                return CasePair(self.val(ctx, s, d), x, y, self.comp(ctx.extend(x, s.left).extend(y, s.right), ty, d))
            case "case-unit":
                return CaseUnit(self.val(ctx, UNIT, d), self.comp(ctx, ty, d))
            case "app":
                s = self.ty(1)
                return App(self.val(ctx, Arrow(s, ty), d), self.val(ctx, s, d))
            case "unroll":
                x = self.name()
                return CaseRoll(self.val(ctx, LIST, d), x, self.comp(ctx.extend(x, unfold(LIST)), ty, d))
            case "iterate":
                s, x = self.ty(1), self.name()
                return Iterate(self.comp(ctx.extend(x, s), Sum(s, ty), d), x, self.val(ctx, s, d))
            case "op":
                name = r.choice(ops.SURFACE_OPS + ("const_2.5",))
                arity = ops.lookup(name).arity
                return PrimOp(name, tuple(self.val(ctx, REAL, d) for _ in range(arity)))
            case "sign":
                return Sign(self.val(ctx, REAL, d))
            case "absurd":
                return CaseVoid(Var(r.choice(self.vars_of(ctx, VOID))), ty)
        raise AssertionError(k)


def _size(ty: Ty) -> int:
    match ty:
        case Sum(a, b) | Prod(a, b) | Arrow(a, b):
            return 1 + _size(a) + _size(b)
        case Mu(_, body):
            return 10 + _size(body)
        case Void():
            return 100
    return 1


def open_context(gen: Gen, n: int = 3) -> Ctx:
    """A context binding some of the pool names (later entries shadow)."""
    return Ctx(tuple((gen.name(), gen.ty(1)) for _ in range(n)))


@dataclass(frozen=True)
class Sample:
    ctx: Ctx
    term: Comp
    ty: Ty


def well_typed(seed: int, max_depth: int = 8) -> Sample:
    """A random well-typed computation of depth at most ``max_depth``."""
    gen = Gen(seed)
    while True:
        ctx = open_context(gen, gen.rng.randint(0, 3))
        ty = gen.ty(2)
        term = gen.comp(ctx, ty, gen.rng.randint(1, max(1, max_depth - 2)))
        if term_depth(term) <= max_depth:
            return Sample(ctx, term, ty)


@dataclass(frozen=True)
class SubstCase:
    ctx: Ctx
    term: Comp
    var: str
    value: Val


def subst_case(seed: int) -> SubstCase:
    """A term with ``var`` free and a value of ``var``'s type, in a shared context.

    The value's free variables come from the same small name pool as the
    term's binders, so substitution often has to rename.
    """
    gen = Gen(seed)
    ctx = open_context(gen, gen.rng.randint(1, 3))
    x, s = gen.name(), gen.ty(1)
    inner = ctx.extend(x, s)
    term = gen.comp(inner, gen.ty(2), gen.rng.randint(1, 5))
    return SubstCase(inner, term, x, gen.val(ctx, s, 3))


# -- beta-law instances -----------------------------------------------------


@dataclass(frozen=True)
class LawInstance:
    law: str
    lhs: Comp
    rhs: Comp
    ty: Ty


LAWS = ("let-return", "case-inl", "case-inr", "case-pair", "case-unit", "app", "unroll", "let-assoc", "let-eta")


def law_instance(seed: int, law: str | None = None) -> LawInstance:
    """A closed instance of one of the equational laws, both sides of type ``ty``."""
    gen = Gen(seed, first_order_only=False)
    r = gen.rng
    law = law or r.choice(LAWS)
    ty = gen.ty(1)
    empty = Ctx()
    s = gen.ty(1)
    x, y = gen.name(), gen.name()
    depth = r.randint(1, 4)
    match law:
        case "let-return":
            v = gen.val(empty, s, 2)
            t = gen.comp(empty.extend(x, s), ty, depth)
            return LawInstance(law, Bind(x, Return(v), t), subst_many(t, {x: v}), ty)
        case "case-inl" | "case-inr":
            s2 = gen.ty(1)
            left = law == "case-inl"
            v = gen.val(empty, s if left else s2, 2)
            l = gen.comp(empty.extend(x, s), ty, depth)
            rr = gen.comp(empty.extend(y, s2), ty, depth)
            scrut = Inl(v, Sum(s, s2)) if left else Inr(v, Sum(s, s2))
            rhs = subst_many(l, {x: v}) if left else subst_many(rr, {y: v})
            return LawInstance(law, CaseSum(scrut, x, l, y, rr), rhs, ty)
        case "case-pair":
            s2 = gen.ty(1)
            if x == y:
                y = x + "2"
            v, w = gen.val(empty, s, 2), gen.val(empty, s2, 2)
            t = gen.comp(empty.extend(x, s).extend(y, s2), ty, depth)
            return LawInstance(law, CasePair(Pair(v, w), x, y, t), subst_many(t, {x: v, y: w}), ty)
        case "case-unit":
            t = gen.comp(empty, ty, depth)
            return LawInstance(law, CaseUnit(UnitV(), t), t, ty)
        case "app":
            v = gen.val(empty, s, 2)
            t = gen.comp(empty.extend(x, s), ty, depth)
            return LawInstance(law, App(Lam(x, s, t), v), subst_many(t, {x: v}), ty)
        case "unroll":
            v = gen.val(empty, unfold(LIST), 3)
            t = gen.comp(empty.extend(x, unfold(LIST)), ty, depth)
            return LawInstance(law, CaseRoll(Roll(v, LIST), x, t), subst_many(t, {x: v}), ty)
        case "let-assoc":
            s2 = gen.ty(1)
            t = gen.comp(empty, s, depth)
            u_body = gen.comp(empty.extend(y, s), s2, depth)
            rest = gen.comp(empty.extend(x, s2), ty, depth)
            # rest is closed apart from x, so y cannot be captured by the re-association
            lhs = Bind(x, Bind(y, t, u_body), rest)
            rhs = Bind(y, t, Bind(x, u_body, rest))
            return LawInstance(law, lhs, rhs, ty)
        case "let-eta":
            t = gen.comp(empty, ty, depth)
            return LawInstance(law, Bind(x, t, Return(Var(x))), t, ty)
    raise ValueError(f"unknown law {law}")
