"""Forward-mode AD as a structure-preserving source transformation.

On types, ``real`` becomes ``real * real`` (primal, tangent) and every other
constructor is mapped homomorphically, including ``mu`` types.  On terms the
transformation is homomorphic except at three places:

* a real literal ``c`` becomes the pair ``(c, 0.0)``;
* ``op(v1, ..., vn)`` splits each argument into primal ``xi`` and tangent
  ``xi'``, evaluates ``y <- op(x1..xn)`` and ``zi <- di op(x1..xn)`` left to right,
  and returns ``(y, x1' * z1 + ... + xn' * zn)`` summed left-associated;
* ``sign v`` branches on the primal component of ``v`` only.

The fresh names it introduces come from one counter per call, so output is
stable for a given input.
"""

from __future__ import annotations

from . import ops
from . import surface as S
from .elaborate import Program
from .syntax import (
    REAL,
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
    Term,
    TVar,
    Ty,
    Unit,
    UnitV,
    Val,
    Var,
    Void,
    all_names,
    subst_many,
)
from .typecheck import Ctx

ZERO = ConstR(0.0)


def d_type(ty: Ty) -> Ty:
    match ty:
        case Real():
            return Prod(REAL, REAL)
        case Unit() | Void() | TVar():
            return ty
        case Sum(a, b):
            return Sum(d_type(a), d_type(b))
        case Prod(a, b):
            return Prod(d_type(a), d_type(b))
        case Arrow(a, b):
            return Arrow(d_type(a), d_type(b))
        case Mu(a, body):
            return Mu(a, d_type(body))
    raise TypeError(f"not a type: {ty!r}")


def d_ctx(ctx: Ctx) -> Ctx:
    return Ctx(tuple((x, d_type(ty)) for x, ty in ctx.bindings), ctx.tvars)


class _Macro:
    def __init__(self, supply: NameSupply):
        self.supply = supply

    def val(self, v: Val) -> Val:
        sp = v.span
        match v:
            case Var():
                return v
            case ConstR():
                return Pair(v, ZERO, span=sp)
            case UnitV():
                return v
            case Inl(p, ty):
                return Inl(self.val(p), d_type(ty), span=sp)
            case Inr(p, ty):
                return Inr(self.val(p), d_type(ty), span=sp)
            case Roll(p, ty):
                return Roll(self.val(p), d_type(ty), span=sp)
            case Pair(a, b):
                return Pair(self.val(a), self.val(b), span=sp)
            case Lam(x, ty, body):
                return Lam(x, d_type(ty), self.comp(body), span=sp)
        raise TypeError(f"not a value: {v!r}")

    def comp(self, t: Comp) -> Comp:
        sp = t.span
        match t:
            case Return(v):
                return Return(self.val(v), span=sp)
            case Bind(x, first, rest):
                return Bind(x, self.comp(first), self.comp(rest), span=sp)
            case CaseVoid(v, ty):
                return CaseVoid(self.val(v), d_type(ty), span=sp)
            case CaseSum(v, x, left, y, right):
                return CaseSum(self.val(v), x, self.comp(left), y, self.comp(right), span=sp)
            case CaseUnit(v, body):
                return CaseUnit(self.val(v), self.comp(body), span=sp)
            case CasePair(v, x, y, body):
                return CasePair(self.val(v), x, y, self.comp(body), span=sp)
            case App(f, a):
                return App(self.val(f), self.val(a), span=sp)
            case PrimOp(op, args):
                return self.op_rule(op, [self.val(a) for a in args], sp)
            case Sign(v):
                x, dx = self.supply.fresh("x"), self.supply.fresh("dx")
                return CasePair(self.val(v), x, dx, Sign(Var(x), span=sp), span=sp)
            case Iterate(body, x, start):
                return Iterate(self.comp(body), x, self.val(start), span=sp)
            case CaseRoll(v, x, body):
                return CaseRoll(self.val(v), x, self.comp(body), span=sp)
        raise TypeError(f"not a computation: {t!r}")

    def op_rule(self, op: str, dargs: list[Val], sp=None) -> Comp:
        fresh = self.supply.fresh
        n = len(dargs)
        xs = [fresh("x") for _ in range(n)]
        dxs = [fresh("dx") for _ in range(n)]
        y = fresh("y")
        zs = [fresh("z") for _ in range(n)]
        inst = {ops.param(i + 1): Var(xs[i]) for i in range(n)}
        partials = [subst_many(ops.op_partial(op, i + 1), inst) for i in range(n)]

        # tangent: w1 <- dx1 * z1; ...; s2 <- w1 + w2; ...
        tail: list[tuple[str, Comp]] = []
        acc: Val | None = None
        for dx, z in zip(dxs, zs):
            w = fresh("w")
            tail.append((w, PrimOp("mul", (Var(dx), Var(z)))))
            if acc is None:
                acc = Var(w)
            else:
                s = fresh("s")
                tail.append((s, PrimOp("add", (acc, Var(w)))))
                acc = Var(s)
        out: Comp = Return(Pair(Var(y), acc if acc is not None else ZERO), span=sp)
        for name, c in reversed(tail):
            out = Bind(name, c, out)
        for z, p in reversed(list(zip(zs, partials))):
            out = Bind(z, p, out)
        out = Bind(y, PrimOp(op, tuple(Var(x) for x in xs), span=sp), out)
        for dv, x, dx in reversed(list(zip(dargs, xs, dxs))):
            out = CasePair(dv, x, dx, out, span=sp)
        return out


def _supply(t: Term, extra=()) -> NameSupply:
    return NameSupply(all_names(t) | set(extra))


def d_val(v: Val, supply: NameSupply | None = None) -> Val:
    return _Macro(supply or _supply(v)).val(v)


def d_comp(t: Comp, supply: NameSupply | None = None) -> Comp:
    return _Macro(supply or _supply(t)).comp(t)


def d_program(p: Program, *, simplify: bool = False) -> Program:
    """Differentiate a whole program; parameters and result go through ``d_type``."""
    supply = _supply(p.body, [x for x, _ in p.params])
    body = d_comp(p.body, supply)
    if simplify:
        body = beta_simplify(body)
    return Program(tuple((x, d_type(ty)) for x, ty in p.params), d_type(p.returns), body)


def beta_simplify(t: Term) -> Term:
    """Contract every ``x <- return v; s`` to ``s[v/x]``, bottom-up, in one pass."""
    match t:
        case Var() | ConstR() | UnitV():
            return t
        case Inl(v, ty):
            return Inl(beta_simplify(v), ty)
        case Inr(v, ty):
            return Inr(beta_simplify(v), ty)
        case Roll(v, ty):
            return Roll(beta_simplify(v), ty)
        case Pair(a, b):
            return Pair(beta_simplify(a), beta_simplify(b))
        case Lam(x, ty, body):
            return Lam(x, ty, beta_simplify(body))
        case Return(v):
            return Return(beta_simplify(v))
        case Bind(x, first, rest):
            first, rest = beta_simplify(first), beta_simplify(rest)
            if isinstance(first, Return):
                return subst_many(rest, {x: first.value})
            return Bind(x, first, rest)
        case CaseVoid(v, ty):
            return CaseVoid(beta_simplify(v), ty)
        case CaseSum(v, x, l, y, r):
            return CaseSum(beta_simplify(v), x, beta_simplify(l), y, beta_simplify(r))
        case CaseUnit(v, body):
            return CaseUnit(beta_simplify(v), beta_simplify(body))
        case CasePair(v, x, y, body):
            return CasePair(beta_simplify(v), x, y, beta_simplify(body))
        case App(f, a):
            return App(beta_simplify(f), beta_simplify(a))
        case PrimOp(op, args):
            return PrimOp(op, tuple(beta_simplify(a) for a in args))
        case Sign(v):
            return Sign(beta_simplify(v))
        case Iterate(body, x, start):
            return Iterate(beta_simplify(body), x, beta_simplify(start))
        case CaseRoll(v, x, body):
            return CaseRoll(beta_simplify(v), x, beta_simplify(body))
    raise TypeError(f"not a term: {t!r}")


# -- the same macro on coarse-grain surface terms ---------------------------


def d_surface(t: S.STerm, supply: NameSupply | None = None) -> S.STerm:
    """Forward AD directly on surface terms.

    Elaborating the result agrees with differentiating the elaboration, up to
    let-return contraction and renaming.  Operation and sign arguments are
    let-bound before they are split, and the comparison and conditional sugar
    is expanded before differentiating.
    """
    from .pretty import core_to_surface

    supply = supply or NameSupply(S.surface_names(t))
    fresh = supply.fresh

    def d(u: S.STerm) -> S.STerm:
        match u:
            case S.SVar() | S.SUnit():
                return u
            case S.SLit():
                return S.SPair(u, S.SLit(0.0))
            case S.SPair(a, b):
                return S.SPair(d(a), d(b))
            case S.SInl(v, ty):
                return S.SInl(d(v), d_type(ty))
            case S.SInr(v, ty):
                return S.SInr(d(v), d_type(ty))
            case S.SRoll(v, ty):
                return S.SRoll(d(v), d_type(ty))
            case S.SFun(x, ty, body):
                return S.SFun(x, d_type(ty), d(body))
            case S.SOp(op, args):
                us = [fresh("u") for _ in args]
                xs = [fresh("x") for _ in args]
                dxs = [fresh("dx") for _ in args]
                y = fresh("y")
                inst = {ops.param(i + 1): Var(x) for i, x in enumerate(xs)}
                parts = [core_to_surface(subst_many(ops.op_partial(op, i + 1), inst)) for i in range(len(args))]
                lets: list[tuple[str, S.STerm]] = [(y, S.SOp(op, tuple(S.SVar(x) for x in xs)))]
                zs = [fresh("z") for _ in args]
                lets += list(zip(zs, parts))
                acc: S.STerm | None = None
                for dx, z in zip(dxs, zs):
                    w = fresh("w")
                    lets.append((w, S.SOp("mul", (S.SVar(dx), S.SVar(z)))))
                    if acc is None:
                        acc = S.SVar(w)
                    else:
                        s = fresh("s")
                        lets.append((s, S.SOp("add", (acc, S.SVar(w)))))
                        acc = S.SVar(s)
                out: S.STerm = S.SPair(S.SVar(y), acc if acc is not None else S.SLit(0.0))
                for name, b in reversed(lets):
                    out = S.SLet(name, b, out)
                for u_, x, dx in reversed(list(zip(us, xs, dxs))):
                    out = S.SCasePair(S.SVar(u_), x, dx, out)
                for u_, a in reversed(list(zip(us, args))):
                    out = S.SLet(u_, d(a), out)
                return out
            case S.SSign(v):
                u_, x, dx = fresh("u"), fresh("x"), fresh("dx")
                return S.SLet(u_, d(v), S.SCasePair(S.SVar(u_), x, dx, S.SSign(S.SVar(x))))
            case S.SApp(f, a):
                return S.SApp(d(f), d(a))
            case S.SLet(x, b, body):
                return S.SLet(x, d(b), d(body))
            case S.SIf(c, a, b):
                return S.SIf(d(c), d(a), d(b))
            case S.SIfPos(c, a, b):
                return S.SIf(d(S.SSign(c)), d(a), d(b))
            case S.SLess(a, b):
                l, r = fresh("l"), fresh("r")
                return d(S.SLet(l, a, S.SLet(r, b, S.SSign(S.SOp("sub", (S.SVar(r), S.SVar(l)))))))
            case S.SCaseSum(v, x, l, y, r):
                return S.SCaseSum(d(v), x, d(l), y, d(r))
            case S.SCasePair(v, x, y, body):
                return S.SCasePair(d(v), x, y, d(body))
            case S.SCaseUnit(v, body):
                return S.SCaseUnit(d(v), d(body))
            case S.SAbsurd(v, ty):
                return S.SAbsurd(d(v), d_type(ty))
            case S.SIterate(body, x, start):
                return S.SIterate(d(body), x, d(start))
            case S.SUnroll(v, x, body):
                return S.SUnroll(d(v), x, d(body))
            case S.SRec(f, ty, body):
                return S.SRec(f, d_type(ty), d(body))
        raise TypeError(f"not a surface term: {u!r}")

    return d(t)
