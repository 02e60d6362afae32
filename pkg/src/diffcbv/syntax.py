"""Abstract syntax of the fine-grain call-by-value core.

Three syntactic classes: types (``Ty``), values (``Val``) and computations
(``Comp``).  All nodes are frozen dataclasses; the optional ``span`` on values
and computations points back into surface source and never takes part in
equality.

Substitution is simultaneous and capture-avoiding.  Bound variables that would
capture a free variable of the substituted value are renamed by appending
primes (``y`` becomes ``y'``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


class Ty:
    __slots__ = ()


@dataclass(frozen=True)
class Real(Ty):
    pass


@dataclass(frozen=True)
class Unit(Ty):
    pass


@dataclass(frozen=True)
class Void(Ty):
    pass


@dataclass(frozen=True)
class Sum(Ty):
    left: Ty
    right: Ty


@dataclass(frozen=True)
class Prod(Ty):
    left: Ty
    right: Ty


@dataclass(frozen=True)
class Arrow(Ty):
    domain: Ty
    codomain: Ty


@dataclass(frozen=True)
class TVar(Ty):
    name: str


@dataclass(frozen=True)
class Mu(Ty):
    binder: str
    body: Ty


REAL = Real()
UNIT = Unit()
VOID = Void()
BOOL = Sum(UNIT, UNIT)


# ---------------------------------------------------------------------------
# Values and computations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Node:
    span: Span | None = field(default=None, compare=False, repr=False, kw_only=True)


class Val(_Node):
    pass


class Comp(_Node):
    pass


@dataclass(frozen=True)
class Var(Val):
    name: str


@dataclass(frozen=True)
class ConstR(Val):
    value: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ValueError(f"real constant must be finite, got {self.value!r}")


@dataclass(frozen=True)
class Inl(Val):
    payload: Val
    ty: Ty


@dataclass(frozen=True)
class Inr(Val):
    payload: Val
    ty: Ty


@dataclass(frozen=True)
class UnitV(Val):
    pass


@dataclass(frozen=True)
class Pair(Val):
    first: Val
    second: Val


@dataclass(frozen=True)
class Lam(Val):
    param: str
    param_ty: Ty
    body: Comp


@dataclass(frozen=True)
class Roll(Val):
    payload: Val
    ty: Ty


@dataclass(frozen=True)
class Return(Comp):
    value: Val


@dataclass(frozen=True)
class Bind(Comp):
    name: str
    first: Comp
    rest: Comp


@dataclass(frozen=True)
class CaseVoid(Comp):
    scrutinee: Val
    ty: Ty


@dataclass(frozen=True)
class CaseSum(Comp):
    scrutinee: Val
    left_name: str
    left: Comp
    right_name: str
    right: Comp


@dataclass(frozen=True)
class CaseUnit(Comp):
    scrutinee: Val
    body: Comp


@dataclass(frozen=True)
class CasePair(Comp):
    scrutinee: Val
    first_name: str
    second_name: str
    body: Comp


@dataclass(frozen=True)
class App(Comp):
    fn: Val
    arg: Val


@dataclass(frozen=True)
class PrimOp(Comp):
    op: str
    args: tuple[Val, ...]


@dataclass(frozen=True)
class Sign(Comp):
    arg: Val


@dataclass(frozen=True)
class Iterate(Comp):
    body: Comp
    var: str
    start: Val


@dataclass(frozen=True)
class CaseRoll(Comp):
    scrutinee: Val
    name: str
    body: Comp


Term = Val | Comp


# ---------------------------------------------------------------------------
# Type operations
# ---------------------------------------------------------------------------


def free_tvars(ty: Ty) -> frozenset[str]:
    match ty:
        case TVar(name):
            return frozenset((name,))
        case Mu(a, body):
            return free_tvars(body) - {a}
        case Sum(l, r) | Prod(l, r) | Arrow(l, r):
            return free_tvars(l) | free_tvars(r)
        case _:
            return frozenset()


def _type_names(ty: Ty, acc: set[str]) -> None:
    match ty:
        case TVar(name):
            acc.add(name)
        case Mu(a, body):
            acc.add(a)
            _type_names(body, acc)
        case Sum(l, r) | Prod(l, r) | Arrow(l, r):
            _type_names(l, acc)
            _type_names(r, acc)


def subst_ty(ty: Ty, a: str, rep: Ty) -> Ty:
    """Capture-avoiding ``ty[rep/a]`` on type variables."""
    match ty:
        case TVar(name):
            return rep if name == a else ty
        case Sum(l, r):
            return Sum(subst_ty(l, a, rep), subst_ty(r, a, rep))
        case Prod(l, r):
            return Prod(subst_ty(l, a, rep), subst_ty(r, a, rep))
        case Arrow(l, r):
            return Arrow(subst_ty(l, a, rep), subst_ty(r, a, rep))
        case Mu(b, body):
            if b == a or a not in free_tvars(body):
                return ty
            fv = free_tvars(rep)
            if b in fv:
                avoid = set(fv) | free_tvars(body) | {a}
                b2 = _prime(b, avoid)
                body = subst_ty(body, b, TVar(b2))
                b = b2
            return Mu(b, subst_ty(body, a, rep))
        case _:
            return ty


def unfold(mu: Mu) -> Ty:
    """One-step unfolding ``body[mu/binder]`` of an iso-recursive type."""
    return subst_ty(mu.body, mu.binder, mu)


def ty_alpha_eq(a: Ty, b: Ty) -> bool:
    return _ty_eq(a, b, {}, {}, 0)


def _ty_eq(a: Ty, b: Ty, ea: dict[str, int], eb: dict[str, int], depth: int) -> bool:
    match a, b:
        case TVar(x), TVar(y):
            ix, iy = ea.get(x), eb.get(y)
            if ix is None and iy is None:
                return x == y
            return ix == iy
        case Mu(x, ba), Mu(y, bb):
            return _ty_eq(ba, bb, {**ea, x: depth}, {**eb, y: depth}, depth + 1)
        case (
            (Sum(l1, r1), Sum(l2, r2))
            | (Prod(l1, r1), Prod(l2, r2))
            | (
                Arrow(l1, r1),
                Arrow(l2, r2),
            )
        ):
            if type(a) is not type(b):
                return False
            return _ty_eq(l1, l2, ea, eb, depth) and _ty_eq(r1, r2, ea, eb, depth)
        case _:
            return type(a) is type(b) and type(a) in (Real, Unit, Void)


def is_first_order(ty: Ty) -> bool:
    match ty:
        case Arrow():
            return False
        case Sum(l, r) | Prod(l, r):
            return is_first_order(l) and is_first_order(r)
        case Mu(_, body):
            return is_first_order(body)
        case _:
            return True


def contains_real(ty: Ty) -> bool:
    match ty:
        case Real():
            return True
        case Sum(l, r) | Prod(l, r) | Arrow(l, r):
            return contains_real(l) or contains_real(r)
        case Mu(_, body):
            return contains_real(body)
        case _:
            return False


# ---------------------------------------------------------------------------
# Names
# ---------------------------------------------------------------------------


def _prime(name: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    cand = name + "'"
    while cand in avoid:
        cand += "'"
    return cand


class NameSupply:
    """Deterministic fresh names: ``base`` followed by a pass-wide counter.

    Names already present in ``avoid`` are skipped, so generated names never
    collide with identifiers of the input.
    """

    def __init__(self, avoid: Iterable[str] = ()):
        self.avoid = set(avoid)
        self.counter = 0

    def fresh(self, base: str = "x") -> str:
        while True:
            self.counter += 1
            cand = f"{base}{self.counter}"
            if cand not in self.avoid:
                self.avoid.add(cand)
                return cand


def free_vars(t: Term) -> frozenset[str]:
    """Free term variables; memoised on each (immutable) node."""
    cached = t.__dict__.get("_fv")
    if cached is not None:
        return cached
    out = _fv(t)
    object.__setattr__(t, "_fv", out)
    return out


_NONE: frozenset[str] = frozenset()


def _fv(t: Term) -> frozenset[str]:
    fv = free_vars
    match t:
        case Var(name):
            return frozenset((name,))
        case ConstR() | UnitV():
            return _NONE
        case Inl(v, _) | Inr(v, _) | Roll(v, _) | Return(v) | Sign(v) | CaseVoid(v, _):
            return fv(v)
        case Pair(a, b) | App(a, b):
            return fv(a) | fv(b)
        case Lam(x, _, body):
            return fv(body) - {x}
        case Bind(x, first, rest):
            return fv(first) | (fv(rest) - {x})
        case CaseSum(v, x, l, y, r):
            return fv(v) | (fv(l) - {x}) | (fv(r) - {y})
        case CaseUnit(v, body):
            return fv(v) | fv(body)
        case CasePair(v, x, y, body):
            return fv(v) | (fv(body) - {x, y})
        case PrimOp(_, args):
            return frozenset().union(*(fv(a) for a in args))
        case Iterate(body, x, start):
            return fv(start) | (fv(body) - {x})
        case CaseRoll(v, x, body):
            return fv(v) | (fv(body) - {x})
    raise TypeError(f"not a term: {t!r}")


def all_names(t: Term) -> set[str]:
    """Every term and type identifier occurring anywhere in ``t``."""
    acc: set[str] = set()
    for node in walk(t):
        match node:
            case Var(name):
                acc.add(name)
            case Lam(x, ty, _):
                acc.add(x)
                _type_names(ty, acc)
            case Inl(_, ty) | Inr(_, ty) | Roll(_, ty) | CaseVoid(_, ty):
                _type_names(ty, acc)
            case Bind(x, _, _) | Iterate(_, x, _) | CaseRoll(_, x, _):
                acc.add(x)
            case CaseSum(_, x, _, y, _) | CasePair(_, x, y, _):
                acc.add(x)
                acc.add(y)
    return acc


def children(t: Term) -> tuple[Term, ...]:
    match t:
        case Var() | ConstR() | UnitV():
            return ()
        case Inl(v, _) | Inr(v, _) | Roll(v, _) | Return(v) | Sign(v) | CaseVoid(v, _):
            return (v,)
        case Pair(a, b) | App(a, b):
            return (a, b)
        case Lam(_, _, body):
            return (body,)
        case Bind(_, first, rest):
            return (first, rest)
        case CaseSum(v, _, l, _, r):
            return (v, l, r)
        case CaseUnit(v, body) | CasePair(v, _, _, body) | CaseRoll(v, _, body):
            return (v, body)
        case PrimOp(_, args):
            return tuple(args)
        case Iterate(body, _, start):
            return (start, body)
    raise TypeError(f"not a term: {t!r}")


def walk(t: Term):
    """Pre-order iterator over all value and computation nodes."""
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def term_depth(t: Term) -> int:
    kids = children(t)
    return 1 + max((term_depth(k) for k in kids), default=0)


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------


def subst_val(v: Val, x: str, w: Val) -> Val:
    return subst_many(v, {x: w})


def subst_comp(t: Comp, x: str, w: Val) -> Comp:
    return subst_many(t, {x: w})


def subst_many(t: Term, sub: Mapping[str, Val]):
    """Simultaneous capture-avoiding substitution of values for variables."""
    if not sub:
        return t
    fvs = {k: free_vars(w) for k, w in sub.items()}
    return _subst(t, dict(sub), fvs)


def _subst(t: Term, sub: dict, fvs: dict):
    if free_vars(t).isdisjoint(sub):
        return t
    match t:
        case Var(name):
            return sub.get(name, t)
        case ConstR() | UnitV():
            return t
        case Inl(v, ty):
            return Inl(_subst(v, sub, fvs), ty)
        case Inr(v, ty):
            return Inr(_subst(v, sub, fvs), ty)
        case Roll(v, ty):
            return Roll(_subst(v, sub, fvs), ty)
        case Pair(a, b):
            return Pair(_subst(a, sub, fvs), _subst(b, sub, fvs))
        case Lam(x, ty, body):
            (x,), body = _under((x,), body, sub, fvs)
            return Lam(x, ty, body)
        case Return(v):
            return Return(_subst(v, sub, fvs))
        case Bind(x, first, rest):
            first = _subst(first, sub, fvs)
            (x,), rest = _under((x,), rest, sub, fvs)
            return Bind(x, first, rest)
        case CaseVoid(v, ty):
            return CaseVoid(_subst(v, sub, fvs), ty)
        case CaseSum(v, x, l, y, r):
            v = _subst(v, sub, fvs)
            (x,), l = _under((x,), l, sub, fvs)
            (y,), r = _under((y,), r, sub, fvs)
            return CaseSum(v, x, l, y, r)
        case CaseUnit(v, body):
            return CaseUnit(_subst(v, sub, fvs), _subst(body, sub, fvs))
        case CasePair(v, x, y, body):
            v = _subst(v, sub, fvs)
            (x, y), body = _under((x, y), body, sub, fvs)
            return CasePair(v, x, y, body)
        case App(f, a):
            return App(_subst(f, sub, fvs), _subst(a, sub, fvs))
        case PrimOp(op, args):
            return PrimOp(op, tuple(_subst(a, sub, fvs) for a in args))
        case Sign(v):
            return Sign(_subst(v, sub, fvs))
        case Iterate(body, x, start):
            start = _subst(start, sub, fvs)
            (x,), body = _under((x,), body, sub, fvs)
            return Iterate(body, x, start)
        case CaseRoll(v, x, body):
            v = _subst(v, sub, fvs)
            (x,), body = _under((x,), body, sub, fvs)
            return CaseRoll(v, x, body)
    raise TypeError(f"not a term: {t!r}")


def _under(names: tuple[str, ...], body: Term, sub: dict, fvs: dict):
    inner = {k: w for k, w in sub.items() if k not in names}
    if not inner:
        return names, body
    danger: set[str] = set()
    for k in inner:
        danger |= fvs[k]
    if danger.isdisjoint(names):
        return names, _subst(body, inner, fvs)
    avoid = danger | set(inner) | free_vars(body) | set(names)
    fvs = dict(fvs)
    out = []
    for i, n in enumerate(names):
        if n in danger and n not in names[i + 1 :]:
            n2 = _prime(n, avoid)
            avoid.add(n2)
            inner[n] = Var(n2)
            fvs[n] = frozenset((n2,))
            out.append(n2)
        else:
            out.append(n)
    return tuple(out), _subst(body, inner, fvs)


# ---------------------------------------------------------------------------
# Alpha-equivalence
# ---------------------------------------------------------------------------


def alpha_eq(a: Term | Ty, b: Term | Ty) -> bool:
    """Equality up to consistent renaming of bound term and type variables."""
    if isinstance(a, Ty) or isinstance(b, Ty):
        return isinstance(a, Ty) and isinstance(b, Ty) and ty_alpha_eq(a, b)
    return _aeq(a, b, {}, {}, 0)


def _aeq(a: Term, b: Term, ea: dict, eb: dict, d: int) -> bool:
    if type(a) is not type(b):
        return False
    match a, b:
        case Var(x), Var(y):
            ix, iy = ea.get(x), eb.get(y)
            if ix is None and iy is None:
                return x == y
            return ix == iy
        case ConstR(c1), ConstR(c2):
            return c1 == c2
        case UnitV(), UnitV():
            return True
        case (Inl(v1, t1), Inl(v2, t2)) | (Inr(v1, t1), Inr(v2, t2)) | (Roll(v1, t1), Roll(v2, t2)):
            return ty_alpha_eq(t1, t2) and _aeq(v1, v2, ea, eb, d)
        case (Pair(a1, b1), Pair(a2, b2)) | (App(a1, b1), App(a2, b2)):
            return _aeq(a1, a2, ea, eb, d) and _aeq(b1, b2, ea, eb, d)
        case Lam(x, t1, body1), Lam(y, t2, body2):
            return ty_alpha_eq(t1, t2) and _aeq(body1, body2, {**ea, x: d}, {**eb, y: d}, d + 1)
        case (Return(v1), Return(v2)) | (Sign(v1), Sign(v2)):
            return _aeq(v1, v2, ea, eb, d)
        case Bind(x, f1, r1), Bind(y, f2, r2):
            return _aeq(f1, f2, ea, eb, d) and _aeq(r1, r2, {**ea, x: d}, {**eb, y: d}, d + 1)
        case CaseVoid(v1, t1), CaseVoid(v2, t2):
            return ty_alpha_eq(t1, t2) and _aeq(v1, v2, ea, eb, d)
        case CaseSum(v1, x1, l1, y1, r1), CaseSum(v2, x2, l2, y2, r2):
            return (
                _aeq(v1, v2, ea, eb, d)
                and _aeq(l1, l2, {**ea, x1: d}, {**eb, x2: d}, d + 1)
                and _aeq(r1, r2, {**ea, y1: d}, {**eb, y2: d}, d + 1)
            )
        case CaseUnit(v1, b1), CaseUnit(v2, b2):
            return _aeq(v1, v2, ea, eb, d) and _aeq(b1, b2, ea, eb, d)
        case CasePair(v1, x1, y1, b1), CasePair(v2, x2, y2, b2):
            return _aeq(v1, v2, ea, eb, d) and _aeq(b1, b2, {**ea, x1: d, y1: d + 1}, {**eb, x2: d, y2: d + 1}, d + 2)
        case PrimOp(o1, args1), PrimOp(o2, args2):
            return o1 == o2 and len(args1) == len(args2) and all(_aeq(p, q, ea, eb, d) for p, q in zip(args1, args2))
        case Iterate(b1, x1, s1), Iterate(b2, x2, s2):
            return _aeq(s1, s2, ea, eb, d) and _aeq(b1, b2, {**ea, x1: d}, {**eb, x2: d}, d + 1)
        case CaseRoll(v1, x1, b1), CaseRoll(v2, x2, b2):
            return _aeq(v1, v2, ea, eb, d) and _aeq(b1, b2, {**ea, x1: d}, {**eb, x2: d}, d + 1)
    return False
