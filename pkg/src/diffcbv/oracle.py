"""Checking AD output against finite differences.

A closed value of a first-order type is determined by its *shape* (the
constructor skeleton: sum tags, pairs, units, rolls) and the vector of its
real leaves read left to right.  Values of ``d_type(ty)`` have the same
shape with every leaf doubled into ``(primal, tangent)``; ``seed`` and
``tangent_decompose`` convert between the two views.

``finite_diff`` estimates a directional derivative with central differences
at three step sizes and Richardson extrapolation; ``grad_check`` runs a
program and its derivative and compares the two.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .ad import d_type
from .elaborate import Program
from .interp import Budget, DEFAULT_BUDGET, Outcome, Value, apply_program
from .syntax import (
    ConstR,
    Inl,
    Inr,
    Mu,
    Pair,
    Prod,
    Real,
    Roll,
    Sum,
    Ty,
    Unit,
    UnitV,
    Val,
    Void,
    is_first_order,
    ty_alpha_eq,
    unfold,
)

Shape = tuple
STEPS = (1e-3, 1e-4, 1e-5)
AGREE_REL = 1e-3
AGREE_ABS = 1e-8
DIRECTION_SEED = 0xD1FFC0DE
DERIV_BUDGET_FACTOR = 10


class MalformedTangent(AssertionError):
    pass


class SignatureError(ValueError):
    pass


# -- shapes and leaves ------------------------------------------------------


def flatten(v: Val, ty: Ty | None = None) -> tuple[Shape, list[float]]:
    """Split a first-order value into its shape and its real leaves."""
    if ty is not None and not is_first_order(ty):
        raise SignatureError("flatten needs a first-order type")
    leaves: list[float] = []

    def go(v: Val) -> Shape:
        match v:
            case ConstR(c):
                leaves.append(c)
                return ("real",)
            case UnitV():
                return ("unit",)
            case Pair(a, b):
                sa = go(a)
                return ("pair", sa, go(b))
            case Inl(p):
                return ("inl", go(p))
            case Inr(p):
                return ("inr", go(p))
            case Roll(p):
                return ("roll", go(p))
        raise SignatureError(f"not a first-order closed value: {v!r}")

    return go(v), leaves


def leaf_count(v: Val) -> int:
    return len(flatten(v)[1])


def with_leaves(v: Val, leaves: Sequence[float]) -> Val:
    """``v`` with its real leaves replaced, in order, by ``leaves``."""
    it = iter(leaves)

    def go(v: Val) -> Val:
        match v:
            case ConstR():
                return ConstR(float(next(it)))
            case UnitV():
                return v
            case Pair(a, b):
                a2 = go(a)
                return Pair(a2, go(b))
            case Inl(p, ty):
                return Inl(go(p), ty)
            case Inr(p, ty):
                return Inr(go(p), ty)
            case Roll(p, ty):
                return Roll(go(p), ty)
        raise SignatureError(f"not a first-order closed value: {v!r}")

    out = go(v)
    if next(it, None) is not None:
        raise SignatureError("too many leaves")
    return out


def seed(v: Val, direction: Sequence[float]) -> Val:
    """Pair every real leaf of ``v`` with the matching tangent entry."""
    n = leaf_count(v)
    if len(direction) != n:
        raise SignatureError(f"direction has {len(direction)} entries, value has {n} real leaves")
    it = iter(direction)

    def go(v: Val) -> Val:
        match v:
            case ConstR():
                return Pair(v, ConstR(float(next(it))))
            case UnitV():
                return v
            case Pair(a, b):
                a2 = go(a)
                return Pair(a2, go(b))
            case Inl(p, ty):
                return Inl(go(p), d_type(ty))
            case Inr(p, ty):
                return Inr(go(p), d_type(ty))
            case Roll(p, ty):
                return Roll(go(p), d_type(ty))
        raise SignatureError(f"not a first-order closed value: {v!r}")

    return go(v)


def tangent_decompose(w: Val, ty: Ty) -> tuple[Val, list[float]]:
    """Split a value of ``d_type(ty)`` into a primal value of ``ty`` and its tangent."""
    tangent: list[float] = []

    def go(w: Val, ty: Ty) -> Val:
        match ty, w:
            case Real(), Pair(ConstR() as x, ConstR(dx)):
                tangent.append(dx)
                return x
            case Unit(), UnitV():
                return w
            case Prod(l, r), Pair(a, b):
                a2 = go(a, l)
                return Pair(a2, go(b, r))
            case Sum(l, _), Inl(p):
                return Inl(go(p, l), ty)
            case Sum(_, r), Inr(p):
                return Inr(go(p, r), ty)
            case Mu(), Roll(p):
                return Roll(go(p, unfold(ty)), ty)
            case Void(), _:
                raise MalformedTangent("value of the empty type")
        raise MalformedTangent(f"{w!r} does not fit {ty!r}")

    return go(w, ty), tangent


# -- finite differences -----------------------------------------------------


@dataclass(frozen=True)
class NotDifferentiable:
    reason: str  # "near-kink" or "outcome-mismatch"
    detail: str = ""


@dataclass(frozen=True)
class Estimate:
    tangent: list[float]
    h_pair: tuple[float, float]


def _agree(a: Sequence[float], b: Sequence[float]) -> bool:
    return all(abs(x - y) <= AGREE_REL * max(abs(x), abs(y)) + AGREE_ABS for x, y in zip(a, b))


def richardson(diffs: Sequence[Sequence[float]], steps: Sequence[float] = STEPS) -> Estimate | None:
    """Extrapolate central differences taken at steps shrinking by 10x.

    Uses the smallest consecutive pair of step sizes whose estimates agree;
    returns None when no pair does.
    """
    for i in reversed(range(len(steps) - 1)):
        d1, d2 = diffs[i], diffs[i + 1]
        if _agree(d1, d2):
            return Estimate([b + (b - a) / 99.0 for a, b in zip(d1, d2)], (steps[i], steps[i + 1]))
    return None


def scalar_derivative(f: Callable[[float], float], x: float) -> float | None:
    """Derivative of a smooth scalar function by the same scheme as ``finite_diff``."""
    diffs = [[(f(x + h) - f(x - h)) / (2 * h)] for h in STEPS]
    est = richardson(diffs)
    return None if est is None else est.tangent[0]


def finite_diff(
    prog: Program,
    args: Sequence[Val],
    direction: Sequence[float],
    budget: Budget | int = DEFAULT_BUDGET,
    centre: Outcome | None = None,
) -> Estimate | NotDifferentiable:
    """Directional derivative of ``prog`` at ``args`` along ``direction``.

    Every stencil point must evaluate to a value of the centre's shape and
    take the same branch at every ``sign`` as the centre; otherwise the point
    is too close to a kink or the domain boundary to probe.
    """
    centre = centre or apply_program(prog, args, budget)
    if not isinstance(centre, Value):
        return NotDifferentiable("outcome-mismatch", f"centre is {centre.kind}")
    shape, base = flatten(centre.value)
    point = [x for a in args for x in flatten(a)[1]]
    if len(direction) != len(point):
        raise SignatureError(f"direction has {len(direction)} entries, input has {len(point)} real leaves")

    def at(h: float) -> list[float] | NotDifferentiable:
        moved = [x + h * d for x, d in zip(point, direction)]
        o = apply_program(prog, _unpoint(args, moved), budget)
        if not isinstance(o, Value):
            return NotDifferentiable("outcome-mismatch", f"{o.kind} at step {h:g}")
        s, leaves = flatten(o.value)
        if s != shape:
            return NotDifferentiable("near-kink", f"output shape changes at step {h:g}")
        if o.signs != centre.signs:
            return NotDifferentiable("near-kink", f"branch changes at step {h:g}")
        return leaves

    diffs = []
    for h in STEPS:
        plus, minus = at(h), at(-h)
        for side in (plus, minus):
            if isinstance(side, NotDifferentiable):
                return side
        diffs.append([(p - m) / (2 * h) for p, m in zip(plus, minus)])
    est = richardson(diffs)
    if est is None:
        return NotDifferentiable("near-kink", "estimates at different steps disagree")
    return est


def _unpoint(args: Sequence[Val], leaves: Sequence[float]) -> list[Val]:
    out, i = [], 0
    for a in args:
        n = leaf_count(a)
        out.append(with_leaves(a, leaves[i : i + n]))
        i += n
    return out


# -- grad check -------------------------------------------------------------


@dataclass
class TangentReport:
    point: list[float]
    direction: list[float]
    primal_outcome: str
    deriv_outcome: str
    ad_tangent: list[float] | None = None
    fd_tangent: list[float] | None = None
    max_abs_err: float = 0.0
    max_rel_err: float = 0.0
    verdict: str = "pass"
    reason: str = ""
    program: str = ""
    primal_steps: int = 0
    deriv_steps: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def skipped(self) -> bool:
        return self.verdict.startswith("skipped")

    def to_json(self) -> dict:
        return asdict(self)


def check_signature(prog: Program, dprog: Program) -> None:
    for _, ty in prog.params:
        if not is_first_order(ty):
            raise SignatureError("parameters must have first-order types")
    if not is_first_order(prog.returns):
        raise SignatureError("the result type must be first-order")
    if len(prog.params) != len(dprog.params) or not all(
        ty_alpha_eq(d_type(a), b) for (_, a), (_, b) in zip(prog.params, dprog.params)
    ):
        raise SignatureError("derivative program does not take the differentiated parameters")
    if not ty_alpha_eq(d_type(prog.returns), dprog.returns):
        raise SignatureError("derivative program does not return the differentiated result")


def grad_check(
    prog: Program,
    dprog: Program,
    args: Sequence[Val],
    direction: Sequence[float],
    tol_abs: float = 1e-5,
    tol_rel: float = 1e-4,
    budget: Budget | int = DEFAULT_BUDGET,
    *,
    with_fd: bool = True,
) -> TangentReport:
    """Compare the derivative program against the primal and against FD.

    The derivative runs on the seeded input with ten times the steps the
    primal consumed.  Undefinedness on both sides counts as agreement.
    """
    check_signature(prog, dprog)
    point = [x for a in args for x in flatten(a)[1]]
    direction = [float(d) for d in direction]
    if len(direction) != len(point):
        raise SignatureError(f"direction has {len(direction)} entries, input has {len(point)} real leaves")
    primal = apply_program(prog, args, budget)
    seeded, i = [], 0
    for a in args:
        n = leaf_count(a)
        seeded.append(seed(a, direction[i : i + n]))
        i += n
    deriv = apply_program(dprog, seeded, Budget(DERIV_BUDGET_FACTOR * max(primal.steps, 1)))
    rep = TangentReport(point, direction, primal.kind, deriv.kind, primal_steps=primal.steps, deriv_steps=deriv.steps)
    if primal.bottom != deriv.bottom:
        rep.verdict, rep.reason = "fail", "defined on one side only"
        return rep
    if primal.bottom:
        rep.reason = "undefined on both sides"
        return rep
    assert isinstance(primal, Value) and isinstance(deriv, Value)
    dprimal, tangent = tangent_decompose(deriv.value, prog.returns)
    rep.ad_tangent = tangent
    s1, l1 = flatten(primal.value)
    s2, l2 = flatten(dprimal)
    if s1 != s2 or any(a != b and not (math.isnan(a) and math.isnan(b)) for a, b in zip(l1, l2)):
        rep.verdict, rep.reason = "fail", "primal part of the derivative differs from the primal"
        return rep
    if not with_fd:
        return rep
    est = finite_diff(prog, args, direction, budget, centre=primal)
    if isinstance(est, NotDifferentiable):
        rep.verdict, rep.reason = f"skipped({est.reason})", est.detail
        return rep
    rep.fd_tangent = est.tangent
    ok = True
    for ad, fd in zip(tangent, est.tangent):
        err = abs(ad - fd)
        rep.max_abs_err = max(rep.max_abs_err, err)
        rep.max_rel_err = max(rep.max_rel_err, err / abs(fd) if fd else (0.0 if err == 0 else math.inf))
        if err > max(tol_abs, tol_rel * abs(fd)):
            ok = False
    if not ok:
        rep.verdict, rep.reason = "fail", "AD and FD disagree"
    return rep


def random_directions(n: int, count: int, seed: int = DIRECTION_SEED) -> list[list[float]]:
    """``count`` directions drawn uniformly from the unit sphere in R^n."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        if n == 0:
            out.append([])
            continue
        v = rng.standard_normal(n)
        out.append([float(x) for x in v / np.linalg.norm(v)])
    return out


def summarize(reports: Sequence[TangentReport]) -> dict:
    out = {"total": len(reports), "pass": 0, "fail": 0, "skip": 0}
    for r in reports:
        out["pass" if r.passed else "skip" if r.skipped else "fail"] += 1
    return out
