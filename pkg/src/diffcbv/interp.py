"""Small-step evaluation with a step budget.

The reduction rules are the directed beta-rules of the core language::

    x <- return v; s               ~>  s[v/x]
    case inl v of inl x -> s | ..  ~>  s[v/x]          (and inr)
    case (v, w) of (x, y) -> s     ~>  s[v/x, w/y]
    case () of () -> s             ~>  s
    (fun x -> s) v                 ~>  s[v/x]
    unroll (roll v) as x in s      ~>  s[v/x]
    op(c1, .., cn)                 ~>  return c        when defined
    sign c                         ~>  return inl ()   c > 0
                                   ~>  return inr ()   c < 0
    iterate t from x = v           ~>  y <- t[v/x]; case y of inl x' -> iterate t from x = x'
                                                            | inr r  -> return r

plus congruence under the first half of a bind.  ``op`` outside its domain
and ``sign 0`` have no rule; reaching one is a domain error.  A step is one
contraction; descending into a bind is free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import ops
from .syntax import (
    BOOL,
    App,
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
    Pair,
    PrimOp,
    Return,
    Roll,
    Sign,
    UnitV,
    Val,
    Var,
    free_vars,
    subst_many,
)
from .typecheck import check_val

DEFAULT_BUDGET = 1_000_000

TRUE = Inl(UnitV(), BOOL)
FALSE = Inr(UnitV(), BOOL)


class IllTyped(AssertionError):
    """Evaluation reached a state no rule covers; the input was not well typed."""


@dataclass(frozen=True)
class Budget:
    max_steps: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("budget must allow at least one step")


# -- outcomes ---------------------------------------------------------------


@dataclass(frozen=True)
class Value:
    value: Val
    steps: int
    signs: str = field(default="", compare=False)

    kind = "value"
    bottom = False


@dataclass(frozen=True)
class DomainError:
    op: str
    args: tuple[float, ...]
    steps: int
    signs: str = field(default="", compare=False)

    kind = "domain-error"
    bottom = True


@dataclass(frozen=True)
class OutOfFuel:
    steps: int
    signs: str = field(default="", compare=False)

    kind = "out-of-fuel"
    bottom = True


Outcome = Value | DomainError | OutOfFuel


def format_outcome(o: Outcome) -> str:
    from .pretty import format_val

    match o:
        case Value(v):
            return f"Value {format_val(v)}"
        case DomainError(op, args):
            return f"DomainError {op}({', '.join(repr(a) for a in args)})"
        case OutOfFuel(steps):
            return f"OutOfFuel after {steps} steps"
    raise TypeError(o)


def outcome_json(o: Outcome) -> dict:
    from .pretty import format_val

    out: dict = {"kind": o.kind, "steps": o.steps}
    if isinstance(o, Value):
        out["value"] = format_val(o.value)
    elif isinstance(o, DomainError):
        out.update(op=o.op, args=list(o.args))
    return out


# -- one contraction --------------------------------------------------------


class _Stuck(Exception):
    def __init__(self, op: str, args: tuple[float, ...]):
        self.op = op
        self.args = args


def _real(v: Val) -> float:
    if not isinstance(v, ConstR):
        raise IllTyped(f"expected a real literal, found {v!r}")
    return v.value


def _iterate_names(t: Comp, x: str) -> tuple[str, str, str]:
    taken = free_vars(t) | {x}
    names = []
    for base in ("y", "k", "r"):
        n = base
        while n in taken:
            n += "'"
        names.append(n)
    return tuple(names)  # type: ignore[return-value]


def contract(t: Comp) -> tuple[str, Comp]:
    """Contract a redex that is not a bind.  Returns (rule name, result)."""
    match t:
        case CaseSum(Inl(v), x, left, _, _):
            return "case-inl", subst_many(left, {x: v})
        case CaseSum(Inr(v), _, _, y, right):
            return "case-inr", subst_many(right, {y: v})
        case CasePair(Pair(a, b), x, y, body):
            if x == y:
                return "case-pair", subst_many(body, {y: b})
            return "case-pair", subst_many(body, {x: a, y: b})
        case CaseUnit(UnitV(), body):
            return "case-unit", body
        case App(Lam(x, _, body), arg):
            return "app", subst_many(body, {x: arg})
        case CaseRoll(Roll(v), x, body):
            return "unroll", subst_many(body, {x: v})
        case PrimOp(op, args):
            cs = tuple(_real(a) for a in args)
            try:
                return "op", Return(ConstR(ops.op_eval(op, cs)))
            except ops.DomainError:
                raise _Stuck(op, cs) from None
        case Sign(v):
            c = _real(v)
            if c > 0:
                return "sign-pos", Return(TRUE)
            if c < 0:
                return "sign-neg", Return(FALSE)
            raise _Stuck("sign", (c,))
        case Iterate(body, x, start):
            y, k, r = _iterate_names(body, x)
            again = CaseSum(Var(y), k, Iterate(body, x, Var(k)), r, Return(Var(r)))
            return "iterate", Bind(y, subst_many(body, {x: start}), again)
        case CaseVoid():
            raise IllTyped("case on a value of the empty type")
    raise IllTyped(f"no rule applies to {type(t).__name__}")


# -- term-level stepping ----------------------------------------------------


@dataclass(frozen=True)
class Stepped:
    term: Comp
    rule: str


@dataclass(frozen=True)
class Done:
    value: Val


@dataclass(frozen=True)
class DomainStuck:
    op: str
    args: tuple[float, ...]


def step(t: Comp) -> Stepped | Done | DomainStuck:
    """One small step of a closed computation."""
    match t:
        case Return(v):
            return Done(v)
        case Bind(x, Return(v), rest):
            return Stepped(subst_many(rest, {x: v}), "let-return")
        case Bind(x, first, rest):
            r = step(first)
            if isinstance(r, Stepped):
                return Stepped(Bind(x, r.term, rest), r.rule)
            return r
    try:
        rule, out = contract(t)
    except _Stuck as e:
        return DomainStuck(e.op, e.args)
    return Stepped(out, rule)


def applicable_rules(t: Comp) -> list[str]:
    """Every rule whose left-hand side matches ``t``, checked independently.

    Congruence matches are reported with the rule that fires inside, prefixed
    by ``let/``.  Used to audit that evaluation is deterministic.
    """
    found = []
    if isinstance(t, Bind) and isinstance(t.first, Return):
        found.append("let-return")
    if isinstance(t, Bind) and not isinstance(t.first, Return):
        found += ["let/" + r for r in applicable_rules(t.first)]
    if isinstance(t, CaseSum) and isinstance(t.scrutinee, Inl):
        found.append("case-inl")
    if isinstance(t, CaseSum) and isinstance(t.scrutinee, Inr):
        found.append("case-inr")
    if isinstance(t, CasePair) and isinstance(t.scrutinee, Pair):
        found.append("case-pair")
    if isinstance(t, CaseUnit) and isinstance(t.scrutinee, UnitV):
        found.append("case-unit")
    if isinstance(t, App) and isinstance(t.fn, Lam):
        found.append("app")
    if isinstance(t, CaseRoll) and isinstance(t.scrutinee, Roll):
        found.append("unroll")
    if isinstance(t, PrimOp) and all(isinstance(a, ConstR) for a in t.args):
        spec = ops.lookup(t.op)
        cs = [a.value for a in t.args]
        if spec.in_domain(*cs):
            try:
                spec.eval(*cs)
                found.append("op")
            except ops.DomainError:
                pass
    if isinstance(t, Sign) and isinstance(t.arg, ConstR) and t.arg.value > 0:
        found.append("sign-pos")
    if isinstance(t, Sign) and isinstance(t.arg, ConstR) and t.arg.value < 0:
        found.append("sign-neg")
    if isinstance(t, Iterate):
        found.append("iterate")
    return found


def is_domain_stuck(t: Comp) -> bool:
    while isinstance(t, Bind) and not isinstance(t.first, Return):
        t = t.first
    match t:
        case PrimOp(op, args) if all(isinstance(a, ConstR) for a in args):
            try:
                ops.op_eval(op, [a.value for a in args])
            except ops.DomainError:
                return True
        case Sign(ConstR(c)):
            return c == 0
    return False


# -- the machine ------------------------------------------------------------


def run(
    t: Comp,
    budget: Budget | int = DEFAULT_BUDGET,
    trace: Callable[[int, str], None] | None = None,
) -> Outcome:
    """Evaluate ``t`` for at most ``budget`` steps.

    Bind frames live on an explicit stack, so a step costs one contraction
    regardless of nesting depth.  The outcome records how many steps were
    taken and the branch taken by every ``sign`` (``+`` or ``-``).
    """
    limit = budget.max_steps if isinstance(budget, Budget) else int(budget)
    if limit < 1:
        raise ValueError("budget must allow at least one step")
    stack: list[tuple[str, Comp]] = []
    signs: list[str] = []
    steps = 0
    while True:
        if isinstance(t, Bind):
            stack.append((t.name, t.rest))
            t = t.first
            continue
        if isinstance(t, Return) and not stack:
            return Value(t.value, steps, "".join(signs))
        if steps >= limit:
            return OutOfFuel(steps, "".join(signs))
        if isinstance(t, Return):
            x, rest = stack.pop()
            rule, t = "let-return", subst_many(rest, {x: t.value})
        else:
            try:
                rule, t = contract(t)
            except _Stuck as e:
                return DomainError(e.op, e.args, steps, "".join(signs))
            if rule == "sign-pos":
                signs.append("+")
            elif rule == "sign-neg":
                signs.append("-")
        steps += 1
        if trace is not None:
            trace(steps, rule)


def trace_terms(t: Comp, budget: int = DEFAULT_BUDGET) -> list[Comp]:
    """The sequence of whole terms visited by ``step``, starting with ``t``."""
    out = [t]
    for _ in range(budget):
        r = step(t)
        if not isinstance(r, Stepped):
            break
        t = r.term
        out.append(t)
    return out


def apply_program(prog, args: Sequence[Val], budget: Budget | int = DEFAULT_BUDGET, trace=None) -> Outcome:
    """Substitute closed ``args`` for the program's parameters and run the body."""
    if len(args) != len(prog.params):
        raise ValueError(f"expected {len(prog.params)} arguments, got {len(args)}")
    from .typecheck import Ctx

    for (x, ty), a in zip(prog.params, args):
        check_val(Ctx(), a, ty)
    body = subst_many(prog.body, {x: a for (x, _), a in zip(prog.params, args)})
    return run(body, budget, trace)


def same_class(a: Outcome, b: Outcome) -> bool:
    """Whether two outcomes are both values or both undefined."""
    return a.bottom == b.bottom


__all__ = [
    "Budget",
    "Value",
    "DomainError",
    "OutOfFuel",
    "Outcome",
    "step",
    "run",
    "apply_program",
    "applicable_rules",
    "contract",
    "same_class",
]
