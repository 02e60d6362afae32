"""Partial primitive operations on reals.

Each operation has an open domain of definition, a numeric evaluator, and one
derivative computation per argument.  Derivative computations are ordinary
core terms over the free variables ``x1 .. xn`` (all of type real), so the AD
transform can splice them in by substitution.

Domains:

========  =====  =================
name      arity  domain
========  =====  =================
const_c   0      everywhere
add       2      everywhere
sub       2      everywhere
mul       2      everywhere
div       2      x2 != 0
neg       1      everywhere
exp       1      everywhere
log       1      x1 > 0
sigmoid   1      everywhere
========  =====  =================

Any evaluation whose IEEE result overflows to an infinity is treated as out of
domain, the same as ``log(-1.0)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Sequence

from .syntax import Bind, Comp, ConstR, PrimOp, Return, Var


class DomainError(ArithmeticError):
    """A primitive was applied outside its domain of definition."""

    def __init__(self, op: str, args: Sequence[float]):
        self.op = op
        self.args = tuple(args)
        super().__init__(f"{op}{list(self.args)} is undefined")


class UnknownOp(KeyError):
    pass


@dataclass(frozen=True)
class OpSpec:
    name: str
    arity: int
    fn: Callable[..., float]
    in_domain: Callable[..., bool]
    partials: tuple[Comp, ...]
    domain_doc: str = "total"

    def eval(self, *args: float) -> float:
        if len(args) != self.arity:
            raise ValueError(f"{self.name} expects {self.arity} arguments, got {len(args)}")
        if not self.in_domain(*args):
            raise DomainError(self.name, args)
        try:
            out = self.fn(*args)
        except (OverflowError, ZeroDivisionError, ValueError):
            raise DomainError(self.name, args) from None
        if not math.isfinite(out):
            raise DomainError(self.name, args)
        return out


def param(i: int) -> str:
    """Name of the i-th (1-based) free variable of a derivative template."""
    return f"x{i}"


X1, X2 = Var(param(1)), Var(param(2))
ONE = ConstR(1.0)


def _always(*_args: float) -> bool:
    return True


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


_BUILTIN = (
    OpSpec("add", 2, lambda x, y: x + y, _always, (Return(ONE), Return(ONE))),
    OpSpec("sub", 2, lambda x, y: x - y, _always, (Return(ONE), Return(ConstR(-1.0)))),
    OpSpec("mul", 2, lambda x, y: x * y, _always, (Return(X2), Return(X1))),
    OpSpec(
        "div",
        2,
        lambda x, y: x / y,
        lambda x, y: y != 0.0,
        (
            PrimOp("div", (ONE, X2)),
            Bind("q", PrimOp("mul", (X2, X2)), Bind("r", PrimOp("div", (X1, Var("q"))), PrimOp("neg", (Var("r"),)))),
        ),
        "x2 != 0",
    ),
    OpSpec("neg", 1, lambda x: -x, _always, (Return(ConstR(-1.0)),)),
    OpSpec("exp", 1, math.exp, _always, (PrimOp("exp", (X1,)),)),
    OpSpec("log", 1, math.log, lambda x: x > 0.0, (PrimOp("div", (ONE, X1)),), "x1 > 0"),
    OpSpec(
        "sigmoid",
        1,
        _sigmoid,
        _always,
        (
            Bind(
                "y",
                PrimOp("sigmoid", (X1,)),
                Bind("z", PrimOp("sub", (ONE, Var("y"))), PrimOp("mul", (Var("y"), Var("z")))),
            ),
        ),
    ),
)

_REGISTRY: dict[str, OpSpec] = {spec.name: spec for spec in _BUILTIN}

_CONST_RE = re.compile(r"const_(.+)")


def const_name(c: float) -> str:
    return f"const_{c!r}"


def lookup(name: str) -> OpSpec:
    spec = _REGISTRY.get(name)
    if spec is not None:
        return spec
    m = _CONST_RE.fullmatch(name)
    if m:
        try:
            c = float(m.group(1))
        except ValueError:
            raise UnknownOp(name) from None
        if math.isfinite(c):
            return OpSpec(name, 0, lambda c=c: c, _always, ())
    raise UnknownOp(name)


def is_op(name: str) -> bool:
    try:
        lookup(name)
    except UnknownOp:
        return False
    return True


def op_eval(name: str, args: Sequence[float]) -> float:
    """Evaluate ``name`` at ``args``; raises DomainError outside the domain."""
    return lookup(name).eval(*args)


def op_partial(name: str, i: int) -> Comp:
    """The derivative computation for argument ``i`` (1-based) of ``name``."""
    spec = lookup(name)
    if not 1 <= i <= spec.arity:
        raise IndexError(f"{name} has arity {spec.arity}; no partial {i}")
    return spec.partials[i - 1]


SURFACE_OPS = ("add", "sub", "mul", "div", "neg", "exp", "log", "sigmoid")


def registered_ops(constants: Sequence[float] = (2.5,)) -> list[tuple[str, int, str]]:
    """(name, arity, domain) rows for the built-in operations.

    The constant family is infinite; ``constants`` picks the representatives
    listed.
    """
    rows = [(const_name(c), 0, "total") for c in constants]
    rows += [(s.name, s.arity, s.domain_doc) for s in _BUILTIN]
    return rows
