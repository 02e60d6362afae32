"""The bundled example programs and where to sample their inputs.

Each entry names a ``.dcbv`` file shipped with the package and a sampler
that draws argument values from the program's intended domain.  Points are
drawn with a generator seeded by the caller, so runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Callable, Sequence

import numpy as np

from .ad import d_program
from .elaborate import Program, load_program
from .oracle import DIRECTION_SEED, TangentReport, grad_check, leaf_count, random_directions
from .syntax import REAL, ConstR, Inl, Inr, Mu, Pair, Prod, Roll, Sum, TVar, Unit, UnitV, Val

LIST = Mu("a", Sum(Unit(), Prod(REAL, TVar("a"))))
_CELL = Sum(Unit(), Prod(REAL, LIST))

Sampler = Callable[[np.random.Generator], list[Val]]


def real_list(xs: Sequence[float]) -> Val:
    """A list value of ``mu a. unit + real * a``."""
    out: Val = Roll(Inl(UnitV(), _CELL), LIST)
    for x in reversed(xs):
        out = Roll(Inr(Pair(ConstR(float(x)), out), _CELL), LIST)
    return out


def _reals(*ranges: tuple[float, float]) -> Sampler:
    def draw(rng: np.random.Generator) -> list[Val]:
        return [ConstR(float(rng.uniform(lo, hi))) for lo, hi in ranges]

    return draw


def _away_from(lo: float, hi: float, gap: float) -> Callable[[np.random.Generator], float]:
    def draw(rng: np.random.Generator) -> float:
        x = float(rng.uniform(lo, hi))
        return x if abs(x) >= gap else gap if x >= 0 else -gap

    return draw


def _list(max_len: int = 5, lo: float = -2.0, hi: float = 2.0) -> Sampler:
    def draw(rng: np.random.Generator) -> list[Val]:
        n = int(rng.integers(0, max_len + 1))
        return [real_list(rng.uniform(lo, hi, n))]

    return draw


def _pow(rng: np.random.Generator) -> list[Val]:
    return [ConstR(float(rng.uniform(-2, 2))), ConstR(float(rng.integers(0, 6)))]


def _division(rng: np.random.Generator) -> list[Val]:
    return [ConstR(float(rng.uniform(-3, 3))), ConstR(_away_from(-3, 3, 0.2)(rng))]


def _horner(rng: np.random.Generator) -> list[Val]:
    return _list(4)(rng) + [ConstR(float(rng.uniform(-1.5, 1.5)))]


def _pair(rng: np.random.Generator) -> list[Val]:
    return [Pair(ConstR(float(rng.uniform(-3, 3))), ConstR(float(rng.uniform(-3, 3))))]


@dataclass(frozen=True)
class Entry:
    name: str
    sample: Sampler
    tags: frozenset[str] = field(default_factory=frozenset)
    budget: int = 100_000
    doc: str = ""

    @property
    def filename(self) -> str:
        return f"{self.name}.dcbv"

    def source(self) -> str:
        return resources.files(__package__).joinpath("corpus").joinpath(self.filename).read_text("utf-8")

    def program(self) -> Program:
        return _load(self.name)


def _e(name: str, sample: Sampler, *tags: str, budget: int = 100_000) -> Entry:
    return Entry(name, sample, frozenset(tags), budget)


ENTRIES: tuple[Entry, ...] = (
    _e("square", _reals((-5, 5)), "smooth"),
    _e("polynomial", _reals((-3, 3), (-3, 3)), "smooth"),
    _e("sigmoid", _reals((-6, 6)), "smooth"),
    _e("exp_log", _reals((0.05, 10)), "smooth", "partial"),
    _e("division", _division, "smooth", "partial"),
    _e("relu", _reals((-5, 5)), "kinked"),
    _e("log", _reals((0.05, 10)), "partial"),
    _e("taylor_exp", _reals((-2, 2)), "iterate"),
    _e("pow_rec", _pow, "rec"),
    _e("diverge_rec", _reals((-1, 1)), "rec", "diverges", budget=1_000),
    _e("list_sum", _list(), "rec", "list"),
    _e("list_map_square", _list(), "rec", "list"),
    _e("list_sum_map_square", _list(), "rec", "list"),
    _e("newton_sqrt", _reals((0.1, 20)), "iterate", "partial"),
    _e("halving", _reals((-4, 40)), "iterate", "kinked"),
    _e("twice", _reals((-1.5, 1.5)), "higher-order"),
    _e("abs_ifpos", _reals((-5, 5)), "kinked"),
    _e("swap", _pair, "product"),
    _e("safe_log", _reals((-5, 5)), "sum", "kinked"),
    _e("void_case", _reals((-5, 5)), "void"),
    _e("unit_case", _reals((-3, 3)), "unit"),
    _e("tanh", _reals((-3, 3)), "smooth"),
    _e("softplus", _reals((-5, 5)), "smooth"),
    _e("neg_sub", _reals((-3, 3), (-3, 3)), "smooth"),
    _e("let_nested", _reals((-3, 3)), "smooth"),
    _e("roll_direct", _reals((-3, 3)), "list"),
    _e("stream", _reals((-3, 3)), "rec", "higher-order"),
    _e("horner", _horner, "rec", "list"),
    _e("max_pair", _reals((-3, 3), (-3, 3)), "kinked"),
    _e("sum_iterate", _list(), "iterate", "list"),
    _e("logistic_loss", _reals((-3, 3), (-3, 3)), "smooth"),
    _e("clamp", _reals((-1, 2)), "kinked"),
    _e("const_op", _reals((-3, 3)), "smooth"),
    _e("sign_branch", _reals((-3, 3)), "kinked", "sum"),
)

BY_NAME = {e.name: e for e in ENTRIES}

#: programs with real-only signatures checked against finite differences
FD_PROGRAMS = ("square", "polynomial", "sigmoid", "exp_log", "division")
#: programs whose loops use ``iterate``
ITERATE_PROGRAMS = tuple(e.name for e in ENTRIES if "iterate" in e.tags)


@lru_cache(maxsize=None)
def _load(name: str) -> Program:
    return load_program(BY_NAME[name].source())


def entry(name: str) -> Entry:
    try:
        return BY_NAME[name]
    except KeyError:
        raise KeyError(f"no corpus program named {name!r}") from None


def program(name: str) -> Program:
    return entry(name).program()


def reals(*xs: float) -> list[Val]:
    return [ConstR(float(x)) for x in xs]


def check_entry(
    e: Entry,
    points: int,
    directions: int,
    rng: np.random.Generator,
    *,
    tol_abs: float = 1e-5,
    tol_rel: float = 1e-4,
    budget: int | None = None,
    dir_seed: int = DIRECTION_SEED,
) -> list[TangentReport]:
    """Grad-check one corpus program at sampled inputs."""
    prog = e.program()
    dprog = d_program(prog)
    reports = []
    for k in range(points):
        args = e.sample(rng)
        n = sum(leaf_count(a) for a in args)
        for d in random_directions(n, directions, dir_seed + k):
            rep = grad_check(prog, dprog, args, d, tol_abs, tol_rel, budget or e.budget)
            rep.program = e.name
            reports.append(rep)
    return reports


__all__ = [
    "ENTRIES",
    "Entry",
    "FD_PROGRAMS",
    "ITERATE_PROGRAMS",
    "LIST",
    "check_entry",
    "entry",
    "program",
    "real_list",
    "reals",
]
