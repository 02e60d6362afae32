import math

import pytest
from hypothesis import given, strategies as st

from diffcbv import corpus
from diffcbv.ad import d_program, d_type
from diffcbv.oracle import (
    DERIV_BUDGET_FACTOR,
    Estimate,
    NotDifferentiable,
    SignatureError,
    finite_diff,
    flatten,
    grad_check,
    random_directions,
    richardson,
    scalar_derivative,
    seed,
    summarize,
    tangent_decompose,
)
from diffcbv.syntax import BOOL, REAL, UNIT, ConstR, Inl, Inr, Pair, Prod, Sum, UnitV
from diffcbv.typecheck import Ctx, check_val

LIST = corpus.LIST


def test_flatten_examples():
    assert flatten(Pair(ConstR(1.0), ConstR(2.0)), Prod(REAL, REAL)) == (("pair", ("real",), ("real",)), [1.0, 2.0])
    assert flatten(Inl(UnitV(), BOOL), BOOL) == (("inl", ("unit",)), [])
    shape, leaves = flatten(corpus.real_list([3.0]), LIST)
    assert leaves == [3.0]
    assert shape == ("roll", ("inr", ("pair", ("real",), ("roll", ("inl", ("unit",))))))


def test_flatten_rejects_higher_order_types():
    from diffcbv.syntax import Arrow

    with pytest.raises(SignatureError):
        flatten(ConstR(1.0), Arrow(REAL, REAL))


def test_seed_examples():
    assert seed(ConstR(3.0), [1.0]) == Pair(ConstR(3.0), ConstR(1.0))
    v = Pair(ConstR(3.0), Inl(UnitV(), BOOL))
    assert seed(v, [1.0]) == Pair(Pair(ConstR(3.0), ConstR(1.0)), Inl(UnitV(), BOOL))
    assert seed(Inr(UnitV(), BOOL), []) == Inr(UnitV(), BOOL)
    with pytest.raises(SignatureError):
        seed(ConstR(1.0), [])


def test_tangent_decompose_examples():
    assert tangent_decompose(Pair(ConstR(9.0), ConstR(6.0)), REAL) == (ConstR(9.0), [6.0])
    assert tangent_decompose(Inl(UnitV(), BOOL), BOOL) == (Inl(UnitV(), BOOL), [])


leaf = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


@given(st.lists(leaf, max_size=6), st.data())
def test_seed_round_trip_on_lists(xs, data):
    v = corpus.real_list(xs)
    d = data.draw(st.lists(leaf, min_size=len(xs), max_size=len(xs)))
    s = seed(v, d)
    check_val(Ctx(), s, d_type(LIST))
    assert tangent_decompose(s, LIST) == (v, d)


@given(leaf, leaf, st.booleans(), leaf, leaf)
def test_seed_round_trip_on_mixed_data(a, b, left, da, db):
    ty = Prod(REAL, Sum(REAL, UNIT))
    inner = Inl(ConstR(b), Sum(REAL, UNIT)) if left else Inr(UnitV(), Sum(REAL, UNIT))
    v = Pair(ConstR(a), inner)
    d = [da, db] if left else [da]
    assert tangent_decompose(seed(v, d), ty) == (v, d)


def _fd(name, args, direction):
    return finite_diff(corpus.program(name), corpus.reals(*args), direction)


def test_finite_differences_of_smooth_programs():
    est = _fd("square", [3.0], [1.0])
    assert isinstance(est, Estimate) and abs(est.tangent[0] - 6.0) < 1e-5
    est = _fd("sigmoid", [0.0], [1.0])
    assert abs(est.tangent[0] - 0.25) < 1e-6


def test_finite_differences_near_a_kink_are_flagged():
    est = _fd("relu", [1e-6], [1.0])
    assert isinstance(est, NotDifferentiable) and est.reason == "near-kink"
    assert isinstance(_fd("relu", [0.5], [1.0]), Estimate)


def test_finite_differences_outside_the_domain():
    est = _fd("log", [-1.0], [1.0])
    assert isinstance(est, NotDifferentiable) and est.reason == "outcome-mismatch"


def test_richardson_picks_the_smallest_agreeing_pair():
    est = richardson([[1.0], [2.0], [2.0000001]])
    assert est.h_pair == (1e-4, 1e-5)
    assert richardson([[1.0], [2.0], [3.0]]) is None


def test_scalar_derivative():
    assert abs(scalar_derivative(math.sin, 0.3) - math.cos(0.3)) < 1e-9


def _gc(name, args, direction, **kw):
    p = corpus.program(name)
    return grad_check(p, d_program(p), corpus.reals(*args), direction, **kw)


def test_grad_check_examples():
    r = _gc("relu", [2.0], [1.0])
    assert r.passed and r.ad_tangent == [1.0]
    r = _gc("relu", [0.0], [1.0])
    assert r.passed and (r.primal_outcome, r.deriv_outcome) == ("domain-error", "domain-error")
    r = _gc("taylor_exp", [1.0], [1.0])
    assert r.passed and abs(r.ad_tangent[0] - math.e) < 1e-4 and abs(r.fd_tangent[0] - math.e) < 1e-4


def test_grad_check_uses_scaled_derivative_budget():
    r = _gc("square", [2.0], [1.0])
    assert r.deriv_steps <= DERIV_BUDGET_FACTOR * max(r.primal_steps, 1)


def test_grad_check_detects_a_wrong_derivative():
    from diffcbv.elaborate import load_program

    p = corpus.program("square")
    wrong = load_program("params x: real * real; returns real * real; body case x of (a, da) -> (a * a, da)")
    r = grad_check(p, wrong, corpus.reals(3.0), [1.0])
    assert r.verdict == "fail" and r.reason == "AD and FD disagree"


def test_grad_check_detects_definedness_mismatch():
    from diffcbv.elaborate import load_program

    p = corpus.program("log")
    total = load_program("params x: real * real; returns real * real; body x")
    r = grad_check(p, total, corpus.reals(-1.0), [1.0])
    assert r.verdict == "fail"


def test_grad_check_rejects_higher_order_results():
    p = corpus.program("twice")
    from diffcbv.elaborate import load_program

    ho = load_program("params x: real; returns real -> real; body fun (y: real) -> y * x")
    with pytest.raises(SignatureError):
        grad_check(ho, d_program(ho), corpus.reals(1.0), [1.0])
    assert grad_check(p, d_program(p), corpus.reals(1.0), [1.0]).passed


def test_directions_are_unit_and_reproducible():
    a = random_directions(3, 4, seed=5)
    assert a == random_directions(3, 4, seed=5)
    assert all(abs(sum(x * x for x in d) - 1.0) < 1e-12 for d in a)
    assert random_directions(0, 2) == [[], []]


def test_summary_counts():
    reps = [_gc("relu", [2.0], [1.0]), _gc("relu", [1e-7], [1.0])]
    assert summarize(reps) == {"total": 2, "pass": 1, "fail": 0, "skip": 1}
    assert reps[1].skipped and reps[1].to_json()["verdict"].startswith("skipped")
