import numpy as np
import pytest
from hypothesis import given, strategies as st

from diffcbv import corpus
from diffcbv.elaborate import load_program
from diffcbv.interp import (
    FALSE,
    TRUE,
    Budget,
    DomainError,
    DomainStuck,
    Done,
    IllTyped,
    OutOfFuel,
    Stepped,
    Value,
    applicable_rules,
    apply_program,
    format_outcome,
    is_domain_stuck,
    outcome_json,
    run,
    same_class,
    step,
    trace_terms,
)
from diffcbv.randgen import well_typed
from diffcbv.syntax import REAL, App, Bind, ConstR, Inr, Iterate, PrimOp, Return, Sign, Sum, UnitV, Var, subst_many
from diffcbv.typecheck import Ctx, check_comp

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_step_examples():
    assert step(Bind("x", Return(ConstR(3.0)), Return(Var("x")))) == Stepped(Return(ConstR(3.0)), "let-return")
    assert step(Sign(ConstR(3.0))) == Stepped(Return(TRUE), "sign-pos")
    assert step(Sign(ConstR(-3.0))) == Stepped(Return(FALSE), "sign-neg")
    assert step(PrimOp("log", (ConstR(-1.0),))) == DomainStuck("log", (-1.0,))
    assert step(Return(ConstR(1.0))) == Done(ConstR(1.0))


def test_step_inside_bind_frame():
    t = Bind("y", PrimOp("add", (ConstR(1.0), ConstR(2.0))), Return(Var("y")))
    assert step(t) == Stepped(Bind("y", Return(ConstR(3.0)), Return(Var("y"))), "op")


def test_run_examples():
    assert run(Return(ConstR(3.0)), 10) == Value(ConstR(3.0), 0)
    diverge = corpus.program("diverge_rec")
    assert isinstance(apply_program(diverge, [ConstR(0.0)], 10_000), OutOfFuel)
    relu = corpus.program("relu")
    assert apply_program(relu, [ConstR(2.0)], 10_000).value == ConstR(2.0)
    assert apply_program(relu, [ConstR(-2.0)]).value == ConstR(0.0)
    zero = apply_program(relu, [ConstR(0.0)])
    assert isinstance(zero, DomainError) and zero.op == "sign"
    mul = load_program("params x: real, y: real; returns real; body x * y")
    assert apply_program(mul, [ConstR(2.0), ConstR(3.0)]).value == ConstR(6.0)


def test_iterate_unrolls_once_per_step():
    # count down from 3 by ones; returns the first non-positive value
    src = "params x: real; returns real; body iterate ifpos s then inl[real + real] (s - 1.0) else inr[real + real] s from s = x"
    p = load_program(src)
    assert apply_program(p, [ConstR(2.5)]).value == ConstR(-0.5)


def test_outcome_rendering():
    assert format_outcome(Value(ConstR(0.0), 1)) == "Value 0.0"
    assert format_outcome(DomainError("sign", (0.0,), 3)) == "DomainError sign(0.0)"
    assert format_outcome(OutOfFuel(7)) == "OutOfFuel after 7 steps"
    assert outcome_json(OutOfFuel(7)) == {"kind": "out-of-fuel", "steps": 7}


def test_bottom_classes():
    assert same_class(DomainError("log", (0.0,), 1), OutOfFuel(9))
    assert not same_class(Value(UnitV(), 0), OutOfFuel(9))


def test_budget_must_be_positive():
    with pytest.raises(ValueError):
        Budget(0)
    with pytest.raises(ValueError):
        run(Return(UnitV()), 0)


def test_ill_typed_state_is_reported():
    with pytest.raises(IllTyped):
        run(App(ConstR(1.0), ConstR(2.0)), 10)


def test_arguments_are_checked():
    with pytest.raises(Exception):
        apply_program(corpus.program("square"), [UnitV()])


def test_trace_callback_sees_every_step():
    seen = []
    out = apply_program(corpus.program("relu"), [ConstR(2.0)], trace=lambda i, r: seen.append((i, r)))
    assert len(seen) == out.steps and [i for i, _ in seen] == list(range(1, out.steps + 1))
    # x < 0 at x = 2 is sign(0 - 2)
    assert "sign-neg" in {r for _, r in seen}
    assert out.signs == "-"


@pytest.mark.parametrize("name", ["relu", "taylor_exp", "pow_rec", "list_sum", "twice", "void_case", "stream"])
def test_traces_are_deterministic_and_type_safe(name):
    e = corpus.entry(name)
    p = e.program()
    args = e.sample(np.random.default_rng(3))
    t = subst_many(p.body, {x: a for (x, _), a in zip(p.params, args)})
    terms = trace_terms(t, 3000)
    for u in terms:
        check_comp(Ctx(), u, p.returns)
        rules = applicable_rules(u)
        assert len(rules) <= 1
        if not rules:
            assert isinstance(u, Return) or is_domain_stuck(u)


@given(seeds, st.integers(min_value=1, max_value=50))
def test_step_monotonicity(seed, extra):
    s = well_typed(seed)
    if s.ctx.bindings:
        return
    out = run(s.term, 200)
    if isinstance(out, Value):
        assert run(s.term, 200 + extra) == out


@given(seeds)
def test_small_step_and_machine_agree(seed):
    s = well_typed(seed)
    if s.ctx.bindings:
        return
    out = run(s.term, 300)
    terms = trace_terms(s.term, 300)
    last = step(terms[-1])
    match out:
        case Value(v):
            assert last == Done(v) and len(terms) - 1 == out.steps
        case DomainError(op, args):
            assert last == DomainStuck(op, args)


def test_iterate_is_the_only_rule_for_a_loop():
    it = Iterate(Return(Inr(Var("s"), Sum(REAL, REAL))), "s", ConstR(1.0))
    assert applicable_rules(it) == ["iterate"]
    assert run(it, 10).value == ConstR(1.0)
