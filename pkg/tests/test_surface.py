import pytest
from hypothesis import given, strategies as st

from diffcbv import corpus
from diffcbv.pretty import core_to_surface, format_surface_program, format_term, format_type
from diffcbv.randgen import well_typed
from diffcbv.surface import (
    ParseError,
    SIf,
    SIterate,
    SLess,
    SLit,
    SOp,
    SPair,
    SRoll,
    SVar,
    parse,
    parse_args,
    parse_program,
    parse_type,
)
from diffcbv.syntax import REAL, UNIT, Arrow, Mu, Prod, Sum, TVar


def test_parse_op_call():
    assert parse("mul(x, 3.0)") == SOp("mul", (SVar("x"), SLit(3.0)))


def test_infix_desugars_to_ops_with_precedence():
    assert parse("x + y * 2.0") == SOp("add", (SVar("x"), SOp("mul", (SVar("y"), SLit(2.0)))))
    assert parse("x - y - z") == SOp("sub", (SOp("sub", (SVar("x"), SVar("y"))), SVar("z")))


def test_parse_if_over_comparison():
    t = parse("if x < 0.0 then 0.0 else x")
    assert isinstance(t, SIf) and t.cond == SLess(SVar("x"), SLit(0.0))


def test_parse_iterate():
    t = parse("iterate t from s = (0.0, 0.0)")
    assert t == SIterate(SVar("t"), "s", SPair(SLit(0.0), SLit(0.0)))


def test_nested_prefix_forms():
    t = parse("roll[mu a. unit + a] inl[unit + (mu a. unit + a)] ()")
    assert isinstance(t, SRoll)


def test_types_and_unicode_aliases():
    assert parse_type("real * real -> real") == Arrow(Prod(REAL, REAL), REAL)
    assert parse_type("μa. unit + real × a") == Mu("a", Sum(UNIT, Prod(REAL, TVar("a"))))


@pytest.mark.parametrize("text", ["mul(x,", "let = 3 in x", "fun x -> x", "1.0 )", "case x of inl a -> a"])
def test_parse_errors_have_positions(text):
    with pytest.raises(ParseError) as e:
        parse(text)
    j = e.value.to_json()
    assert j["code"] == "PARSE" and j["span"]["line"] >= 1


def test_parse_args_accepts_bare_constructors():
    (t,) = parse_args("roll (inr (3.0, roll (inl ())))")
    assert isinstance(t, SRoll) and t.ty is None


@pytest.mark.parametrize("e", corpus.ENTRIES, ids=lambda e: e.name)
def test_corpus_programs_round_trip_through_the_printer(e):
    p = parse_program(e.source())
    q = parse_program(format_surface_program(p))
    assert (q.params, q.body) == (p.params, p.body)
    assert format_type(q.returns) == format_type(p.returns)


@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_printed_core_terms_reparse(seed):
    t = well_typed(seed).term
    assert parse(format_term(t)) == core_to_surface(t)
