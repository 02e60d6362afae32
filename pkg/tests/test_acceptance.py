"""Acceptance criteria, one test per criterion.

Each ``criterion_*`` function returns ``(ok, detail)``.  Under pytest the
verdicts are collected and printed as PASS/FAIL lines in the terminal
summary; run this file directly to print them without pytest.
"""

from __future__ import annotations

import math
import sys
import time

import numpy as np
import pytest

from diffcbv import corpus, ops
from diffcbv.ad import d_comp, d_ctx, d_program, d_type, d_val
from diffcbv.elaborate import iterate_to_rec
from diffcbv.interp import (
    DomainError,
    OutOfFuel,
    format_outcome,
    Value,
    applicable_rules,
    apply_program,
    is_domain_stuck,
    run,
    trace_terms,
)
from diffcbv.oracle import (
    flatten,
    grad_check,
    random_directions,
    scalar_derivative,
    seed,
    tangent_decompose,
)
from diffcbv.randgen import LAWS, law_instance, subst_case, well_typed
from diffcbv.syntax import ConstR, Return, alpha_eq, subst_many
from diffcbv.typecheck import check_comp

RESULTS: list[tuple[str, bool, str, float]] = []

TOL_ABS, TOL_REL = 1e-5, 1e-4
LIST = corpus.LIST


def same_outcome(a, b) -> bool:
    """Equal outcome kinds, alpha-equal values, equal failing operation."""
    if a.kind != b.kind:
        return False
    match a:
        case Value(v):
            return alpha_eq(v, b.value)
        case DomainError(op, args):
            return (op, args) == (b.op, b.args)
    return True


def ad_tangent(name: str, args, direction) -> list[float]:
    p = corpus.program(name)
    return grad_check(p, d_program(p), args, direction, with_fd=False).ad_tangent


# -- 1 ----------------------------------------------------------------------


def criterion_1():
    bad = []
    for e in corpus.ENTRIES:
        try:
            d_program(e.program()).check()
        except Exception as ex:  # noqa: BLE001
            bad.append(f"{e.name}: {ex}")
    random_fail = 0
    for s in range(1000):
        smp = well_typed(s, max_depth=8)
        try:
            check_comp(d_ctx(smp.ctx), d_comp(smp.term), d_type(smp.ty))
        except Exception:  # noqa: BLE001
            random_fail += 1
    ok = not bad and random_fail == 0
    return ok, f"corpus {len(corpus.ENTRIES) - len(bad)}/{len(corpus.ENTRIES)}, random {1000 - random_fail}/1000"


# -- 2 ----------------------------------------------------------------------


def criterion_2():
    fails = 0
    for s in range(1000):
        c = subst_case(s)
        lhs = d_comp(subst_many(c.term, {c.var: c.value}))
        rhs = subst_many(d_comp(c.term), {c.var: d_val(c.value)})
        fails += not alpha_eq(lhs, rhs)
    return fails == 0, f"{1000 - fails}/1000 alpha-equal"


# -- 3 ----------------------------------------------------------------------


def criterion_3():
    rng = np.random.default_rng(0xACCE97)
    counts = {"pass": 0, "fail": 0, "skip": 0}
    bad_skips = 0
    worst = 0.0
    for k, name in enumerate(corpus.FD_PROGRAMS):
        e = corpus.entry(name)
        reps = corpus.check_entry(e, 50, 3, rng, tol_abs=TOL_ABS, tol_rel=TOL_REL, dir_seed=0xD1FFC0DE + 1000 * k)
        for r in reps:
            if r.passed:
                counts["pass"] += 1
            elif r.skipped:
                counts["skip"] += 1
                bad_skips += r.verdict != "skipped(near-kink)"
            else:
                counts["fail"] += 1
            worst = max(worst, r.max_abs_err)
    ok = counts["fail"] == 0 and bad_skips == 0 and sum(counts.values()) == 750
    return ok, f"{counts}, max |ad-fd| {worst:.2e}"


# -- 4 ----------------------------------------------------------------------


def criterion_4():
    problems = []
    relu = corpus.program("relu")
    drelu = d_program(relu)
    for x, want in [(0.5, 1.0), (2.0, 1.0), (10.0, 1.0), (-0.5, 0.0), (-2.0, 0.0), (-10.0, 0.0)]:
        out = apply_program(drelu, [seed(ConstR(x), [1.0])])
        if not isinstance(out, Value) or tangent_decompose(out.value, relu.returns)[1] != [want]:
            problems.append(f"relu'({x})")
    at0 = apply_program(relu, corpus.reals(0.0)), apply_program(drelu, [seed(ConstR(0.0), [1.0])])
    if not all(isinstance(o, DomainError) for o in at0):
        problems.append("relu at 0")
    log, dlog = corpus.program("log"), d_program(corpus.program("log"))
    for x in (0.0, -1e-9, -0.5, -1.0, -10.0):
        r = grad_check(log, dlog, corpus.reals(x), [1.0])
        if (r.primal_outcome, r.deriv_outcome) != ("domain-error", "domain-error") or not r.passed:
            problems.append(f"log at {x}")
    rng = np.random.default_rng(4)
    for x in rng.uniform(0.05, 10.0, 20):
        r = grad_check(log, dlog, corpus.reals(float(x)), [1.0], TOL_ABS, TOL_REL)
        if not r.passed:
            problems.append(f"log fd at {x:.3f}")
    return not problems, "ok" if not problems else ", ".join(problems)


# -- 5 ----------------------------------------------------------------------


def criterion_5():
    p = corpus.program("taylor_exp")
    dp = d_program(p)
    problems, worst_p, worst_t = [], 0.0, 0.0
    for x in (-1.0, 0.5, 1.0, 2.0):
        primal = apply_program(p, corpus.reals(x), 100_000)
        r = grad_check(p, dp, corpus.reals(x), [1.0], TOL_ABS, TOL_REL, 100_000)
        if not isinstance(primal, Value) or not r.passed or r.deriv_outcome != "value":
            problems.append(f"x={x}: {r.verdict}")
            continue
        ep = abs(primal.value.value - math.exp(x))
        et = abs(r.ad_tangent[0] - math.exp(x))
        worst_p, worst_t = max(worst_p, ep), max(worst_t, et)
        if ep > 1e-9 or et > 1e-6:
            problems.append(f"x={x}: primal err {ep:.1e}, tangent err {et:.1e}")
        if primal.steps > 100_000 or r.deriv_steps > 100_000:
            problems.append(f"x={x}: {primal.steps}/{r.deriv_steps} steps")
    return not problems, f"max primal err {worst_p:.1e}, max tangent err {worst_t:.1e}" + (
        "; " + ", ".join(problems) if problems else ""
    )


# -- 6 ----------------------------------------------------------------------


def criterion_6():
    p = corpus.program("pow_rec")
    primal = apply_program(p, corpus.reals(2.0, 3.0))
    tangent = ad_tangent("pow_rec", corpus.reals(2.0, 3.0), [1.0, 0.0])
    ok_pow = isinstance(primal, Value) and primal.value == ConstR(8.0) and abs(tangent[0] - 12.0) <= 1e-9
    div = corpus.program("diverge_rec")
    budget = 5_000
    a = apply_program(div, corpus.reals(0.5), budget)
    b = apply_program(d_program(div), [seed(ConstR(0.5), [1.0])], budget)
    ok_div = isinstance(a, OutOfFuel) and isinstance(b, OutOfFuel)
    got = format_outcome(primal)
    return ok_pow and ok_div, f"pow(2, 3): {got}, tangent {tangent}; divergent rec: {a.kind} / {b.kind}"


# -- 7 ----------------------------------------------------------------------


def criterion_7():
    rng = np.random.default_rng(7)
    problems = []
    for n in (0, 1, 5):
        xs = [float(x) for x in rng.uniform(-2, 2, n)]
        v = corpus.real_list(xs)
        d = [float(x) for x in rng.standard_normal(n)]
        shape, leaves = flatten(v, LIST)
        if leaves != xs or tangent_decompose(seed(v, d), LIST) != (v, d):
            problems.append(f"round trip n={n}")
        for name in ("list_sum", "list_map_square"):
            p = corpus.program(name)
            out = apply_program(d_program(p), [seed(v, d)])
            prim = apply_program(p, [v])
            dv, t = tangent_decompose(out.value, p.returns)
            if flatten(dv) != flatten(prim.value):
                problems.append(f"{name} primal n={n}")
            want = [sum(d)] if name == "list_sum" else [2 * x * dx for x, dx in zip(xs, d)]
            if any(abs(a - b) > 1e-9 for a, b in zip(t, want)) or len(t) != len(want):
                problems.append(f"{name} tangent n={n}")
            if not grad_check(p, d_program(p), [v], d or [], TOL_ABS, TOL_REL).passed:
                problems.append(f"{name} grad-check n={n}")
        grad = [ad_tangent("list_sum_map_square", [v], list(np.eye(n)[i]))[0] for i in range(n)]
        if any(abs(g - 2 * x) > 1e-9 for g, x in zip(grad, xs)):
            problems.append(f"sum-map-square gradient n={n}")
    return not problems, "ok" if not problems else ", ".join(problems)


# -- 8 ----------------------------------------------------------------------


def _in_domain_point(spec, rng):
    while True:
        xs = [float(x) for x in rng.uniform(-3, 3, spec.arity)]
        if spec.name == "div" and abs(xs[1]) < 0.2:
            continue
        if spec.name == "log" and xs[0] < 0.05:
            continue
        if spec.in_domain(*xs):
            return xs


def criterion_8():
    rng = np.random.default_rng(8)
    total = fails = 0
    names = list(ops.SURFACE_OPS) + [ops.const_name(2.5)]
    for name in names:
        spec = ops.lookup(name)
        for i in range(1, spec.arity + 1):
            for _ in range(100):
                xs = _in_domain_point(spec, rng)
                inst = {ops.param(j + 1): ConstR(x) for j, x in enumerate(xs)}
                out = run(subst_many(ops.op_partial(name, i), inst), 1000)

                def along(h, xs=xs, i=i):
                    ys = list(xs)
                    ys[i - 1] = h
                    return ops.op_eval(name, ys)

                fd = scalar_derivative(along, xs[i - 1])
                total += 1
                if not isinstance(out, Value) or fd is None:
                    fails += 1
                    continue
                got = out.value.value
                if abs(got - fd) > max(1e-6, 1e-5 * abs(got)):
                    fails += 1
    return fails == 0, f"{total - fails}/{total} partials agree"


# -- 9 ----------------------------------------------------------------------


def criterion_9():
    rng = np.random.default_rng(9)
    states = multi = stuck = 0
    for e in corpus.ENTRIES:
        p, dp = e.program(), d_program(e.program())
        for _ in range(2):
            args = e.sample(rng)
            d = random_directions(sum(len(flatten(a)[1]) for a in args), 1, 9)[0]
            dargs = [seed(a, part) for a, part in zip(args, _split(args, d))]
            for prog, vals in ((p, args), (dp, dargs)):
                t = subst_many(prog.body, {x: v for (x, _), v in zip(prog.params, vals)})
                for u in trace_terms(t, 3000):
                    if isinstance(u, Return) or is_domain_stuck(u):
                        continue
                    states += 1
                    n = len(applicable_rules(u))
                    multi += n > 1
                    stuck += n == 0
    laws_ok, mismatches = 0, []
    s = 0
    while laws_ok + len(mismatches) < 200:
        inst = law_instance(s, LAWS[s % len(LAWS)])
        s += 1
        a, b = run(inst.lhs, 2000), run(inst.rhs, 2000)
        if isinstance(a, OutOfFuel) or isinstance(b, OutOfFuel):
            continue
        if same_outcome(a, b):
            laws_ok += 1
        else:
            mismatches.append(inst.law)
    ok = multi == 0 and stuck == 0 and not mismatches
    return ok, (
        f"{states} states audited ({multi} ambiguous, {stuck} stuck); laws {laws_ok}/200 identical from {s} draws"
    )


def _split(args, d):
    out, i = [], 0
    for a in args:
        n = len(flatten(a)[1])
        out.append(d[i : i + n])
        i += n
    return out


# -- 10 ---------------------------------------------------------------------


def criterion_10():
    rng = np.random.default_rng(10)
    total = same = 0
    for name in corpus.ITERATE_PROGRAMS:
        e = corpus.entry(name)
        p = e.program()
        rec_body = iterate_to_rec(p.body, p.ctx)
        for _ in range(20):
            args = e.sample(rng)
            sub = {x: a for (x, _), a in zip(p.params, args)}
            a = run(subst_many(p.body, sub), 200_000)
            b = run(subst_many(rec_body, sub), 2_000_000)
            total += 1
            same += same_outcome(a, b)
    return same == total, f"{same}/{total} identical outcomes over {len(corpus.ITERATE_PROGRAMS)} programs"


# -- 11 ---------------------------------------------------------------------


def criterion_11():
    rng = np.random.default_rng(11)
    worst_add = worst_hom = 0.0
    checked = 0
    for name in corpus.FD_PROGRAMS:
        e = corpus.entry(name)
        for _ in range(10):
            args = e.sample(rng)
            n = len(args)
            d1, d2 = (list(rng.standard_normal(n)) for _ in range(2))
            alpha = float(rng.uniform(-3, 3))
            t1, t2 = ad_tangent(name, args, d1), ad_tangent(name, args, d2)
            t12 = ad_tangent(name, args, [a + b for a, b in zip(d1, d2)])
            ta = ad_tangent(name, args, [alpha * a for a in d1])
            for x, y, z in zip(t12, t1, t2):
                worst_add = max(worst_add, abs(x - (y + z)))
            for x, y in zip(ta, t1):
                ref = abs(alpha * y)
                worst_hom = max(worst_hom, abs(x - alpha * y) / ref if ref else abs(x))
            checked += 1
    ok = worst_add <= 1e-9 and worst_hom <= 1e-9
    return ok, f"{checked} points, additivity err {worst_add:.1e} (abs), homogeneity err {worst_hom:.1e} (rel)"


CRITERIA = [
    (1, "macro preserves typing", criterion_1),
    (2, "macro commutes with substitution", criterion_2),
    (3, "AD agrees with finite differences", criterion_3),
    (4, "kinked and partial programs", criterion_4),
    (5, "Taylor series via iterate", criterion_5),
    (6, "recursion via rec", criterion_6),
    (7, "recursive data", criterion_7),
    (8, "registry partials", criterion_8),
    (9, "determinism and beta laws", criterion_9),
    (10, "iterate agrees with its rec encoding", criterion_10),
    (11, "tangent map is linear", criterion_11),
]


def evaluate(number: int, title: str, fn) -> tuple[bool, str]:
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as ex:  # noqa: BLE001
        ok, detail = False, f"raised {type(ex).__name__}: {ex}"
    dt = time.perf_counter() - t0
    RESULTS.append((f"C{number} {title}", ok, detail, dt))
    return ok, detail


@pytest.mark.parametrize("number,title,fn", CRITERIA, ids=[f"C{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, fn):
    ok, detail = evaluate(number, title, fn)
    assert ok, detail


def format_result(name: str, ok: bool, detail: str, dt: float) -> str:
    return f"{'PASS' if ok else 'FAIL'}  {name}: {detail} [{dt:.1f}s]"


if __name__ == "__main__":
    for n, title, fn in CRITERIA:
        evaluate(n, title, fn)
        print(format_result(*RESULTS[-1]), flush=True)
    sys.exit(0 if all(ok for _, ok, _, _ in RESULTS) else 1)
