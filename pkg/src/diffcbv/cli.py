"""``diffcbv``: check, differentiate, run and grad-check .dcbv programs.

Exit codes: 0 success, 1 diagnostics (parse, type or argument errors, or a
failed gradient check), 2 unreadable input, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from .ad import d_program
from .elaborate import ArgumentError, Program, elaborate_program, read_args
from .interp import DEFAULT_BUDGET, apply_program, format_outcome, outcome_json
from .oracle import DIRECTION_SEED, SignatureError, grad_check, leaf_count, random_directions, summarize
from .pretty import format_program, format_type
from .surface import ParseError, parse_program
from .typecheck import TypeCheckError

EXIT_OK, EXIT_DIAG, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3


class Diagnostic(Exception):
    def __init__(self, payload: dict):
        self.payload = payload
        super().__init__(payload.get("message", ""))


def _positive(kind):
    def conv(text: str):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v

    return conv


def _hex(text: str) -> int:
    return int(text, 16)


def _csv(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()] if text.strip() else []


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="diffcbv", description="Forward-mode AD for a fine-grain CBV language.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *, budget=True):
        sp.add_argument("--json", action="store_true", help="machine-readable output only")
        if budget:
            sp.add_argument("--budget", type=_positive(int), default=DEFAULT_BUDGET, help="step budget")

    sp = sub.add_parser("check", help="parse and typecheck a program")
    sp.add_argument("file")
    common(sp, budget=False)

    sp = sub.add_parser("ad", help="print the differentiated program")
    sp.add_argument("file")
    sp.add_argument("--beta-simplify", action="store_true", help="contract let-return redexes in the output")
    common(sp, budget=False)

    sp = sub.add_parser("run", help="run a program on literal arguments")
    sp.add_argument("file")
    sp.add_argument("--args", default="", help='comma-separated literals, e.g. "2.0, (1.0, 3.0)"')
    sp.add_argument("--trace", action="store_true", help="print one line per step to stderr")
    common(sp)

    sp = sub.add_parser("grad-check", help="compare AD against finite differences")
    sp.add_argument("file")
    sp.add_argument("--args", default=None, help="input as literals (any first-order parameters)")
    sp.add_argument("--point", type=_csv, default=None, help="input as CSV (real parameters only)")
    sp.add_argument("--dir", type=_csv, default=None, help="tangent direction as CSV over the input's real leaves")
    sp.add_argument("--seed", type=_hex, default=DIRECTION_SEED, help="hex seed for the random direction")
    sp.add_argument("--tol-abs", type=_positive(float), default=1e-5)
    sp.add_argument("--tol-rel", type=_positive(float), default=1e-4)
    common(sp)

    sp = sub.add_parser("corpus", help="grad-check every bundled example program")
    sp.add_argument("--points", type=_positive(int), default=5, help="sampled inputs per program")
    sp.add_argument("--dirs", type=_positive(int), default=2, help="directions per input")
    sp.add_argument("--seed", type=_hex, default=DIRECTION_SEED, help="hex seed for inputs and directions")
    sp.add_argument("--tol-abs", type=_positive(float), default=1e-5)
    sp.add_argument("--tol-rel", type=_positive(float), default=1e-4)
    sp.add_argument("--figures", metavar="DIR", default=None, help="also write PNG figures to DIR")
    sp.add_argument("--only", action="append", default=None, help="restrict to the named program (repeatable)")
    common(sp)
    return p


# -- helpers ----------------------------------------------------------------


def _load(path: str) -> Program:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise OSError(f"cannot read {path}: {e.strerror or e}") from e
    try:
        prog = elaborate_program(parse_program(text))
        prog.check()
    except ParseError as e:
        raise Diagnostic({**e.to_json(), "file": path}) from None
    except TypeCheckError as e:
        raise Diagnostic({**e.to_json(), "file": path}) from None
    return prog


def _signature(prog: Program) -> str:
    ps = ", ".join(f"{x}: {format_type(t)}" for x, t in prog.params)
    return f"params {ps}; returns {format_type(prog.returns)}"


def _emit(obj, as_json: bool, text: str, out=None) -> None:
    out = out or sys.stdout
    print(json.dumps(obj, indent=2) if as_json else text, file=out)


# -- commands ---------------------------------------------------------------


def cmd_check(args) -> int:
    prog = _load(args.file)
    _emit({"ok": True, "file": args.file, "signature": _signature(prog)}, args.json, f"ok: {_signature(prog)}")
    return EXIT_OK


def cmd_ad(args) -> int:
    prog = _load(args.file)
    d = d_program(prog, simplify=args.beta_simplify)
    text = format_program(d.params, d.returns, d.body)
    _emit({"program": text}, args.json, text.rstrip("\n"))
    return EXIT_OK


def cmd_run(args) -> int:
    prog = _load(args.file)
    try:
        vals = read_args(args.args, prog.params)
    except (ArgumentError, ParseError) as e:
        raise Diagnostic({"code": "ARGS", "message": str(e)}) from None
    trace = None
    if args.trace:

        def trace(i: int, rule: str) -> None:
            print(f"{i}\t{rule}", file=sys.stderr)

    o = apply_program(prog, vals, args.budget, trace)
    _emit(outcome_json(o), args.json, format_outcome(o))
    return EXIT_OK


def _grad_inputs(args, prog: Program):
    if args.args is not None and args.point is not None:
        raise Diagnostic({"code": "ARGS", "message": "give either --args or --point, not both"})
    try:
        if args.point is not None:
            if len(args.point) != len(prog.params):
                raise ArgumentError(f"expected {len(prog.params)} coordinates, got {len(args.point)}")
            vals = read_args(", ".join(repr(x) for x in args.point), prog.params)
        else:
            vals = read_args(args.args or "", prog.params)
    except (ArgumentError, ParseError) as e:
        raise Diagnostic({"code": "ARGS", "message": str(e)}) from None
    n = sum(leaf_count(v) for v in vals)
    direction = args.dir if args.dir is not None else random_directions(n, 1, args.seed)[0]
    if len(direction) != n:
        raise Diagnostic({"code": "ARGS", "message": f"--dir needs {n} entries, got {len(direction)}"})
    return vals, direction


def cmd_grad_check(args) -> int:
    prog = _load(args.file)
    vals, direction = _grad_inputs(args, prog)
    try:
        rep = grad_check(prog, d_program(prog), vals, direction, args.tol_abs, args.tol_rel, args.budget)
    except SignatureError as e:
        raise Diagnostic({"code": "SIGNATURE", "message": str(e)}) from None
    rep.program = args.file
    print(json.dumps(rep.to_json(), indent=2))
    if not args.json:
        s = summarize([rep])
        note = f" ({rep.reason})" if rep.reason else ""
        print(f"{rep.verdict}{note}: {s['pass']} pass, {s['fail']} fail, {s['skip']} skip", file=sys.stderr)
    return EXIT_DIAG if rep.verdict == "fail" else EXIT_OK


def cmd_corpus(args) -> int:
    rng = np.random.default_rng(args.seed)
    entries = corpus_mod.ENTRIES
    if args.only:
        entries = tuple(corpus_mod.entry(n) for n in args.only)
    by_program = {}
    rows = []
    for e in entries:
        reps = corpus_mod.check_entry(
            e,
            args.points,
            args.dirs,
            rng,
            tol_abs=args.tol_abs,
            tol_rel=args.tol_rel,
            budget=min(args.budget, e.budget),
            dir_seed=args.seed,
        )
        by_program[e.name] = reps
        s = summarize(reps)
        worst = max((r.max_abs_err for r in reps if r.fd_tangent is not None), default=0.0)
        rows.append({"program": e.name, **s, "max_abs_err": worst})
    total = summarize([r for reps in by_program.values() for r in reps])
    figures = []
    if args.figures:
        from .plots import render

        figures = [str(p) for p in render(by_program, args.figures, args.tol_abs)]
    if args.json:
        print(json.dumps({"programs": rows, "summary": total, "figures": figures}, indent=2))
    else:
        print(f"{'program':<22} {'checks':>6} {'pass':>5} {'fail':>5} {'skip':>5}  max |ad-fd|")
        for r in rows:
            print(
                f"{r['program']:<22} {r['total']:>6} {r['pass']:>5} {r['fail']:>5} {r['skip']:>5}  {r['max_abs_err']:.2e}"
            )
        print(f"{'total':<22} {total['total']:>6} {total['pass']:>5} {total['fail']:>5} {total['skip']:>5}")
        for f in figures:
            print(f"wrote {f}")
    return EXIT_DIAG if total["fail"] else EXIT_OK


COMMANDS = {"check": cmd_check, "ad": cmd_ad, "run": cmd_run, "grad-check": cmd_grad_check, "corpus": cmd_corpus}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except Diagnostic as d:
        if getattr(args, "json", False):
            print(json.dumps({"error": d.payload}), file=sys.stderr)
        else:
            loc = f"{d.payload['file']}:" if "file" in d.payload else ""
            if "span" in d.payload:
                loc += f"{d.payload['span']['line']}:{d.payload['span']['col']}:"
            print(f"{loc} {d.payload.get('code', 'ERROR')}: {d.payload.get('message', '')}".strip(), file=sys.stderr)
        return EXIT_DIAG
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except KeyError as e:
        print(f"error: {e.args[0] if e.args else e}", file=sys.stderr)
        return EXIT_DIAG
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
