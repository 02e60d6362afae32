"""Coarse-grain surface syntax: AST, lexer and recursive-descent parser.

Program files (``.dcbv``) look like::

    # ReLU, undefined at its kink
    params x: real;
    returns real;
    body let cond = x < 0.0 in if cond then 0.0 else x

Optional ``type Name = <type>;`` declarations may precede ``params``; aliases
are expanded during parsing.

Grammar of terms, loosest first::

    term   ::= fun (x: ty) ... -> term | let x = term in term
             | if term then term else term | ifpos term then term else term
             | case term of arms | iterate term from x = term
             | unroll term as x in term | rec f : ty = term | cmp
    cmp    ::= arith [(< | >) arith]
    arith  ::= mul {(+ | -) mul}
    mul    ::= unary {(* | /) unary}
    unary  ::= - unary | app
    app    ::= prefix | atom {atom}
    prefix ::= (inl[ty] | inr[ty] | roll[ty] | sign | absurd[ty]) (prefix | atom)
    atom   ::= x | number | () | (term) | (term, term, ...) | op(term, ...)
    arms   ::= inl p -> term | inr p -> term     (either order)
             | (p, p) -> term | () -> term

Types: ``real``, ``unit``, ``void``, ``a + b``, ``a * b``, ``a -> b`` and
``mu a. ty``; ``*`` binds tighter than ``+`` which binds tighter than ``->``,
and all three associate to the right.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from . import ops
from .syntax import REAL, UNIT, VOID, Arrow, Mu, Prod, Span, Sum, TVar, Ty

KEYWORDS = frozenset(
    """fun case of let in if then else ifpos iterate from sign roll unroll as rec
    inl inr absurd params returns body type real unit void mu""".split()
)
RESERVED = KEYWORDS | frozenset(ops.SURFACE_OPS)

# ---------------------------------------------------------------------------
# Surface AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class STerm:
    span: Span | None = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class SVar(STerm):
    name: str


@dataclass(frozen=True)
class SLit(STerm):
    value: float


@dataclass(frozen=True)
class SUnit(STerm):
    pass


@dataclass(frozen=True)
class SPair(STerm):
    first: STerm
    second: STerm


@dataclass(frozen=True)
class SInl(STerm):
    payload: STerm
    ty: Ty | None


@dataclass(frozen=True)
class SInr(STerm):
    payload: STerm
    ty: Ty | None


@dataclass(frozen=True)
class SRoll(STerm):
    payload: STerm
    ty: Ty | None


@dataclass(frozen=True)
class SFun(STerm):
    param: str
    param_ty: Ty
    body: STerm


@dataclass(frozen=True)
class SOp(STerm):
    op: str
    args: tuple[STerm, ...]


@dataclass(frozen=True)
class SApp(STerm):
    fn: STerm
    arg: STerm


@dataclass(frozen=True)
class SLet(STerm):
    name: str
    bound: STerm
    body: STerm


@dataclass(frozen=True)
class SIf(STerm):
    cond: STerm
    then: STerm
    orelse: STerm


@dataclass(frozen=True)
class SIfPos(STerm):
    cond: STerm
    then: STerm
    orelse: STerm


@dataclass(frozen=True)
class SLess(STerm):
    left: STerm
    right: STerm


@dataclass(frozen=True)
class SCaseSum(STerm):
    scrutinee: STerm
    left_name: str
    left: STerm
    right_name: str
    right: STerm


@dataclass(frozen=True)
class SCasePair(STerm):
    scrutinee: STerm
    first_name: str
    second_name: str
    body: STerm


@dataclass(frozen=True)
class SCaseUnit(STerm):
    scrutinee: STerm
    body: STerm


@dataclass(frozen=True)
class SAbsurd(STerm):
    scrutinee: STerm
    ty: Ty


@dataclass(frozen=True)
class SIterate(STerm):
    body: STerm
    var: str
    start: STerm


@dataclass(frozen=True)
class SSign(STerm):
    arg: STerm


@dataclass(frozen=True)
class SUnroll(STerm):
    scrutinee: STerm
    name: str
    body: STerm


@dataclass(frozen=True)
class SRec(STerm):
    name: str
    ty: Arrow
    body: STerm


@dataclass(frozen=True)
class SurfaceProgram:
    params: tuple[tuple[str, Ty], ...]
    returns: Ty
    body: STerm
    aliases: tuple[tuple[str, Ty], ...] = ()


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, expected: frozenset[str] = frozenset()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = frozenset(expected)
        exp = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{line}:{col}: {message}{exp}")

    @property
    def span(self) -> Span:
        return Span(self.line, self.col)

    def to_json(self) -> dict:
        return {
            "code": "PARSE",
            "message": self.message,
            "span": {"line": self.line, "col": self.col},
            "expected": sorted(self.expected),
        }


@dataclass(frozen=True)
class Token:
    kind: str  # 'num', 'ident', 'kw', 'op', 'sym', 'eof'
    text: str
    line: int
    col: int

    @property
    def span(self) -> Span:
        return Span(self.line, self.col)


_NUM = r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?"
_TOKEN_RE = re.compile(
    rf"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<const>const_-?{_NUM})
  | (?P<num>{_NUM})
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>->|→|×|μ|[()\[\],:;.|=+\-*/<>])
    """,
    re.VERBOSE,
)
_SYM_ALIASES = {"→": "->", "×": "*", "μ": "mu"}


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind == "ws":
            nl = tok.count("\n")
            if nl:
                line += nl
                line_start = pos + tok.rfind("\n") + 1
        elif kind == "const":
            tokens.append(Token("op", tok, line, col))
        elif kind == "ident":
            if tok in KEYWORDS:
                tokens.append(Token("kw", tok, line, col))
            elif tok in ops.SURFACE_OPS:
                tokens.append(Token("op", tok, line, col))
            else:
                tokens.append(Token("ident", tok, line, col))
        elif kind == "sym":
            tok = _SYM_ALIASES.get(tok, tok)
            tokens.append(Token("kw" if tok == "mu" else "sym", tok, line, col))
        else:
            tokens.append(Token(kind, tok, line, col))
        pos = m.end()
    col = pos - line_start + 1
    tokens.append(Token("eof", "<end of input>", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_OPEN_KEYWORDS = ("fun", "let", "if", "ifpos", "case", "iterate", "unroll", "rec")
_PREFIX_KEYWORDS = ("inl", "inr", "roll", "sign", "absurd")


class Parser:
    def __init__(self, text: str, *, require_ascriptions: bool = True):
        self.tokens = tokenize(text)
        self.pos = 0
        self.aliases: dict[str, Ty] = {}
        self.require_ascriptions = require_ascriptions

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("kw", "sym") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def error(self, message: str, expected=()) -> ParseError:
        t = self.tok
        return ParseError(message, t.line, t.col, frozenset(expected))

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"unexpected {self.tok.text!r}", {text})
        return self.advance()

    def ident(self, *, wildcard: bool = False) -> str:
        t = self.tok
        if t.kind == "ident" and (wildcard or t.text != "_"):
            self.advance()
            return t.text
        raise self.error(f"expected identifier, found {t.text!r}", {"identifier"})

    def eof(self) -> None:
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}", {"<end of input>"})

    # -- programs ----------------------------------------------------------

    def program(self) -> SurfaceProgram:
        aliases = []
        while self.at("type"):
            self.advance()
            name = self.ident()
            self.expect("=")
            ty = self.type_()
            self.expect(";")
            self.aliases[name] = ty
            aliases.append((name, ty))
        self.expect("params")
        params: list[tuple[str, Ty]] = []
        if not self.at(";"):
            while True:
                name = self.ident()
                if name in (p for p, _ in params):
                    raise self.error(f"duplicate parameter {name}")
                self.expect(":")
                params.append((name, self.type_()))
                if not self.at(","):
                    break
                self.advance()
        self.expect(";")
        self.expect("returns")
        ret = self.type_()
        self.expect(";")
        self.expect("body")
        body = self.term()
        self.eof()
        return SurfaceProgram(tuple(params), ret, body, tuple(aliases))

    # -- types -------------------------------------------------------------

    def type_(self) -> Ty:
        left = self.sum_type()
        if self.at("->"):
            self.advance()
            return Arrow(left, self.type_())
        return left

    def sum_type(self) -> Ty:
        left = self.prod_type()
        if self.at("+"):
            self.advance()
            return Sum(left, self.sum_type())
        return left

    def prod_type(self) -> Ty:
        left = self.atom_type()
        if self.at("*"):
            self.advance()
            return Prod(left, self.prod_type())
        return left

    def atom_type(self) -> Ty:
        t = self.tok
        if t.kind == "kw" and t.text in ("real", "unit", "void"):
            self.advance()
            return {"real": REAL, "unit": UNIT, "void": VOID}[t.text]
        if self.at("mu"):
            self.advance()
            a = self.ident()
            self.expect(".")
            return Mu(a, self.type_())
        if self.at("("):
            self.advance()
            ty = self.type_()
            self.expect(")")
            return ty
        if t.kind == "ident" and t.text != "_":
            self.advance()
            return self.aliases.get(t.text, TVar(t.text))
        raise self.error(f"expected a type, found {t.text!r}", {"real", "unit", "void", "mu", "(", "identifier"})

    def ascription(self) -> Ty | None:
        if self.at("["):
            self.advance()
            ty = self.type_()
            self.expect("]")
            return ty
        if self.require_ascriptions:
            raise self.error("missing type ascription", {"["})
        return None

    # -- terms -------------------------------------------------------------

    def term(self) -> STerm:
        t = self.tok
        span = t.span
        if t.kind == "kw" and t.text in _OPEN_KEYWORDS:
            return getattr(self, "_" + t.text)(span)
        return self.comparison()

    def _fun(self, span: Span) -> STerm:
        self.advance()
        binders = []
        while self.at("("):
            self.advance()
            x = self.ident(wildcard=True)
            self.expect(":")
            binders.append((x, self.type_()))
            self.expect(")")
        if not binders:
            raise self.error("expected a parameter", {"("})
        self.expect("->")
        body = self.term()
        for x, ty in reversed(binders):
            body = SFun(x, ty, body, span=span)
        return body

    def _let(self, span: Span) -> STerm:
        self.advance()
        x = self.ident(wildcard=True)
        self.expect("=")
        bound = self.term()
        self.expect("in")
        return SLet(x, bound, self.term(), span=span)

    def _if(self, span: Span) -> STerm:
        self.advance()
        cond = self.term()
        self.expect("then")
        a = self.term()
        self.expect("else")
        return SIf(cond, a, self.term(), span=span)

    def _ifpos(self, span: Span) -> STerm:
        self.advance()
        cond = self.term()
        self.expect("then")
        a = self.term()
        self.expect("else")
        return SIfPos(cond, a, self.term(), span=span)

    def _case(self, span: Span) -> STerm:
        self.advance()
        scrut = self.term()
        self.expect("of")
        if self.at("|"):
            self.advance()
        if self.at("("):
            self.advance()
            if self.at(")"):
                self.advance()
                self.expect("->")
                return SCaseUnit(scrut, self.term(), span=span)
            x = self.ident(wildcard=True)
            self.expect(",")
            y = self.ident(wildcard=True)
            self.expect(")")
            self.expect("->")
            return SCasePair(scrut, x, y, self.term(), span=span)
        arms: dict[str, tuple[str, STerm]] = {}
        for i in range(2):
            if i:
                self.expect("|")
            t = self.tok
            if not (self.at("inl") or self.at("inr")) or t.text in arms:
                want = {"inl", "inr"} - set(arms)
                raise self.error(f"unexpected {t.text!r} in case arms", want | ({"("} if not i else set()))
            self.advance()
            x = self.ident(wildcard=True)
            self.expect("->")
            arms[t.text] = (x, self.term())
        (x, left), (y, right) = arms["inl"], arms["inr"]
        return SCaseSum(scrut, x, left, y, right, span=span)

    def _iterate(self, span: Span) -> STerm:
        self.advance()
        body = self.term()
        self.expect("from")
        x = self.ident()
        self.expect("=")
        return SIterate(body, x, self.term(), span=span)

    def _unroll(self, span: Span) -> STerm:
        self.advance()
        scrut = self.term()
        self.expect("as")
        x = self.ident(wildcard=True)
        self.expect("in")
        return SUnroll(scrut, x, self.term(), span=span)

    def _rec(self, span: Span) -> STerm:
        self.advance()
        f = self.ident()
        self.expect(":")
        ty_tok = self.tok
        ty = self.type_()
        if not isinstance(ty, Arrow):
            raise ParseError("rec requires a function type", ty_tok.line, ty_tok.col, frozenset({"->"}))
        self.expect("=")
        return SRec(f, ty, self.term(), span=span)

    def comparison(self) -> STerm:
        left = self.arith()
        if self.at("<") or self.at(">"):
            op = self.advance()
            right = self.arith()
            if op.text == "<":
                return SLess(left, right, span=op.span)
            return SLess(right, left, span=op.span)
        return left

    def arith(self) -> STerm:
        left = self.mul()
        while self.at("+") or self.at("-"):
            op = self.advance()
            right = self.mul()
            left = SOp("add" if op.text == "+" else "sub", (left, right), span=op.span)
        return left

    def mul(self) -> STerm:
        left = self.unary()
        while self.at("*") or self.at("/"):
            op = self.advance()
            right = self.unary()
            left = SOp("mul" if op.text == "*" else "div", (left, right), span=op.span)
        return left

    def unary(self) -> STerm:
        if self.at("-"):
            t = self.advance()
            if self.tok.kind == "num":
                num = self.advance()
                return SLit(-float(num.text), span=t.span)
            return SOp("neg", (self.unary(),), span=t.span)
        return self.app()

    def _after_atom(self, head: STerm) -> STerm:
        while self.starts_atom():
            arg = self.atom()
            head = SApp(head, arg, span=head.span)
        return head

    def app(self) -> STerm:
        t = self.tok
        span = t.span
        if t.kind == "kw" and t.text in _PREFIX_KEYWORDS:
            self.advance()
            if t.text == "sign":
                return SSign(self.operand(), span=span)
            if t.text == "absurd":
                self.expect("[")
                ty = self.type_()
                self.expect("]")
                return SAbsurd(self.operand(), ty, span=span)
            ty = self.ascription()
            payload = self.operand()
            cls = {"inl": SInl, "inr": SInr, "roll": SRoll}[t.text]
            return cls(payload, ty, span=span)
        if not self.starts_atom():
            raise self.error(
                f"expected a term, found {t.text!r}",
                {"identifier", "number", "(", *_OPEN_KEYWORDS, *_PREFIX_KEYWORDS, "operation"},
            )
        return self._after_atom(self.atom())

    def operand(self) -> STerm:
        """Argument of a prefix form: an atom or another prefix form."""
        t = self.tok
        if t.kind == "kw" and t.text in _PREFIX_KEYWORDS:
            return self.app()
        return self.atom()

    def starts_atom(self) -> bool:
        t = self.tok
        return t.kind in ("ident", "num", "op") or self.at("(")

    def atom(self) -> STerm:
        t = self.tok
        span = t.span
        if t.kind == "ident":
            self.advance()
            if t.text == "_":
                raise ParseError("'_' is only allowed as a binder", t.line, t.col)
            return SVar(t.text, span=span)
        if t.kind == "num":
            self.advance()
            value = float(t.text)
            if not math.isfinite(value):
                raise ParseError(f"literal {t.text} is not a finite real", t.line, t.col)
            return SLit(value, span=span)
        if t.kind == "op":
            self.advance()
            try:
                spec = ops.lookup(t.text)
            except ops.UnknownOp:
                raise ParseError(f"unknown operation {t.text}", t.line, t.col) from None
            self.expect("(")
            args: list[STerm] = []
            if not self.at(")"):
                args.append(self.term())
                while self.at(","):
                    self.advance()
                    args.append(self.term())
            self.expect(")")
            if len(args) != spec.arity:
                raise ParseError(f"{t.text} expects {spec.arity} arguments, got {len(args)}", t.line, t.col)
            return SOp(t.text, tuple(args), span=span)
        if self.at("("):
            self.advance()
            if self.at(")"):
                self.advance()
                return SUnit(span=span)
            items = [self.term()]
            while self.at(","):
                self.advance()
                items.append(self.term())
            if not self.at(")"):
                raise self.error(f"unexpected {self.tok.text!r}", {")", ","})
            self.advance()
            out = items[-1]
            for item in reversed(items[:-1]):
                out = SPair(item, out, span=span)
            return out if len(items) > 1 else items[0]
        raise self.error(f"expected a term, found {t.text!r}", {"identifier", "number", "(", "operation"})


def parse(text: str) -> STerm:
    """Parse a standalone surface term."""
    p = Parser(text)
    t = p.term()
    p.eof()
    return t


def parse_program(text: str) -> SurfaceProgram:
    return Parser(text).program()


def parse_type(text: str, aliases: dict[str, Ty] | None = None) -> Ty:
    p = Parser(text)
    p.aliases = dict(aliases or {})
    ty = p.type_()
    p.eof()
    return ty


def parse_args(text: str, *, require_ascriptions: bool = False) -> list[STerm]:
    """Comma-separated argument terms, e.g. ``2.0, (1.0, 3.0)``."""
    p = Parser(text, require_ascriptions=require_ascriptions)
    if p.tok.kind == "eof":
        return []
    out = [p.term()]
    while p.at(","):
        p.advance()
        out.append(p.term())
    p.eof()
    return out


def surface_names(t: STerm) -> set[str]:
    """All identifiers used as variables or binders in ``t``."""
    acc: set[str] = set()
    stack = [t]
    while stack:
        node = stack.pop()
        for name in ("name", "param", "left_name", "right_name", "first_name", "second_name", "var"):
            val = getattr(node, name, None)
            if isinstance(val, str):
                acc.add(val)
        for f in node.__dataclass_fields__:
            val = getattr(node, f)
            if isinstance(val, STerm):
                stack.append(val)
            elif isinstance(val, tuple):
                stack.extend(x for x in val if isinstance(x, STerm))
    acc.discard("_")
    return acc
