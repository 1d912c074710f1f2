"""Concrete syntax for terms, simple types, refinement types, formulas and judgments.

Terms::

    term  := "\\" param ("," param)* "." term
           | "if" term [annotation] "then" term "else" term
           | arith [("<" | "<=" | "=" | ">" | ">=") arith]
    arith := mul (("+" | "-") mul)*
    mul   := unary ("*" unary)*
    unary := "-" unary | app
    app   := head (atom | "[" term ("," term)* "]")*
    head  := ("fst" | "snd") head | atom
    atom  := ident | number | prim "(" term ("," term)* ")" | "(" term ["," term] ")"

Comments run from ``--`` to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from . import logic as L
from .prims import DEFAULT_REGISTRY, PrimRegistry
from .reftypes import ArrowGround, ArrowHigher, RealRef, RefContext, RefType, erase, validate
from .syntax import App, If, IfAnnotation, Lam, Lit, Pair, Param, PrimApp, Proj, Term, Var
from .types import Arrow, Prod, R, SimpleType


class ParseError(Exception):
    def __init__(self, msg: str, line: int, col: int, expected=()):
        self.msg = msg
        self.line = line
        self.col = col
        self.expected = tuple(sorted(set(expected)))
        where = f"{line}:{col}"
        exp = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{where}: {msg}{exp}")


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "sym", "eof"
    text: str
    line: int
    col: int


_SYMBOLS = ["->", "<=", ">=", "=>", "/\\", "\\/", "\\", "λ", ".", ",", "(", ")", "{", "}",
            "[", "]", ":", ";", "*", "+", "-", "<", ">", "=", "~", "¬", "∧", "∨", "⊤"]
_NUM = re.compile(r"\d+/\d+|\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[^\W\d][\w']*")
KEYWORDS = {"if", "then", "else", "fst", "snd", "in"}


def tokenize(src: str) -> list[Token]:
    toks = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c in " \t\r":
            i, col = i + 1, col + 1
            continue
        if src.startswith("--", i):
            while i < n and src[i] != "\n":
                i += 1
            continue
        m = _NUM.match(src, i)
        if m:
            toks.append(Token("num", m.group(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        if c != "λ":
            m = _IDENT.match(src, i)
            if m:
                toks.append(Token("ident", m.group(), line, col))
                col += m.end() - i
                i = m.end()
                continue
        for s in _SYMBOLS:
            if src.startswith(s, i):
                toks.append(Token("sym", s, line, col))
                i += len(s)
                col += len(s)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


def parse_number(text: str) -> Fraction:
    return Fraction(text)


_UNICODE = {"λ": "\\", "¬": "~", "∧": "/\\", "∨": "\\/", "⊤": "T"}


class Parser:
    def __init__(self, src: str | list[Token], registry: PrimRegistry = DEFAULT_REGISTRY):
        self.toks = tokenize(src) if isinstance(src, str) else src
        self.pos = 0
        self.registry = registry
        self.infix = registry.by_infix()

    # -- token helpers --

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        if t.kind not in ("sym", "ident"):
            return False
        return _UNICODE.get(t.text, t.text) in texts

    def error(self, msg: str, expected=()) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        return ParseError(f"{msg}, found {found}", t.line, t.col, expected)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}", [text])
        t = self.tok
        self.pos += 1
        return t

    def ident(self) -> str:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            raise self.error("expected an identifier", ["identifier"])
        self.pos += 1
        return t.text

    def eof(self) -> None:
        if self.tok.kind != "eof":
            raise self.error("unexpected trailing input", ["end of input"])

    def attempt(self, fn):
        """Run ``fn``; on ParseError rewind and return None."""
        save = self.pos
        try:
            return fn()
        except ParseError:
            self.pos = save
            return None

    # -- simple types --

    def simple_type(self) -> SimpleType:
        left = self._prod_type()
        if self.at("->"):
            self.pos += 1
            return Arrow(left, self.simple_type())
        return left

    def _prod_type(self) -> SimpleType:
        left = self._atom_type()
        if self.at("*"):
            self.pos += 1
            return Prod(left, self._prod_type())
        return left

    def _atom_type(self) -> SimpleType:
        if self.at("R") and self.tok.kind == "ident":
            self.pos += 1
            return R
        if self.at("("):
            self.pos += 1
            t = self.simple_type()
            self.expect(")")
            return t
        raise self.error("expected a type", ["R", "("])

    # -- terms --

    def term(self) -> Term:
        if self.at("\\"):
            self.pos += 1
            params = [self.param()]
            while self.at(","):
                self.pos += 1
                params.append(self.param())
            names = [p.name for p in params]
            if len(set(names)) != len(names):
                raise self.error(f"repeated parameter names {names}")
            self.expect(".")
            return Lam(tuple(params), self.term())
        if self.at("if") and self.tok.kind == "ident":
            self.pos += 1
            guard = self.term()
            ann = self.annotation() if self.at("{") else None
            self.expect("then")
            a = self.term()
            self.expect("else")
            b = self.term()
            return If(guard, a, b, ann)
        return self.comparison()

    def param(self) -> Param:
        name = self.ident()
        self.expect(":")
        simple = self.attempt(self._param_simple)
        if simple is not None:
            return Param(name, simple)
        ref = self.reftype()
        return Param(name, erase(ref), ref)

    def _param_simple(self) -> SimpleType:
        t = self.simple_type()
        if not (self.at(",") or self.at(".")):
            raise self.error("expected ',' or '.' after parameter type", [",", "."])
        return t

    def _binop(self, sym: str, a: Term, b: Term) -> Term:
        if sym == ">":
            return PrimApp(self.infix["<"], (b, a))
        if sym == ">=":
            return PrimApp(self.infix["<="], (b, a))
        if sym not in self.infix:
            raise self.error(f"operator {sym!r} is not bound to a primitive")
        return PrimApp(self.infix[sym], (a, b))

    def comparison(self) -> Term:
        left = self.arith()
        for sym in ("<=", ">=", "<", ">", "="):
            if self.at(sym):
                self.pos += 1
                return self._binop(sym, left, self.arith())
        return left

    def arith(self) -> Term:
        left = self.mul()
        while self.at("+", "-"):
            sym = self.tok.text
            self.pos += 1
            left = self._binop(sym, left, self.mul())
        return left

    def mul(self) -> Term:
        left = self.unary()
        while self.at("*"):
            self.pos += 1
            left = self._binop("*", left, self.unary())
        return left

    def unary(self) -> Term:
        if self.at("-"):
            self.pos += 1
            if self.tok.kind == "num":
                value = -parse_number(self.tok.text)
                self.pos += 1
                return self._app_tail(Lit(value))
            return PrimApp("neg", (self.unary(),))
        return self.application()

    def application(self) -> Term:
        return self._app_tail(self.head())

    def _app_tail(self, fn: Term) -> Term:
        while True:
            if self.at("["):
                self.pos += 1
                args = [self.term()]
                while self.at(","):
                    self.pos += 1
                    args.append(self.term())
                self.expect("]")
                fn = App(fn, tuple(args))
            elif self._starts_atom():
                fn = App(fn, (self.head(),))
            else:
                return fn

    def _starts_atom(self) -> bool:
        t = self.tok
        if t.kind == "num":
            return True
        if t.kind == "ident":
            return t.text not in ("then", "else", "in", "if")
        return self.at("(")

    def head(self) -> Term:
        if self.tok.kind == "ident" and self.tok.text in ("fst", "snd"):
            idx = 1 if self.tok.text == "fst" else 2
            self.pos += 1
            return Proj(idx, self.head())
        return self.atom()

    def atom(self) -> Term:
        t = self.tok
        if t.kind == "num":
            self.pos += 1
            return Lit(parse_number(t.text))
        if t.kind == "ident" and t.text not in KEYWORDS:
            if t.text in self.registry:
                return self.prim_app()
            self.pos += 1
            return Var(t.text)
        if self.at("("):
            self.pos += 1
            first = self.term()
            if self.at(","):
                self.pos += 1
                second = self.term()
                self.expect(")")
                return Pair(first, second)
            self.expect(")")
            return first
        raise self.error("expected a term", ["identifier", "number", "(", "\\", "if"])

    def prim_app(self) -> Term:
        t = self.tok
        name = t.text
        self.pos += 1
        if not self.at("("):
            raise self.error(f"primitive {name!r} must be applied to arguments", ["("])
        self.pos += 1
        args = [self.term()]
        while self.at(","):
            self.pos += 1
            args.append(self.term())
        self.expect(")")
        arity = self.registry[name].arity
        if len(args) != arity:
            raise ParseError(f"primitive {name!r} takes {arity} arguments, got {len(args)}",
                             t.line, t.col)
        return PrimApp(self.registry.canonical(name), tuple(args))

    def annotation(self) -> IfAnnotation:
        keys = {"t": "guard_cont", "t0": "guard_zero", "t1": "guard_one",
                "s": "then_dom", "p": "else_dom"}
        self.expect("{")
        found: dict[str, L.Formula] = {}
        while not self.at("}"):
            key = self.ident()
            if key not in keys:
                raise self.error(f"unknown annotation key {key!r}", list(keys))
            self.expect(":")
            found[keys[key]] = self.formula()
            if self.at(";"):
                self.pos += 1
            elif not self.at("}"):
                raise self.error("expected ';' or '}'", [";", "}"])
        self.expect("}")
        return IfAnnotation(**found)

    # -- formulas --

    def formula(self) -> L.Formula:
        left = self._disj()
        if self.at("=>"):
            self.pos += 1
            return L.implies(left, self.formula())
        return left

    def _disj(self) -> L.Formula:
        parts = [self._conj()]
        while self.at("\\/"):
            self.pos += 1
            parts.append(self._conj())
        return parts[0] if len(parts) == 1 else L.disj(*parts)

    def _conj(self) -> L.Formula:
        left = self._funary()
        while self.at("/\\"):
            self.pos += 1
            left = L.And(left, self._funary())
        return left

    def _funary(self) -> L.Formula:
        if self.at("~"):
            self.pos += 1
            return L.Not(self._funary())
        if self.tok.kind == "ident" and self.tok.text == "T":
            self.pos += 1
            return L.TOP
        if self.tok.kind == "sym" and self.tok.text == "⊤":
            self.pos += 1
            return L.TOP
        if self.tok.kind == "ident" and self.tok.text == "F":
            self.pos += 1
            return L.BOTTOM
        if self.at("("):
            inner = self.attempt(self._paren_formula)
            if inner is not None:
                return inner
        return self._fatom()

    def _paren_formula(self) -> L.Formula:
        self.expect("(")
        f = self.formula()
        self.expect(")")
        if self.at("<=", ">=", "<", ">", "=", "+", "-", "*"):
            raise self.error("parenthesised expression, not formula")
        return f

    def _fatom(self) -> L.Formula:
        a = self.fexpr()
        for sym, build in (("<=", L.Leq), (">=", L.ge), ("<", L.lt), (">", L.gt), ("=", L.eq)):
            if self.at(sym):
                self.pos += 1
                return build(a, self.fexpr())
        raise self.error("expected a comparison", ["<=", ">=", "<", ">", "="])

    def fexpr(self) -> L.Expr:
        left = self._fmul()
        while self.at("+", "-"):
            op = "add" if self.tok.text == "+" else "sub"
            self.pos += 1
            left = L.FnApp(op, (left, self._fmul()))
        return left

    def _fmul(self) -> L.Expr:
        left = self._fneg()
        while self.at("*"):
            self.pos += 1
            left = L.FnApp("mul", (left, self._fneg()))
        return left

    def _fneg(self) -> L.Expr:
        if self.at("-"):
            self.pos += 1
            if self.tok.kind == "num":
                v = -parse_number(self.tok.text)
                self.pos += 1
                return L.Const(v)
            return L.FnApp("neg", (self._fneg(),))
        return self._fatom_expr()

    def _fatom_expr(self) -> L.Expr:
        t = self.tok
        if t.kind == "num":
            self.pos += 1
            return L.Const(parse_number(t.text))
        if t.kind == "ident" and t.text not in ("T", "F"):
            self.pos += 1
            if t.text in self.registry and self.at("("):
                self.pos += 1
                args = [self.fexpr()]
                while self.at(","):
                    self.pos += 1
                    args.append(self.fexpr())
                self.expect(")")
                arity = self.registry[t.text].arity
                if len(args) != arity:
                    raise ParseError(f"function {t.text!r} takes {arity} arguments",
                                     t.line, t.col)
                return L.FnApp(self.registry.canonical(t.text), tuple(args))
            return L.LVar(t.text)
        if self.at("("):
            self.pos += 1
            e = self.fexpr()
            self.expect(")")
            return e
        raise self.error("expected an expression", ["identifier", "number", "("])

    # -- refinement types --

    def reftype(self) -> RefType:
        start = self.tok
        args = self._ref_args()
        if self.at("->"):
            self.pos += 1
            self.expect("[")
            dom = self.formula()
            img = None
            if self.at(";"):
                self.pos += 1
                img = self.formula()
            self.expect("]")
            result = self.reftype()
            if isinstance(result, RealRef):
                t = ArrowGround(tuple(args), dom, L.TOP if img is None else img, result)
            else:
                if img is not None:
                    raise self.error("image formula only allowed for a real result")
                t = ArrowHigher(tuple(args), dom, result)
            try:
                validate(t)
            except Exception as e:
                raise ParseError(str(e), start.line, start.col) from None
            return t
        if len(args) != 1:
            raise self.error("argument list must be followed by '->'", ["->"])
        return args[0]

    def _ref_args(self) -> list[RefType]:
        if self.at("{"):
            return [self._ref_real()]
        if self.at("("):
            self.pos += 1
            items = [self.reftype()]
            while self.at(","):
                self.pos += 1
                items.append(self.reftype())
            self.expect(")")
            return items
        raise self.error("expected a refinement type", ["{", "("])

    def _ref_real(self) -> RealRef:
        self.expect("{")
        v = self.ident()
        if self.at("in"):
            self.pos += 1
            if not (self.tok.kind == "ident" and self.tok.text == "R"):
                raise self.error("expected 'R'", ["R"])
            self.pos += 1
        self.expect("}")
        return RealRef(v)

    def ref_context(self) -> RefContext:
        entries = []
        if self.tok.kind == "eof":
            return RefContext()
        while True:
            name = self.ident()
            self.expect(":")
            entries.append((name, self.reftype()))
            if not self.at(","):
                break
            self.pos += 1
        return RefContext(entries)


# -- entry points -----------------------------------------------------------


def _whole(src: str, rule: str, registry: PrimRegistry = DEFAULT_REGISTRY):
    p = Parser(src, registry)
    out = getattr(p, rule)()
    p.eof()
    return out


def parse(src: str, registry: PrimRegistry = DEFAULT_REGISTRY) -> Term:
    """Parse a term."""
    return _whole(src, "term", registry)


def parse_type(src: str) -> SimpleType:
    return _whole(src, "simple_type")


def parse_formula(src: str, registry: PrimRegistry = DEFAULT_REGISTRY) -> L.Formula:
    return _whole(src, "formula", registry)


def parse_reftype(src: str, registry: PrimRegistry = DEFAULT_REGISTRY) -> RefType:
    return _whole(src, "reftype", registry)


def parse_ref_context(src: str, registry: PrimRegistry = DEFAULT_REGISTRY) -> RefContext:
    return _whole(src, "ref_context", registry)


@dataclass
class SourceFile:
    """A ``.rlam`` file: pragmas plus one term."""

    term: Term
    pragmas: dict[str, str]
    pragma_lines: dict[str, int]


PRAGMAS = {"context", "type", "domain", "image", "args", "vars"}


def parse_file_text(text: str, registry: PrimRegistry = DEFAULT_REGISTRY) -> SourceFile:
    pragmas: dict[str, str] = {}
    lines_of: dict[str, int] = {}
    body_lines = []
    for lineno, raw in enumerate(text.replace("\r\n", "\n").split("\n"), 1):
        stripped = raw.strip()
        if stripped.startswith("@"):
            key, _, rest = stripped[1:].partition(" ")
            if key not in PRAGMAS:
                raise ParseError(f"unknown pragma @{key}", lineno, 1, sorted(PRAGMAS))
            pragmas[key] = rest.strip()
            lines_of[key] = lineno
            body_lines.append("")
        else:
            body_lines.append(raw)
    term = parse("\n".join(body_lines), registry)
    return SourceFile(term, pragmas, lines_of)


def parse_file(path: str, registry: PrimRegistry = DEFAULT_REGISTRY) -> SourceFile:
    with open(path, encoding="utf-8") as fh:
        return parse_file_text(fh.read(), registry)
