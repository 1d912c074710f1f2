"""Pretty printing for terms, formulas and refinement types.

Output is accepted by the parser; ``parse(pretty(t))`` is alpha-equivalent to ``t``.
"""

from __future__ import annotations

from fractions import Fraction

from . import logic as L
from .prims import DEFAULT_REGISTRY, PrimRegistry
from .reftypes import ArrowGround, ArrowHigher, RealRef, RefType
from .syntax import App, If, IfAnnotation, Lam, Lit, Pair, PrimApp, Proj, Term, Var
from .types import show_type

# precedence levels
TOP, CMP, ARITH, MUL, UNARY, APP, ATOM = range(7)

_CMP = {"lt": "<", "le": "<=", "eq": "="}
_ARITH = {"add": "+", "sub": "-"}


def show_number(q: Fraction) -> str:
    """Exact decimal when the expansion terminates, else ``p/q``."""
    q = Fraction(q)
    if q.denominator == 1:
        return f"{q.numerator}.0"
    d = q.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    if d != 1:
        sign = "-" if q < 0 else ""
        return f"{sign}{abs(q.numerator)}/{q.denominator}"
    # scale until integral
    digits = 0
    scaled = q
    while scaled.denominator != 1:
        scaled *= 10
        digits += 1
    n = abs(scaled.numerator)
    s = str(n).rjust(digits + 1, "0")
    sign = "-" if q < 0 else ""
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


def _paren(s: str, cond: bool) -> str:
    return f"({s})" if cond else s


def _after_minus(s: str) -> str:
    # "--" would start a comment
    return f"({s})" if s.startswith("-") else s


def pretty(t: Term, registry: PrimRegistry = DEFAULT_REGISTRY) -> str:
    return _pp(t, TOP)


def _pp(t: Term, level: int) -> str:
    match t:
        case Var(name):
            return name
        case Lit(v):
            s = show_number(v)
            return _paren(s, v < 0 and level > UNARY)
        case Lam(params, body):
            ps = ", ".join(f"{p.name}:{show_reftype(p.ref) if p.ref else show_type(p.type)}"
                           for p in params)
            return _paren(f"\\{ps}. {_pp(body, TOP)}", level > TOP)
        case If(g, a, b, ann):
            annot = "" if ann is None or ann.is_empty() else " " + show_annotation(ann)
            s = f"if {_pp(g, TOP)}{annot} then {_pp(a, TOP)} else {_pp(b, TOP)}"
            return _paren(s, level > TOP)
        case PrimApp(p, (x, y)) if p in _CMP:
            return _paren(f"{_pp(x, ARITH)} {_CMP[p]} {_pp(y, ARITH)}", level > CMP)
        case PrimApp(p, (x, y)) if p in _ARITH:
            return _paren(f"{_pp(x, ARITH)} {_ARITH[p]} {_after_minus(_pp(y, MUL))}", level > ARITH)
        case PrimApp("mul", (x, y)):
            return _paren(f"{_pp(x, MUL)} * {_pp(y, UNARY)}", level > MUL)
        case PrimApp("neg", (x,)) if not isinstance(x, Lit):
            return _paren(f"-{_after_minus(_pp(x, UNARY))}", level > UNARY)
        case PrimApp(p, args):
            return f"{p}({', '.join(_pp(a, TOP) for a in args)})"
        case App(fn, (arg,)):
            return _paren(f"{_pp(fn, APP)} {_pp(arg, ATOM)}", level > APP)
        case App(fn, args):
            inner = ", ".join(_pp(a, TOP) for a in args)
            return _paren(f"{_pp(fn, APP)}[{inner}]", level > APP)
        case Pair(a, b):
            return f"({_pp(a, TOP)}, {_pp(b, TOP)})"
        case Proj(i, s):
            word = "fst" if i == 1 else "snd"
            return _paren(f"{word} {_pp(s, ATOM)}", level > APP)
    raise TypeError(f"not a term: {t!r}")


# -- formulas ---------------------------------------------------------------

_FTOP, _FIMP, _FOR, _FAND, _FNOT = range(5)


def show_expr(e: L.Expr, level: int = 0) -> str:
    # 0: additive, 1: multiplicative, 2: unary/atomic
    match e:
        case L.LVar(name):
            return name
        case L.Const(v):
            s = show_number(v)
            return _paren(s, v < 0 and level > 1)
        case L.FnApp("add", (a, b)):
            return _paren(f"{show_expr(a, 0)} + {show_expr(b, 1)}", level > 0)
        case L.FnApp("sub", (a, b)):
            return _paren(f"{show_expr(a, 0)} - {_after_minus(show_expr(b, 1))}", level > 0)
        case L.FnApp("mul", (a, b)):
            return _paren(f"{show_expr(a, 1)} * {show_expr(b, 2)}", level > 1)
        case L.FnApp("neg", (a,)) if not isinstance(a, L.Const):
            return _paren(f"-{_after_minus(show_expr(a, 2))}", level > 1)
        case L.FnApp(p, args):
            return f"{p}({', '.join(show_expr(a) for a in args)})"
    raise TypeError(f"not an expression: {e!r}")


def _as_or(f: L.Formula):
    """Disjuncts when ``f`` is an encoded disjunction, else None."""
    if isinstance(f, L.Not) and isinstance(f.body, L.And):
        a, b = f.body.left, f.body.right
        if isinstance(a, L.Not) and isinstance(b, L.Not):
            rest = _as_or(b.body)
            return [a.body] + (rest if rest is not None else [b.body])
    return None


def _as_eq(f: L.Formula):
    if isinstance(f, L.And) and isinstance(f.left, L.Leq) and isinstance(f.right, L.Leq):
        if f.left.left == f.right.right and f.left.right == f.right.left:
            return f.left.left, f.left.right
    return None


def show_formula(f: L.Formula, level: int = _FTOP) -> str:
    if f == L.TOP:
        return "T"
    if f == L.BOTTOM:
        return "F"
    pair = _as_eq(f)
    if pair is not None:
        return f"{show_expr(pair[0])} = {show_expr(pair[1])}"
    ors = _as_or(f)
    if ors is not None:
        s = " \\/ ".join(show_formula(d, _FAND) for d in ors)
        return _paren(s, level > _FOR)
    match f:
        case L.Leq(a, b):
            return f"{show_expr(a)} <= {show_expr(b)}"
        case L.Not(L.Leq(a, b)):
            return f"{show_expr(a)} > {show_expr(b)}"
        case L.And(a, b):
            return _paren(f"{show_formula(a, _FAND)} /\\ {show_formula(b, _FNOT)}", level > _FAND)
        case L.Not(body):
            return f"~{show_formula(body, _FNOT + 1)}" if _is_atomic(body) else \
                f"~({show_formula(body)})"
    raise TypeError(f"not a formula: {f!r}")


def _is_atomic(f: L.Formula) -> bool:
    return f in (L.TOP, L.BOTTOM) or isinstance(f, L.Leq)


def show_annotation(ann: IfAnnotation) -> str:
    parts = []
    for key, field in (("t", ann.guard_cont), ("t0", ann.guard_zero), ("t1", ann.guard_one),
                       ("s", ann.then_dom), ("p", ann.else_dom)):
        if field is not None:
            parts.append(f"{key}: {show_formula(field)}")
    return "{" + "; ".join(parts) + "}"


def show_reftype(t: RefType, level: int = 0) -> str:
    match t:
        case RealRef(v):
            return "{" + v + "}"
        case ArrowGround(args, dom, img, res):
            s = f"{_show_args(args)} ->[{show_formula(dom)}; {show_formula(img)}] {show_reftype(res)}"
            return _paren(s, level > 0)
        case ArrowHigher(args, dom, res):
            s = f"{_show_args(args)} ->[{show_formula(dom)}] {show_reftype(res)}"
            return _paren(s, level > 0)
    raise TypeError(f"not a refinement type: {t!r}")


def _show_args(args) -> str:
    if len(args) == 1:
        return show_reftype(args[0], 1)
    return "(" + ", ".join(show_reftype(a) for a in args) + ")"
