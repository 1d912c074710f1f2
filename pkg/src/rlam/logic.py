"""Formulas over logical variables, truth domains and linear normal forms.

The core connectives are top, ``e <= e``, conjunction and negation; everything
else (disjunction, implication, strict and equality atoms) is built from them
by the helper constructors below.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union


class FormulaError(Exception):
    pass


# -- expressions ------------------------------------------------------------


@dataclass(frozen=True)
class LVar:
    name: str


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class FnApp:
    prim: str
    args: tuple["Expr", ...]


Expr = Union[LVar, Const, FnApp]


def const(v) -> Const:
    return Const(Fraction(v))


def add(a: Expr, b: Expr) -> Expr:
    return FnApp("add", (a, b))


def sub(a: Expr, b: Expr) -> Expr:
    return FnApp("sub", (a, b))


def mul(a: Expr, b: Expr) -> Expr:
    return FnApp("mul", (a, b))


def neg(a: Expr) -> Expr:
    return FnApp("neg", (a,))


# -- formulas ---------------------------------------------------------------


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Leq:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Not:
    body: "Formula"


Formula = Union[Top, Leq, And, Not]

TOP = Top()
BOTTOM = Not(TOP)


def conj(*fs: Formula) -> Formula:
    """Conjunction of any number of formulas, dropping top."""
    parts = [f for f in fs if f != TOP]
    if not parts:
        return TOP
    out = parts[-1]
    for f in reversed(parts[:-1]):
        out = And(f, out)
    return out


def disj(*fs: Formula) -> Formula:
    if not fs:
        return BOTTOM
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = Not(And(Not(f), Not(out)))
    return out


def negate(f: Formula) -> Formula:
    """``Not(f)`` without stacking double negations."""
    return f.body if isinstance(f, Not) else Not(f)


def implies(a: Formula, b: Formula) -> Formula:
    return disj(negate(a), b)


def lt(a: Expr, b: Expr) -> Formula:
    return Not(Leq(b, a))


def ge(a: Expr, b: Expr) -> Formula:
    return Leq(b, a)


def gt(a: Expr, b: Expr) -> Formula:
    return Not(Leq(a, b))


def eq(a: Expr, b: Expr) -> Formula:
    return And(Leq(a, b), Leq(b, a))


def conjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, And):
        return conjuncts(f.left) + conjuncts(f.right)
    if f == TOP:
        return []
    return [f]


# -- variables and substitution ---------------------------------------------


def expr_vars(e: Expr) -> set[str]:
    match e:
        case LVar(name):
            return {name}
        case Const():
            return set()
        case FnApp(_, args):
            out: set[str] = set()
            for a in args:
                out |= expr_vars(a)
            return out
    raise FormulaError(f"not an expression: {e!r}")


def formula_vars(f: Formula) -> set[str]:
    match f:
        case Top():
            return set()
        case Leq(a, b):
            return expr_vars(a) | expr_vars(b)
        case And(a, b):
            return formula_vars(a) | formula_vars(b)
        case Not(a):
            return formula_vars(a)
    raise FormulaError(f"not a formula: {f!r}")


def subst_expr(e: Expr, sub_map: Mapping[str, Expr]) -> Expr:
    match e:
        case LVar(name):
            return sub_map.get(name, e)
        case Const():
            return e
        case FnApp(p, args):
            return FnApp(p, tuple(subst_expr(a, sub_map) for a in args))
    raise FormulaError(f"not an expression: {e!r}")


def subst_formula(f: Formula, sub_map: Mapping[str, Expr]) -> Formula:
    match f:
        case Top():
            return f
        case Leq(a, b):
            return Leq(subst_expr(a, sub_map), subst_expr(b, sub_map))
        case And(a, b):
            return And(subst_formula(a, sub_map), subst_formula(b, sub_map))
        case Not(a):
            return Not(subst_formula(a, sub_map))
    raise FormulaError(f"not a formula: {f!r}")


def rename(f: Formula, renaming: Mapping[str, str]) -> Formula:
    return subst_formula(f, {k: LVar(v) for k, v in renaming.items()})


# -- satisfaction -----------------------------------------------------------


def eval_expr(e: Expr, sigma: Mapping[str, object], registry=None):
    """Value of ``e`` under ``sigma``; exact while every step stays rational."""
    match e:
        case LVar(name):
            if name not in sigma:
                raise FormulaError(f"assignment undefined on {name!r}")
            return sigma[name]
        case Const(v):
            return v
        case FnApp(p, args):
            if registry is None:
                from .prims import DEFAULT_REGISTRY as registry
            vals = [eval_expr(a, sigma, registry) for a in args]
            return registry[p].apply(vals)
    raise FormulaError(f"not an expression: {e!r}")


def satisfies(sigma: Mapping[str, object], f: Formula, registry=None) -> bool:
    """``sigma |= f``."""
    match f:
        case Top():
            return True
        case Leq(a, b):
            return eval_expr(a, sigma, registry) <= eval_expr(b, sigma, registry)
        case And(a, b):
            return satisfies(sigma, a, registry) and satisfies(sigma, b, registry)
        case Not(a):
            return not satisfies(sigma, a, registry)
    raise FormulaError(f"not a formula: {f!r}")


def truth_domain_member(f: Formula, sigma: Mapping[str, object], registry=None) -> bool:
    missing = formula_vars(f) - set(sigma)
    if missing:
        raise FormulaError(f"assignment undefined on {sorted(missing)}")
    return satisfies(sigma, f, registry)


def truth_domain(f: Formula, variables: list[str], registry=None):
    """Membership predicate for the truth domain of ``f`` w.r.t. ``variables``."""
    extra = formula_vars(f) - set(variables)
    if extra:
        raise FormulaError(f"formula mentions {sorted(extra)} outside {variables}")

    def member(point) -> bool:
        return satisfies(dict(zip(variables, point)), f, registry)

    return member


# -- linear forms -----------------------------------------------------------


@dataclass(frozen=True)
class Linear:
    """``sum(coeffs[v] * v) + constant`` with exact rational coefficients."""

    coeffs: tuple[tuple[str, Fraction], ...]
    constant: Fraction

    @staticmethod
    def make(coeffs: Mapping[str, Fraction], constant) -> "Linear":
        items = tuple(sorted((v, Fraction(c)) for v, c in coeffs.items() if c != 0))
        return Linear(items, Fraction(constant))

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.coeffs)

    def is_const(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "Linear") -> "Linear":
        d = self.as_dict()
        for v, c in other.coeffs:
            d[v] = d.get(v, 0) + c
        return Linear.make(d, self.constant + other.constant)

    def scale(self, k: Fraction) -> "Linear":
        return Linear.make({v: c * k for v, c in self.coeffs}, self.constant * k)

    def __neg__(self) -> "Linear":
        return self.scale(Fraction(-1))

    def __sub__(self, other: "Linear") -> "Linear":
        return self + (-other)

    def value(self, sigma: Mapping[str, object]):
        return sum((c * sigma[v] for v, c in self.coeffs), self.constant)


def linearize(e: Expr) -> Linear | None:
    """Linear form of ``e``, or None when ``e`` is not rational-linear."""
    match e:
        case LVar(name):
            return Linear.make({name: Fraction(1)}, 0)
        case Const(v):
            return Linear.make({}, v)
        case FnApp("add", (a, b)):
            la, lb = linearize(a), linearize(b)
            return None if la is None or lb is None else la + lb
        case FnApp("sub", (a, b)):
            la, lb = linearize(a), linearize(b)
            return None if la is None or lb is None else la - lb
        case FnApp("neg", (a,)):
            la = linearize(a)
            return None if la is None else -la
        case FnApp("mul", (a, b)):
            la, lb = linearize(a), linearize(b)
            if la is None or lb is None:
                return None
            if la.is_const():
                return lb.scale(la.constant)
            if lb.is_const():
                return la.scale(lb.constant)
            return None
    return None


def is_linear(f: Formula) -> bool:
    match f:
        case Top():
            return True
        case Leq(a, b):
            return linearize(a) is not None and linearize(b) is not None
        case And(a, b):
            return is_linear(a) and is_linear(b)
        case Not(a):
            return is_linear(a)
    return False
