"""Environment-passing evaluator.

Base values depend on the evaluation mode: floats by default, exact rationals
for cross-checks, or polynomials when computing the polynomial a term denotes.
Functions take a single argument; a multi-parameter lambda receives its
arguments packed as a right-nested pair, matching its simple type.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Mapping

from .polynomial import Polynomial
from .prims import DEFAULT_REGISTRY, PrimFn, PrimRegistry
from .syntax import App, If, Lam, Lit, Pair, PrimApp, Proj, Term, Var
from .typecheck import check_first_order
from .types import Arrow, Prod, Real, SimpleType, TypingContext


class EvalError(Exception):
    pass


class UnsupportedPrim(EvalError):
    def __init__(self, prim: str, mode: str):
        self.prim = prim
        super().__init__(f"primitive {prim!r} is not supported in {mode} mode")


@dataclass(frozen=True)
class RealV:
    value: Any


@dataclass(frozen=True)
class PairV:
    left: "Value"
    right: "Value"


@dataclass(frozen=True, eq=False)
class FunV:
    fn: Callable[["Value"], "Value"]

    def __call__(self, arg: "Value") -> "Value":
        return self.fn(arg)


Value = RealV | PairV | FunV


def pack(values) -> Value:
    """Right-nested pair of ``values``; a single value is returned as is."""
    values = list(values)
    if not values:
        raise EvalError("cannot pack an empty argument list")
    out = values[-1]
    for v in reversed(values[:-1]):
        out = PairV(v, out)
    return out


def unpack(v: Value, n: int) -> list[Value]:
    out = []
    for _ in range(n - 1):
        if not isinstance(v, PairV):
            raise EvalError(f"expected a tuple of {n} values")
        out.append(v.left)
        v = v.right
    out.append(v)
    return out


# -- modes --------------------------------------------------------------------


class FloatMode:
    name = "float"

    def lit(self, q: Fraction):
        return float(q)

    def prim(self, p: PrimFn, args):
        return p.fn(*args)

    def is_zero(self, v) -> bool:
        return v == 0


class ExactMode:
    name = "exact"

    def lit(self, q: Fraction):
        return Fraction(q)

    def prim(self, p: PrimFn, args):
        if p.exact is None:
            raise UnsupportedPrim(p.name, self.name)
        return Fraction(p.exact(*args))

    def is_zero(self, v) -> bool:
        return v == 0


class PolyMode:
    name = "polynomial"
    _OPS = {
        "add": lambda a, b: a + b,
        "sub": lambda a, b: a - b,
        "mul": lambda a, b: a * b,
        "neg": lambda a: -a,
    }

    def __init__(self, variables):
        self.variables = tuple(variables)

    def lit(self, q: Fraction):
        return Polynomial.constant(self.variables, q)

    def prim(self, p: PrimFn, args):
        op = self._OPS.get(p.name)
        if op is None:
            raise UnsupportedPrim(p.name, self.name)
        return op(*args)

    def is_zero(self, v) -> bool:
        raise EvalError("conditionals have no polynomial denotation")


FLOAT = FloatMode()
EXACT = ExactMode()


# -- evaluation ---------------------------------------------------------------


def evaluate(env: Mapping[str, Value], t: Term, mode=FLOAT,
             registry: PrimRegistry = DEFAULT_REGISTRY) -> Value:
    """The value of ``t`` in ``env``."""
    match t:
        case Var(name):
            try:
                return env[name]
            except KeyError:
                raise EvalError(f"unbound variable {name!r}") from None
        case Lit(q):
            return RealV(mode.lit(q))
        case PrimApp(p, args):
            vals = []
            for a in args:
                v = evaluate(env, a, mode, registry)
                if not isinstance(v, RealV):
                    raise EvalError(f"argument of {p} is not a real")
                vals.append(v.value)
            return RealV(mode.prim(registry[p], vals))
        case Lam(params, body):
            names = [p.name for p in params]
            captured = dict(env)

            def call(arg, names=names, body=body, captured=captured):
                inner = dict(captured)
                inner.update(zip(names, unpack(arg, len(names))))
                return evaluate(inner, body, mode, registry)

            return FunV(call)
        case App(fn, args):
            f = evaluate(env, fn, mode, registry)
            if not isinstance(f, FunV):
                raise EvalError("application of a non-function")
            return f(pack(evaluate(env, a, mode, registry) for a in args))
        case Pair(a, b):
            return PairV(evaluate(env, a, mode, registry), evaluate(env, b, mode, registry))
        case Proj(i, s):
            v = evaluate(env, s, mode, registry)
            if not isinstance(v, PairV):
                raise EvalError("projection of a non-pair")
            return v.left if i == 1 else v.right
        case If(g, a, b, _):
            gv = evaluate(env, g, mode, registry)
            if not isinstance(gv, RealV):
                raise EvalError("guard is not a real")
            branch = b if mode.is_zero(gv.value) else a
            return evaluate(env, branch, mode, registry)
    raise EvalError(f"not a term: {t!r}")


def matches_type(v: Value, ty: SimpleType) -> bool:
    """Shape check; function values are only checked to be functions."""
    match ty:
        case Real():
            return isinstance(v, RealV)
        case Prod(l, r):
            return isinstance(v, PairV) and matches_type(v.left, l) and matches_type(v.right, r)
        case Arrow():
            return isinstance(v, FunV)
    return False


def to_python(v: Value):
    """Floats/Fractions for reals, tuples for pairs, a marker for functions."""
    match v:
        case RealV(x):
            return x
        case PairV(a, b):
            return (to_python(a), to_python(b))
    return "<function>"


def show_value(v: Value) -> str:
    match v:
        case RealV(x):
            return repr(float(x)) if isinstance(x, (int, float, Fraction)) else str(x)
        case PairV(a, b):
            return f"({show_value(a)}, {show_value(b)})"
    return "<function>"


def denote_first_order(t: Term, ctx: TypingContext, mode=FLOAT,
                       registry: PrimRegistry = DEFAULT_REGISTRY):
    """Callable on n reals, for ``x1:R..xn:R |- t : R``."""
    check_first_order(ctx, t, registry)
    names = ctx.names

    def f(*point):
        if len(point) != len(names):
            raise EvalError(f"expected {len(names)} arguments, got {len(point)}")
        env = {n: RealV(x) for n, x in zip(names, point)}
        v = evaluate(env, t, mode, registry)
        return v.value

    return f
