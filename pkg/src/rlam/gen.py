"""Random well-typed terms for property tests."""

from __future__ import annotations

import random
from fractions import Fraction

from . import logic as L
from .prims import DEFAULT_REGISTRY, PrimRegistry
from .syntax import App, If, Lam, Lit, Pair, Param, PrimApp, Proj, Term, Var
from .types import Arrow, Prod, R, Real, SimpleType, TypingContext, flatten_prod, prod_of

SMOOTH_PRIMS = ("add", "sub", "mul", "neg", "sin", "cos")
POLY_PRIMS = ("add", "mul")


def min_depth(ty: SimpleType) -> int:
    """Depth of the smallest closed introduction form of ``ty``."""
    match ty:
        case Real():
            return 1
        case Prod(a, b):
            return 1 + max(min_depth(a), min_depth(b))
        case Arrow(_, b):
            return 1 + min_depth(b)
    raise TypeError(ty)


def random_type(rng: random.Random, size: int = 2) -> SimpleType:
    if size <= 0 or rng.random() < 0.45:
        return R
    if rng.random() < 0.6:
        return Arrow(random_type(rng, size - 1), random_type(rng, size - 1))
    return Prod(random_type(rng, size - 1), random_type(rng, size - 1))


class TermGen:
    """Type-directed generator; every result has depth at most ``max_depth``."""

    def __init__(self, rng: random.Random, prims=SMOOTH_PRIMS, max_depth: int = 6,
                 conditionals: bool = False, registry: PrimRegistry = DEFAULT_REGISTRY):
        self.rng = rng
        self.prims = [(p, registry[p].arity) for p in prims]
        self.max_depth = max_depth
        self.conditionals = conditionals
        self._n = 0

    def fresh(self) -> str:
        self._n += 1
        return f"v{self._n}"

    def literal(self) -> Lit:
        r = self.rng
        if r.random() < 0.7:
            return Lit(Fraction(r.randint(-3, 3)))
        return Lit(Fraction(r.randint(-9, 9), r.choice((2, 4, 5))))

    def term(self, ctx: TypingContext, ty: SimpleType, depth: int | None = None) -> Term:
        depth = self.max_depth if depth is None else depth
        if depth < min_depth(ty) and not any(t == ty for _, t in ctx):
            raise ValueError(f"depth {depth} too small for {ty}")
        r = self.rng
        options = []
        vars_here = [n for n, t in ctx if t == ty]
        if vars_here:
            options.append(("var", 3))
        if ty == R:
            options.append(("lit", 1))
            if depth >= 2 and self.prims:
                options.append(("prim", 4))
            if depth >= 2 and self.conditionals:
                options.append(("if", 1))
        if isinstance(ty, Prod) and depth >= min_depth(ty):
            options.append(("pair", 2))
        if isinstance(ty, Arrow) and depth >= min_depth(ty):
            options.append(("lam", 3))
        if depth >= 1 + min_depth(ty) + 1:
            options.append(("app", 2))
            options.append(("proj", 1))
        if not options:
            raise ValueError(f"no way to build {ty} at depth {depth}")
        kinds, weights = zip(*options)
        kind = r.choices(kinds, weights)[0]
        sub = depth - 1
        match kind:
            case "var":
                return Var(r.choice(vars_here))
            case "lit":
                return self.literal()
            case "prim":
                p, n = r.choice(self.prims)
                return PrimApp(p, tuple(self.term(ctx, R, sub) for _ in range(n)))
            case "if":
                g = self.term(ctx, R, sub)
                return If(g, self.term(ctx, R, sub), self.term(ctx, R, sub))
            case "pair":
                return Pair(self.term(ctx, ty.left, sub), self.term(ctx, ty.right, sub))
            case "lam":
                doms = flatten_prod(ty.domain) if r.random() < 0.5 else [ty.domain]
                params = tuple(Param(self.fresh(), d) for d in doms)
                inner = ctx
                for p in params:
                    inner = inner.extend(p.name, p.type)
                return Lam(params, self.term(inner, ty.codomain, sub))
            case "app":
                return self._app(ctx, ty, sub)
            case "proj":
                other = R
                if r.random() < 0.5:
                    return Proj(1, self.term(ctx, Prod(ty, other), sub))
                return Proj(2, self.term(ctx, Prod(other, ty), sub))
        raise AssertionError(kind)

    def _app(self, ctx, ty, sub):
        r = self.rng
        nargs = r.choice((1, 1, 2))
        arg_types = [R if r.random() < 0.75 else Arrow(R, R) for _ in range(nargs)]
        fn_ty = Arrow(prod_of(arg_types), ty)
        if sub < max(min_depth(a) for a in [fn_ty] + arg_types):
            arg_types = [R]
            fn_ty = Arrow(R, ty)
        fn = self.term(ctx, fn_ty, sub)
        packed = prod_of(arg_types)
        if len(arg_types) > 1 and sub >= min_depth(packed) and r.random() < 0.3:
            # one packed pair argument has the same type as an argument list
            args = (self.term(ctx, packed, sub),)
        else:
            args = tuple(self.term(ctx, a, sub) for a in arg_types)
        return App(fn, args)


def random_context(rng: random.Random, max_vars: int = 4, first_order: bool = False):
    n = rng.randint(0, max_vars) if not first_order else rng.randint(1, max_vars)
    names = [f"x{i}" for i in range(1, n + 1)]
    if first_order:
        return TypingContext.reals(names)
    return TypingContext((x, random_type(rng, 1) if rng.random() < 0.4 else R) for x in names)


def random_typed_term(rng: random.Random, max_depth: int = 6, max_vars: int = 4,
                      prims=SMOOTH_PRIMS):
    """(context, term, type) with a random context and result type."""
    ctx = random_context(rng, max_vars)
    ty = random_type(rng, 2)
    while min_depth(ty) > max_depth - 2:
        ty = random_type(rng, 2)
    gen = TermGen(rng, prims, max_depth)
    return ctx, gen.term(ctx, ty), ty


def random_first_order(rng: random.Random, max_depth: int = 6, max_vars: int = 4,
                       prims=SMOOTH_PRIMS, conditionals: bool = False):
    """(context of reals, term of type R)."""
    ctx = random_context(rng, max_vars, first_order=True)
    gen = TermGen(rng, prims, max_depth, conditionals)
    return ctx, gen.term(ctx, R)


# -- linear formulas ----------------------------------------------------------


def random_linear_atom(rng: random.Random, variables, coeff: int = 5) -> L.Formula:
    """``e <= c``, ``e < c`` or ``e = c`` with integer coefficients in ``[-coeff, coeff]``."""
    e = L.const(rng.randint(-coeff, coeff))
    for v in rng.sample(list(variables), rng.randint(1, len(variables))):
        e = L.add(e, L.mul(L.const(rng.randint(-coeff, coeff)), L.LVar(v)))
    rhs = L.const(rng.randint(-coeff, coeff))
    kind = rng.choice(("le", "lt", "eq"))
    if kind == "le":
        return L.Leq(e, rhs)
    if kind == "lt":
        return L.lt(e, rhs)
    return L.eq(e, rhs)


def random_linear_formula(rng: random.Random, variables, depth: int = 2,
                          coeff: int = 5) -> L.Formula:
    if depth == 0 or rng.random() < 0.3:
        return random_linear_atom(rng, variables, coeff)
    left = random_linear_formula(rng, variables, depth - 1, coeff)
    right = random_linear_formula(rng, variables, depth - 1, coeff)
    k = rng.random()
    if k < 0.4:
        return L.conj(left, right)
    if k < 0.8:
        return L.disj(left, right)
    return L.negate(left)
