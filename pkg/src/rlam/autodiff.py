"""Forward-mode AD as a source-to-source transformation on dual-number pairs."""

from __future__ import annotations

from fractions import Fraction

from .prims import DEFAULT_REGISTRY, PrimRegistry
from .semantics import FLOAT, RealV, evaluate
from .syntax import (App, If, Lam, Lit, Pair, Param, PrimApp, Proj, Term, Var, all_names,
                     fresh_name, substitute_many)
from .typecheck import check_first_order
from .types import Arrow, Prod, R, Real, SimpleType, TypingContext


class ADError(Exception):
    pass


class MissingDerivative(ADError):
    def __init__(self, prim: str):
        self.prim = prim
        super().__init__(f"primitive {prim!r} has no registered partial derivatives")


class ConditionalInAD(ADError):
    def __init__(self):
        super().__init__("conditionals cannot be differentiated")


class DualNaming:
    """Injective x -> dx; no dual name coincides with a source name."""

    def __init__(self, source_names=()):
        self._source = set(source_names)
        self._map: dict[str, str] = {}
        self._taken = set(self._source)
        for n in sorted(self._source):
            self.dual(n)

    def dual(self, name: str) -> str:
        if name in self._map:
            return self._map[name]
        if name not in self._source:
            # a name seen late must not clash with existing duals
            self._source.add(name)
            self._taken.add(name)
        cand = "d" + name
        if cand in self._taken:
            cand = fresh_name(cand, self._taken)
        self._taken.add(cand)
        self._map[name] = cand
        return cand

    def items(self):
        return dict(self._map).items()

    def __repr__(self):
        return f"DualNaming({self._map!r})"


def naming_for(ctx: TypingContext | None, t: Term) -> DualNaming:
    names = set(all_names(t))
    if ctx is not None:
        names |= set(ctx.names)
    return DualNaming(names)


def ad_type(ty: SimpleType) -> SimpleType:
    match ty:
        case Real():
            return Prod(R, R)
        case Prod(a, b):
            return Prod(ad_type(a), ad_type(b))
        case Arrow(a, b):
            return Arrow(ad_type(a), ad_type(b))
    raise ADError(f"not a type: {ty!r}")


def ad_ctx(ctx: TypingContext, naming: DualNaming | None = None) -> TypingContext:
    naming = naming or DualNaming(ctx.names)
    return TypingContext((naming.dual(n), ad_type(ty)) for n, ty in ctx)


_ZERO = Lit(Fraction(0))


def ad_term(t: Term, naming: DualNaming | None = None,
            registry: PrimRegistry = DEFAULT_REGISTRY) -> Term:
    naming = naming or naming_for(None, t)
    return _ad(t, naming, registry)


def _ad(t: Term, naming: DualNaming, registry) -> Term:
    match t:
        case Var(name):
            return Var(naming.dual(name))
        case Lit():
            return Pair(t, _ZERO)
        case Lam(params, body):
            ps = tuple(Param(naming.dual(p.name), ad_type(p.type)) for p in params)
            return Lam(ps, _ad(body, naming, registry))
        case App(fn, args):
            return App(_ad(fn, naming, registry), tuple(_ad(a, naming, registry) for a in args))
        case Pair(a, b):
            return Pair(_ad(a, naming, registry), _ad(b, naming, registry))
        case Proj(i, s):
            return Proj(i, _ad(s, naming, registry))
        case If():
            raise ConditionalInAD()
        case PrimApp(p, args):
            pf = registry[p]
            if pf.partials is None:
                raise MissingDerivative(p)
            duals = [_ad(a, naming, registry) for a in args]
            primals = tuple(Proj(1, d) for d in duals)
            value = PrimApp(p, primals)
            terms = [PrimApp("mul", (PrimApp(d, primals), Proj(2, dt)))
                     for d, dt in zip(pf.partials, duals)]
            if not terms:
                tangent: Term = _ZERO
            else:
                tangent = terms[0]
                for s in terms[1:]:
                    tangent = PrimApp("add", (tangent, s))
            return Pair(value, tangent)
    raise ADError(f"not a term: {t!r}")


def dual_of(target: str, var: str) -> Term:
    """``(var, 1.0)`` when differentiating along ``var``, else ``(var, 0.0)``."""
    return Pair(Var(var), Lit(Fraction(1 if var == target else 0)))


def _seeded(ctx: TypingContext, t: Term, x: str, registry) -> Term:
    naming = naming_for(ctx, t)
    dt = ad_term(t, naming, registry)
    mapping = {naming.dual(n): dual_of(x, n) for n in ctx.names}
    return substitute_many(dt, mapping)


def derive(ctx: TypingContext, t: Term, x: str,
           registry: PrimRegistry = DEFAULT_REGISTRY) -> Term:
    """A term over ``ctx`` denoting the partial derivative of ``t`` along ``x``."""
    return Proj(2, _seeded(ctx, t, x, registry))


def primal(ctx: TypingContext, t: Term, registry: PrimRegistry = DEFAULT_REGISTRY) -> Term:
    """First component of the seeded transform; denotes the same function as ``t``."""
    names = ctx.names
    return Proj(1, _seeded(ctx, t, names[0] if names else "", registry))


def grad_at(t: Term, ctx: TypingContext, point, registry: PrimRegistry = DEFAULT_REGISTRY):
    n = check_first_order(ctx, t, registry)
    if len(point) != n:
        raise ADError(f"expected {n} coordinates, got {len(point)}")
    env = {name: RealV(float(v)) for name, v in zip(ctx.names, point)}
    out = []
    for name in ctx.names:
        v = evaluate(env, derive(ctx, t, name, registry), FLOAT, registry)
        out.append(v.value)
    return out
