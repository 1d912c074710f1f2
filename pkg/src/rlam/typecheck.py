"""Simple type checking, plus the restricted grammar used for refinement typing."""

from __future__ import annotations

from .prims import DEFAULT_REGISTRY, PrimRegistry
from .syntax import App, If, Lam, Lit, Pair, PrimApp, Proj, Term, Var
from .types import Arrow, Prod, R, Real, SimpleType, TypingContext, flatten_prod, prod_of, show_type


class TypeCheckError(Exception):
    def __init__(self, msg: str, term: Term | None = None, rule: str | None = None):
        self.term = term
        self.rule = rule
        super().__init__(f"[{rule}] {msg}" if rule else msg)


class UnboundVariable(TypeCheckError):
    pass


class ArityMismatch(TypeCheckError):
    pass


class NotFirstOrder(TypeCheckError):
    pass


def typecheck(ctx: TypingContext, t: Term, registry: PrimRegistry = DEFAULT_REGISTRY) -> SimpleType:
    """The unique type of ``t`` under ``ctx``."""
    match t:
        case Var(name):
            ty = ctx.lookup(name)
            if ty is None:
                raise UnboundVariable(f"unbound variable {name!r}", t, "var")
            return ty
        case Lit():
            return R
        case PrimApp(p, args):
            if p not in registry:
                raise TypeCheckError(f"unknown primitive {p!r}", t, "op")
            arity = registry[p].arity
            if len(args) != arity:
                raise ArityMismatch(f"{p} takes {arity} arguments, got {len(args)}", t, "op")
            for a in args:
                ta = typecheck(ctx, a, registry)
                if ta != R:
                    raise TypeCheckError(f"argument of {p} has type {show_type(ta)}, expected R",
                                         a, "op")
            return R
        case Lam(params, body):
            names = [p.name for p in params]
            if not params or len(set(names)) != len(names):
                raise TypeCheckError(f"bad parameter list {names}", t, "abs")
            inner = ctx
            for p in params:
                inner = inner.extend(p.name, p.type)
            return Arrow(prod_of([p.type for p in params]), typecheck(inner, body, registry))
        case App(fn, args):
            tf = typecheck(ctx, fn, registry)
            if not isinstance(tf, Arrow):
                raise TypeCheckError(f"application of non-function of type {show_type(tf)}",
                                     t, "app")
            targ = prod_of([typecheck(ctx, a, registry) for a in args])
            if targ != tf.domain:
                raise TypeCheckError(
                    f"argument type {show_type(targ)} does not match {show_type(tf.domain)}",
                    t, "app")
            return tf.codomain
        case Pair(a, b):
            return Prod(typecheck(ctx, a, registry), typecheck(ctx, b, registry))
        case Proj(i, s):
            ts = typecheck(ctx, s, registry)
            if not isinstance(ts, Prod):
                raise TypeCheckError("projection of non-product", t, "proj")
            return ts.left if i == 1 else ts.right
        case If(g, a, b, _):
            tg = typecheck(ctx, g, registry)
            if tg != R:
                raise TypeCheckError(f"guard has type {show_type(tg)}, expected R", g, "if")
            ta = typecheck(ctx, a, registry)
            tb = typecheck(ctx, b, registry)
            if ta != tb:
                raise TypeCheckError(
                    f"branches have types {show_type(ta)} and {show_type(tb)}", t, "if")
            return ta
    raise TypeCheckError(f"not a term: {t!r}")


def check_restricted(ty: SimpleType) -> bool:
    """Ground R, or arrows taking higher-order arguments followed by reals."""
    match ty:
        case Real():
            return True
        case Arrow(dom, cod):
            items = flatten_prod(dom)
            i = 0
            while i < len(items) and isinstance(items[i], Arrow):
                if not check_restricted(items[i]):
                    return False
                i += 1
            if any(not isinstance(x, Real) for x in items[i:]):
                return False
            return check_restricted(cod)
    return False


def check_first_order(ctx: TypingContext, t: Term, registry: PrimRegistry = DEFAULT_REGISTRY) -> int:
    """Arity n when ``x1:R, ..., xn:R |- t : R``; raises NotFirstOrder otherwise."""
    for name, ty in ctx:
        if ty != R:
            raise NotFirstOrder(f"context binding {name}: {show_type(ty)} is not ground", t,
                                "first-order")
    ty = typecheck(ctx, t, registry)
    if ty != R:
        raise NotFirstOrder(f"result type {show_type(ty)} is not R", t, "first-order")
    return len(ctx)
