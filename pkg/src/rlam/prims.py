"""Primitive real functions and the registry that names them.

Every primitive is total on R^n. Formulas attached to a primitive speak about
its arguments through the logical variables ``a1 .. an`` and about its result
through ``b`` (see ``arg_var`` and ``RESULT_VAR``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Mapping

from .logic import (
    TOP,
    Formula,
    LVar,
    Not,
    conj,
    const,
    disj,
    eq,
    ge,
    gt,
    lt,
    Leq,
)

RESULT_VAR = "b"


def arg_var(i: int) -> str:
    """Logical variable for the i-th argument (1-based)."""
    return f"a{i}"


def _a(i: int) -> LVar:
    return LVar(arg_var(i))


_b = LVar(RESULT_VAR)


@dataclass(frozen=True)
class ContinuityFact:
    """The primitive is continuous on ``domain`` and maps it into ``image``."""

    domain: Formula
    image: Formula = TOP


@dataclass(frozen=True)
class GuardFacts:
    """Where a {0,1}-valued primitive is 0, is 1, and is continuous."""

    zero: Formula
    one: Formula
    continuity: Formula


@dataclass(frozen=True)
class PrimFn:
    name: str
    arity: int
    fn: Callable[..., float]
    exact: Callable[..., Fraction] | None = None
    partials: tuple[str, ...] | None = None
    facts: tuple[ContinuityFact, ...] = ()
    guard: GuardFacts | None = None
    infix: str | None = None

    def apply(self, args):
        """Exact when every argument is rational and an exact rule exists."""
        if len(args) != self.arity:
            raise TypeError(f"{self.name} expects {self.arity} arguments, got {len(args)}")
        if self.exact is not None and all(isinstance(a, (int, Fraction)) for a in args):
            return self.exact(*args)
        return self.fn(*(float(a) for a in args))

    def continuity_facts(self) -> tuple[ContinuityFact, ...]:
        """Registered facts plus the ones implied by guard metadata."""
        if self.guard is None:
            return self.facts
        b = _b
        g = self.guard
        derived = (
            ContinuityFact(g.one, eq(b, const(1))),
            ContinuityFact(g.zero, eq(b, const(0))),
            ContinuityFact(g.continuity, disj(eq(b, const(0)), eq(b, const(1)))),
        )
        return self.facts + derived


class RegistryError(Exception):
    pass


class PrimRegistry(Mapping[str, PrimFn]):
    """Immutable name -> primitive map, closed under derivative references."""

    def __init__(self, prims, aliases: Mapping[str, str] | None = None):
        self._prims: dict[str, PrimFn] = {}
        for p in prims:
            if p.name in self._prims:
                raise RegistryError(f"duplicate primitive {p.name!r}")
            self._prims[p.name] = p
        for alias, target in (aliases or {}).items():
            if target not in self._prims:
                raise RegistryError(f"alias {alias!r} names unknown primitive {target!r}")
            if alias in self._prims:
                raise RegistryError(f"alias {alias!r} shadows a primitive")
            self._prims[alias] = self._prims[target]
        self._aliases = dict(aliases or {})
        self._check()

    def _check(self) -> None:
        for p in self._prims.values():
            if p.partials is None:
                continue
            if len(p.partials) != p.arity:
                raise RegistryError(f"{p.name}: {len(p.partials)} partials for arity {p.arity}")
            for d in p.partials:
                if d not in self._prims:
                    raise RegistryError(f"{p.name}: partial {d!r} is not registered")
                if self._prims[d].arity != p.arity:
                    raise RegistryError(f"{p.name}: partial {d!r} has the wrong arity")

    def __getitem__(self, name: str) -> PrimFn:
        try:
            return self._prims[name]
        except KeyError:
            raise KeyError(f"unknown primitive {name!r}") from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._prims)

    def __len__(self) -> int:
        return len(self._prims)

    def canonical(self, name: str) -> str:
        return self._aliases.get(name, name)

    def with_aliases(self, aliases: Mapping[str, str]) -> "PrimRegistry":
        base = [p for n, p in self._prims.items() if n not in self._aliases]
        return PrimRegistry(base, {**self._aliases, **aliases})

    def by_infix(self) -> dict[str, str]:
        return {p.infix: n for n, p in self._prims.items() if p.infix and n == p.name}


def load_aliases(registry: PrimRegistry, path: str) -> PrimRegistry:
    """Extend ``registry`` with an ``{"aliases": {name: prim}}`` JSON manifest."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return registry.with_aliases(data.get("aliases", {}))


# -- the default collection --------------------------------------------------


def _const_fn(c):
    return lambda *_: c


def _fr(c):
    return lambda *_: Fraction(c)


def _bool(v: bool):
    return 1.0 if v else 0.0


def _bool_q(v: bool):
    return Fraction(1) if v else Fraction(0)


def _jump(a):
    return -a if a < 0 else a + 1


def _wdiv(w, a):
    return w / (1 - a) if a < 1 else 0 * w


def _wdiv_f(w, a):
    return w / (1.0 - a) if a < 1 else 0.0


def _sgn(a):
    return (a > 0) - (a < 0)


TOP_FACT = ContinuityFact(TOP, TOP)


def _nonneg_args(n: int) -> Formula:
    return conj(*(ge(_a(i), const(0)) for i in range(1, n + 1)))


def _default_prims() -> list[PrimFn]:
    a1, a2, b = _a(1), _a(2), _b
    unit_interval = conj(Leq(const(-1), b), Leq(b, const(1)))
    prims = [
        PrimFn("add", 2, lambda x, y: x + y, lambda x, y: x + y,
               partials=("add_d1", "add_d2"), facts=(TOP_FACT,), infix="+"),
        PrimFn("sub", 2, lambda x, y: x - y, lambda x, y: x - y,
               partials=("sub_d1", "sub_d2"), facts=(TOP_FACT,), infix="-"),
        PrimFn("mul", 2, lambda x, y: x * y, lambda x, y: x * y,
               partials=("mul_d1", "mul_d2"),
               facts=(TOP_FACT, ContinuityFact(_nonneg_args(2), ge(b, const(0)))),
               infix="*"),
        PrimFn("neg", 1, lambda x: -x, lambda x: -x, partials=("neg_d1",), facts=(TOP_FACT,)),
        PrimFn("min", 2, min, min, partials=("min_d1", "min_d2"),
               facts=(TOP_FACT, ContinuityFact(_nonneg_args(2), ge(b, const(0))))),
        PrimFn("max", 2, max, max, partials=("max_d1", "max_d2"),
               facts=(TOP_FACT, ContinuityFact(_nonneg_args(2), ge(b, const(0))))),
        PrimFn("abs", 1, abs, abs, partials=("sgn",),
               facts=(ContinuityFact(TOP, ge(b, const(0))),)),
        PrimFn("sin", 1, math.sin, partials=("cos",), facts=(ContinuityFact(TOP, unit_interval),)),
        PrimFn("cos", 1, math.cos, partials=("cos_d1",),
               facts=(ContinuityFact(TOP, unit_interval),)),
        PrimFn("exp", 1, math.exp, partials=("exp",), facts=(ContinuityFact(TOP, gt(b, const(0))),)),
        # partial derivatives
        PrimFn("add_d1", 2, _const_fn(1.0), _fr(1), facts=(TOP_FACT,)),
        PrimFn("add_d2", 2, _const_fn(1.0), _fr(1), facts=(TOP_FACT,)),
        PrimFn("sub_d1", 2, _const_fn(1.0), _fr(1), facts=(TOP_FACT,)),
        PrimFn("sub_d2", 2, _const_fn(-1.0), _fr(-1), facts=(TOP_FACT,)),
        PrimFn("mul_d1", 2, lambda x, y: y, lambda x, y: y, facts=(TOP_FACT,)),
        PrimFn("mul_d2", 2, lambda x, y: x, lambda x, y: x, facts=(TOP_FACT,)),
        PrimFn("neg_d1", 1, _const_fn(-1.0), _fr(-1), facts=(TOP_FACT,)),
        PrimFn("cos_d1", 1, lambda x: -math.sin(x), facts=(TOP_FACT,)),
        # one-sided conventions at ties; not continuous there
        PrimFn("min_d1", 2, lambda x, y: _bool(x <= y), lambda x, y: _bool_q(x <= y),
               facts=(ContinuityFact(Not(eq(a1, a2))),)),
        PrimFn("min_d2", 2, lambda x, y: _bool(x > y), lambda x, y: _bool_q(x > y),
               facts=(ContinuityFact(Not(eq(a1, a2))),)),
        PrimFn("max_d1", 2, lambda x, y: _bool(x >= y), lambda x, y: _bool_q(x >= y),
               facts=(ContinuityFact(Not(eq(a1, a2))),)),
        PrimFn("max_d2", 2, lambda x, y: _bool(x < y), lambda x, y: _bool_q(x < y),
               facts=(ContinuityFact(Not(eq(a1, a2))),)),
        PrimFn("sgn", 1, lambda x: float(_sgn(x)), lambda x: Fraction(_sgn(x)),
               facts=(ContinuityFact(gt(a1, const(0)), eq(b, const(1))),
                      ContinuityFact(lt(a1, const(0)), eq(b, const(-1))))),
        # comparisons: {0,1}-valued guards
        PrimFn("lt", 2, lambda x, y: _bool(x < y), lambda x, y: _bool_q(x < y),
               guard=GuardFacts(zero=ge(a1, a2), one=lt(a1, a2), continuity=Not(eq(a1, a2))),
               infix="<"),
        PrimFn("le", 2, lambda x, y: _bool(x <= y), lambda x, y: _bool_q(x <= y),
               guard=GuardFacts(zero=gt(a1, a2), one=Leq(a1, a2), continuity=Not(eq(a1, a2))),
               infix="<="),
        PrimFn("eq", 2, lambda x, y: _bool(x == y), lambda x, y: _bool_q(x == y),
               guard=GuardFacts(zero=Not(eq(a1, a2)), one=eq(a1, a2), continuity=Not(eq(a1, a2))),
               infix="="),
        # piecewise functions used as black-box primitives
        PrimFn("jump", 1, _jump, _jump,
               facts=(ContinuityFact(ge(a1, const(0)), ge(b, const(1))),
                      ContinuityFact(lt(a1, const(0)), gt(b, const(0))))),
        PrimFn("wdiv", 2, _wdiv_f, _wdiv,
               facts=(ContinuityFact(lt(a2, const(1))),)),
    ]
    return prims


DEFAULT_REGISTRY = PrimRegistry(_default_prims())
