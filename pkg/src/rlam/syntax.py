"""Terms of the calculus: construction, binding, substitution, alpha-equivalence."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Union

from .logic import Formula
from .reftypes import RefType
from .types import SimpleType


@dataclass(frozen=True)
class Param:
    name: str
    type: SimpleType
    ref: RefType | None = None


@dataclass(frozen=True)
class IfAnnotation:
    """Optional formulas for the conditional rule; None means "synthesize"."""

    guard_cont: Formula | None = None
    guard_zero: Formula | None = None
    guard_one: Formula | None = None
    then_dom: Formula | None = None
    else_dom: Formula | None = None

    def is_empty(self) -> bool:
        return all(f is None for f in (self.guard_cont, self.guard_zero, self.guard_one,
                                      self.then_dom, self.else_dom))


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lit:
    value: Fraction


@dataclass(frozen=True)
class PrimApp:
    prim: str
    args: tuple["Term", ...]


@dataclass(frozen=True)
class Lam:
    params: tuple[Param, ...]
    body: "Term"


@dataclass(frozen=True)
class App:
    fn: "Term"
    args: tuple["Term", ...]


@dataclass(frozen=True)
class Pair:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Proj:
    index: int
    term: "Term"

    def __post_init__(self):
        if self.index not in (1, 2):
            raise ValueError(f"projection index must be 1 or 2, got {self.index}")


@dataclass(frozen=True)
class If:
    guard: "Term"
    then: "Term"
    orelse: "Term"
    ann: IfAnnotation | None = None


Term = Union[Var, Lit, PrimApp, Lam, App, Pair, Proj, If]


def lit(v) -> Lit:
    return Lit(Fraction(v))


def prim(name: str, *args: Term) -> PrimApp:
    return PrimApp(name, tuple(args))


def lam(params, body: Term) -> Lam:
    """``params`` is a list of (name, type) or Param."""
    ps = tuple(p if isinstance(p, Param) else Param(*p) for p in params)
    return Lam(ps, body)


def app(fn: Term, *args: Term) -> App:
    return App(fn, tuple(args))


def fst(t: Term) -> Proj:
    return Proj(1, t)


def snd(t: Term) -> Proj:
    return Proj(2, t)


# -- traversal --------------------------------------------------------------


def children(t: Term) -> tuple[Term, ...]:
    match t:
        case Var() | Lit():
            return ()
        case PrimApp(_, args):
            return args
        case Lam(_, body):
            return (body,)
        case App(fn, args):
            return (fn,) + args
        case Pair(a, b):
            return (a, b)
        case Proj(_, s):
            return (s,)
        case If(g, a, b, _):
            return (g, a, b)
    raise TypeError(f"not a term: {t!r}")


def subterms(t: Term) -> Iterator[Term]:
    yield t
    for c in children(t):
        yield from subterms(c)


def size(t: Term) -> int:
    return sum(1 for _ in subterms(t))


def depth(t: Term) -> int:
    cs = children(t)
    return 1 + max((depth(c) for c in cs), default=0)


def has_conditional(t: Term) -> bool:
    return any(isinstance(s, If) for s in subterms(t))


def prims_used(t: Term) -> set[str]:
    return {s.prim for s in subterms(t) if isinstance(s, PrimApp)}


def free_vars(t: Term) -> set[str]:
    match t:
        case Var(name):
            return {name}
        case Lam(params, body):
            return free_vars(body) - {p.name for p in params}
    out: set[str] = set()
    for c in children(t):
        out |= free_vars(c)
    return out


def all_names(t: Term) -> set[str]:
    """Free and bound variable names."""
    out = set()
    for s in subterms(t):
        if isinstance(s, Var):
            out.add(s.name)
        elif isinstance(s, Lam):
            out.update(p.name for p in s.params)
    return out


# -- fresh names ------------------------------------------------------------

_counter = itertools.count(1)
_SUFFIX = re.compile(r"'\d+$")


def fresh_name(base: str, avoid) -> str:
    """``base`` with a ``'N`` suffix from a global counter, outside ``avoid``."""
    stem = _SUFFIX.sub("", base)
    while True:
        cand = f"{stem}'{next(_counter)}"
        if cand not in avoid:
            return cand


# -- substitution -----------------------------------------------------------


def _map_children(t: Term, f) -> Term:
    match t:
        case Var() | Lit():
            return t
        case PrimApp(p, args):
            return PrimApp(p, tuple(f(a) for a in args))
        case App(fn, args):
            return App(f(fn), tuple(f(a) for a in args))
        case Pair(a, b):
            return Pair(f(a), f(b))
        case Proj(i, s):
            return Proj(i, f(s))
        case If(g, a, b, ann):
            return If(f(g), f(a), f(b), ann)
    raise TypeError(f"cannot map over {t!r}")


def substitute_many(s: Term, mapping: Mapping[str, Term]) -> Term:
    """Simultaneous capture-avoiding substitution."""
    mapping = {k: v for k, v in mapping.items()}
    if not mapping:
        return s
    incoming = set()
    for v in mapping.values():
        incoming |= free_vars(v)
    return _subst(s, mapping, incoming)


def _subst(s: Term, mapping: dict[str, Term], incoming: set[str]) -> Term:
    match s:
        case Var(name):
            return mapping.get(name, s)
        case Lam(params, body):
            bound = {p.name for p in params}
            live = {k: v for k, v in mapping.items() if k not in bound}
            if not live:
                return s
            fv_body = free_vars(body)
            if not any(k in fv_body for k in live):
                return s
            live_incoming = set()
            for v in live.values():
                live_incoming |= free_vars(v)
            new_params = []
            renames: dict[str, Term] = {}
            avoid = live_incoming | fv_body | all_names(body) | set(live)
            for p in params:
                if p.name in live_incoming:
                    nn = fresh_name(p.name, avoid)
                    avoid.add(nn)
                    renames[p.name] = Var(nn)
                    new_params.append(Param(nn, p.type, p.ref))
                else:
                    new_params.append(p)
            if renames:
                body = _subst(body, renames, {r.name for r in renames.values()})
            return Lam(tuple(new_params), _subst(body, live, live_incoming))
    return _map_children(s, lambda c: _subst(c, mapping, incoming))


def substitute(s: Term, x: str, t: Term) -> Term:
    """``s[t/x]``."""
    return substitute_many(s, {x: t})


# -- alpha-equivalence ------------------------------------------------------


def alpha_equiv(s: Term, t: Term) -> bool:
    return _alpha(s, t, {}, {}, [0])


def _alpha(s, t, env_s: dict, env_t: dict, lvl) -> bool:
    match s, t:
        case Var(a), Var(b):
            la, lb = env_s.get(a), env_t.get(b)
            if la is None and lb is None:
                return a == b
            return la == lb
        case Lit(a), Lit(b):
            return a == b
        case PrimApp(p, xs), PrimApp(q, ys):
            return p == q and len(xs) == len(ys) and all(
                _alpha(x, y, env_s, env_t, lvl) for x, y in zip(xs, ys))
        case Lam(ps, b1), Lam(qs, b2):
            if len(ps) != len(qs):
                return False
            if any(p.type != q.type or p.ref != q.ref for p, q in zip(ps, qs)):
                return False
            es, et = dict(env_s), dict(env_t)
            for p, q in zip(ps, qs):
                lvl[0] += 1
                es[p.name] = lvl[0]
                et[q.name] = lvl[0]
            return _alpha(b1, b2, es, et, lvl)
        case App(f, xs), App(g, ys):
            return len(xs) == len(ys) and _alpha(f, g, env_s, env_t, lvl) and all(
                _alpha(x, y, env_s, env_t, lvl) for x, y in zip(xs, ys))
        case Pair(a1, b1), Pair(a2, b2):
            return _alpha(a1, a2, env_s, env_t, lvl) and _alpha(b1, b2, env_s, env_t, lvl)
        case Proj(i, a), Proj(j, b):
            return i == j and _alpha(a, b, env_s, env_t, lvl)
        case If(g1, a1, b1, n1), If(g2, a2, b2, n2):
            return (_norm_ann(n1) == _norm_ann(n2)
                    and _alpha(g1, g2, env_s, env_t, lvl)
                    and _alpha(a1, a2, env_s, env_t, lvl)
                    and _alpha(b1, b2, env_s, env_t, lvl))
    return False


def _norm_ann(a: IfAnnotation | None):
    return None if a is None or a.is_empty() else a


# -- freshening -------------------------------------------------------------


def freshen(t: Term) -> Term:
    """Rename binders so every bound name is unique and differs from free names.

    Only clashing binders are renamed, so the pass is idempotent.
    """
    used = set(free_vars(t))
    return _freshen(t, {}, used)


def _freshen(t: Term, ren: dict[str, str], used: set[str]) -> Term:
    match t:
        case Var(name):
            return Var(ren.get(name, name))
        case Lam(params, body):
            ren = dict(ren)
            new_params = []
            for p in params:
                name = p.name
                if name in used:
                    name = fresh_name(name, used | all_names(body))
                used.add(name)
                ren[p.name] = name
                new_params.append(Param(name, p.type, p.ref))
            return Lam(tuple(new_params), _freshen(body, ren, used))
    return _map_children(t, lambda c: _freshen(c, ren, used))
