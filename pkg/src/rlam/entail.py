"""Entailment between formulas.

Linear atoms are decided exactly by Fourier-Motzkin elimination over the
rationals with strict and non-strict bounds tracked separately. Non-linear
subterms are abstracted into fresh variables, which can only make a formula
easier to satisfy, so an unsatisfiable abstraction proves validity. When the
abstraction is satisfiable a sampling refuter looks for a concrete witness.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

from .logic import (
    TOP,
    And,
    Expr,
    FnApp,
    Formula,
    Leq,
    Linear,
    Not,
    Top,
    formula_vars,
    is_linear,
    linearize,
    satisfies,
)


@dataclass(frozen=True)
class Valid:
    def __str__(self) -> str:
        return "valid"


@dataclass(frozen=True)
class Invalid:
    witness: dict

    def __str__(self) -> str:
        shown = ", ".join(f"{k} -> {v}" for k, v in sorted(self.witness.items()))
        return f"invalid (witness {shown or 'empty assignment'})"


@dataclass(frozen=True)
class Unknown:
    reason: str

    def __str__(self) -> str:
        return f"unknown ({self.reason})"


Entailment3 = Union[Valid, Invalid, Unknown]

VALID = Valid()


# -- constraints ------------------------------------------------------------


@dataclass(frozen=True)
class Constraint:
    """``lin < 0`` when strict, else ``lin <= 0``."""

    lin: Linear
    strict: bool

    def holds(self, sigma: Mapping[str, Fraction]) -> bool:
        v = self.lin.value(sigma)
        return v < 0 if self.strict else v <= 0


def _normalize(c: Constraint) -> Constraint:
    # scale so the leading coefficient has magnitude 1; keeps dedup effective
    if not c.lin.coeffs:
        return c
    k = abs(c.lin.coeffs[0][1])
    return Constraint(c.lin.scale(1 / k), c.strict)


def _trivial(c: Constraint) -> bool | None:
    """True/False for variable-free constraints, None otherwise."""
    if c.lin.coeffs:
        return None
    return c.lin.constant < 0 if c.strict else c.lin.constant <= 0


def eliminate(cons: list[Constraint], var: str) -> list[Constraint] | None:
    """One Fourier-Motzkin step; None signals a contradiction."""
    pos, neg, rest = [], [], []
    for c in cons:
        a = c.lin.as_dict().get(var, 0)
        if a > 0:
            pos.append((a, c))
        elif a < 0:
            neg.append((a, c))
        else:
            rest.append(c)
    out = set(rest)
    for (ap, p), (an, n) in itertools.product(pos, neg):
        lin = p.lin.scale(1 / ap) + n.lin.scale(1 / -an)
        new = _normalize(Constraint(lin, p.strict or n.strict))
        t = _trivial(new)
        if t is False:
            return None
        if t is None:
            out.add(new)
    return list(out)


def _pick(lo, lo_strict, hi, hi_strict) -> Fraction:
    """A simple rational inside the (possibly half-open) interval."""

    def ok(v):
        if lo is not None and (v < lo or (lo_strict and v == lo)):
            return False
        if hi is not None and (v > hi or (hi_strict and v == hi)):
            return False
        return True

    if ok(Fraction(0)):
        return Fraction(0)
    if lo is not None and hi is None:
        return Fraction(math.floor(lo) + 1) if lo_strict or lo != math.floor(lo) else lo
    if hi is not None and lo is None:
        return Fraction(math.ceil(hi) - 1) if hi_strict or hi != math.ceil(hi) else hi
    # bounded interval: nearest integer to zero, else the midpoint
    for cand in sorted((Fraction(math.ceil(lo)), Fraction(math.floor(hi))), key=abs):
        if ok(cand):
            return cand
    if lo == hi:
        return lo
    return (lo + hi) / 2


def fm_model(cons: list[Constraint]) -> dict[str, Fraction] | None:
    """A rational model of the conjunction, or None when unsatisfiable."""
    cons = [_normalize(c) for c in cons]
    for c in cons:
        if _trivial(c) is False:
            return None
    cons = [c for c in cons if _trivial(c) is None]
    variables = sorted({v for c in cons for v, _ in c.lin.coeffs})
    stages = [cons]
    for v in variables:
        nxt = eliminate(stages[-1], v)
        if nxt is None:
            return None
        stages.append(nxt)
    model: dict[str, Fraction] = {}
    for i in reversed(range(len(variables))):
        v = variables[i]
        lo = hi = None
        lo_strict = hi_strict = False
        for c in stages[i]:
            d = c.lin.as_dict()
            a = d.pop(v, 0)
            if a == 0:
                continue
            rest = sum((k * model[u] for u, k in d.items()), c.lin.constant)
            bound = -rest / a
            if a > 0:
                if hi is None or bound < hi or (bound == hi and c.strict):
                    hi, hi_strict = bound, c.strict
            else:
                if lo is None or bound > lo or (bound == lo and c.strict):
                    lo, lo_strict = bound, c.strict
        model[v] = _pick(lo, lo_strict, hi, hi_strict)
    return model


# -- search -----------------------------------------------------------------


@dataclass(frozen=True)
class _Or:
    left: object
    right: object


@dataclass(frozen=True)
class _And:
    left: object
    right: object


_FALSE = "false"
_TRUE = "true"


class _Abstraction:
    """Maps non-linear subterms to fresh variables, consistently."""

    def __init__(self, taken: set[str]):
        self.taken = set(taken)
        self.table: dict[Expr, str] = {}

    def linear(self, e: Expr) -> Linear:
        lin = linearize(e)
        if lin is not None:
            return lin
        match e:
            case FnApp("add", (a, b)):
                return self.linear(a) + self.linear(b)
            case FnApp("sub", (a, b)):
                return self.linear(a) - self.linear(b)
            case FnApp("neg", (a,)):
                return -self.linear(a)
            case FnApp("mul", (a, b)):
                la, lb = self.linear(a), self.linear(b)
                if la.is_const():
                    return lb.scale(la.constant)
                if lb.is_const():
                    return la.scale(lb.constant)
        if e not in self.table:
            n = len(self.table)
            name = f"#nl{n}"
            while name in self.taken:
                n += 1
                name = f"#nl{n}"
            self.taken.add(name)
            self.table[e] = name
        return Linear.make({self.table[e]: Fraction(1)}, 0)


def _nnf(f: Formula, positive: bool, ab: _Abstraction):
    match f:
        case Top():
            return _TRUE if positive else _FALSE
        case Leq(a, b):
            lin = ab.linear(a) - ab.linear(b)
            if positive:
                return Constraint(lin, False)
            return Constraint(-lin, True)
        case And(a, b):
            l, r = _nnf(a, positive, ab), _nnf(b, positive, ab)
            return _And(l, r) if positive else _Or(l, r)
        case Not(a):
            return _nnf(a, not positive, ab)
    raise TypeError(f"not a formula: {f!r}")


class _Budget(Exception):
    pass


def _search(goals, cons, budget):
    budget[0] -= 1
    if budget[0] < 0:
        raise _Budget
    while goals:
        g, goals = goals[0], goals[1:]
        if g is _TRUE:
            continue
        if g is _FALSE:
            return None
        if isinstance(g, Constraint):
            t = _trivial(g)
            if t is False:
                return None
            if t is None:
                cons = cons + [g]
            continue
        if isinstance(g, _And):
            goals = [g.left, g.right] + goals
            continue
        if isinstance(g, _Or):
            for branch in (g.left, g.right):
                m = _search([branch] + goals, cons, budget)
                if m is not None:
                    return m
            return None
    return fm_model(cons)


def linear_model(f: Formula, budget: int = 200_000):
    """(model or None, abstraction) for ``f`` with non-linear terms abstracted."""
    ab = _Abstraction(formula_vars(f))
    tree = _nnf(f, True, ab)
    return _search([tree], [], [budget]), ab


# -- refutation by sampling -------------------------------------------------


def _grid(lo: Fraction, hi: Fraction, step: Fraction):
    """Grid points ordered from the centre outwards."""
    n = int((hi - lo) / step)
    pts = [lo + i * step for i in range(n + 1)]
    return sorted(pts, key=lambda p: (abs(p), p))


@dataclass
class RefuterConfig:
    lo: Fraction = Fraction(-10)
    hi: Fraction = Fraction(10)
    step: Fraction = Fraction(1, 10)
    random_samples: int = 20_000
    seed: int = 0xC0FFEE
    max_grid: int = 50_000


def refute_by_sampling(f: Formula, registry=None, cfg: RefuterConfig | None = None):
    """Search for an assignment satisfying ``f``; returns it or None."""
    cfg = cfg or RefuterConfig()
    variables = sorted(formula_vars(f))

    def try_point(pt):
        sigma = dict(zip(variables, pt))
        try:
            return sigma if satisfies(sigma, f, registry) else None
        except (ArithmeticError, ValueError):
            return None

    if not variables:
        return try_point(())
    axis = _grid(cfg.lo, cfg.hi, cfg.step)
    step = cfg.step
    while len(axis) ** len(variables) > cfg.max_grid:
        step *= 2
        axis = _grid(cfg.lo, cfg.hi, step)
    # order grid points by their largest coordinate so small witnesses come first
    pts = sorted(itertools.product(axis, repeat=len(variables)),
                 key=lambda p: (max(abs(c) for c in p), p))
    for pt in pts:
        s = try_point(pt)
        if s is not None:
            return s
    rng = random.Random(cfg.seed)
    width = float(cfg.hi - cfg.lo)
    for _ in range(cfg.random_samples):
        pt = [Fraction(round(float(cfg.lo) + rng.random() * width, 3)).limit_denominator(1000)
              for _ in variables]
        s = try_point(pt)
        if s is not None:
            return s
    return None


# -- entailment -------------------------------------------------------------


def satisfiable(f: Formula, registry=None, refuter: RefuterConfig | None = None):
    """Three-valued satisfiability: (True, model) | (False, None) | (None, reason)."""
    try:
        model, ab = linear_model(f)
    except _Budget:
        return None, "case-split budget exhausted"
    if model is None:
        return False, None
    real_vars = formula_vars(f)
    witness = {v: model.get(v, Fraction(0)) for v in real_vars}
    if not ab.table:
        return True, witness
    try:
        if satisfies(witness, f, registry):
            return True, witness
    except (ArithmeticError, ValueError):
        pass
    found = refute_by_sampling(f, registry, refuter)
    if found is not None:
        return True, found
    return None, "non-linear atoms; sampling found no witness"


def entails(psi: Formula, phi: Formula, registry=None,
            refuter: RefuterConfig | None = None) -> Entailment3:
    """Decide ``|= psi => phi``. Valid is only returned when it is proved."""
    if phi == TOP or psi == phi:
        return VALID
    verdict, info = satisfiable(And(psi, Not(phi)), registry, refuter)
    if verdict is False:
        return VALID
    if verdict is True:
        return Invalid(info)
    return Unknown(info)


def valid(phi: Formula, registry=None) -> Entailment3:
    return entails(TOP, phi, registry)


# -- region enumeration -------------------------------------------------------


def linear_branches(f: Formula, limit: int = 256):
    """Satisfiable conjunctions of constraints whose union is ``f``.

    Returns None when ``f`` has non-linear atoms or more than ``limit`` branches.
    """
    if not is_linear(f):
        return None
    ab = _Abstraction(formula_vars(f))
    out: list[list[Constraint]] = []

    def walk(goals, cons):
        if len(out) > limit:
            raise _Budget
        while goals:
            g, goals = goals[0], goals[1:]
            if g is _TRUE:
                continue
            if g is _FALSE:
                return
            if isinstance(g, Constraint):
                t = _trivial(g)
                if t is False:
                    return
                if t is None:
                    cons = cons + [g]
                continue
            if isinstance(g, _And):
                goals = [g.left, g.right] + goals
                continue
            walk([g.left] + goals, cons)
            walk([g.right] + goals, cons)
            return
        if fm_model(cons) is not None:
            out.append(cons)

    try:
        walk([_nnf(f, True, ab)], [])
    except _Budget:
        return None
    return out


def pin(cons: list[Constraint], var: str, value: Fraction) -> list[Constraint]:
    """``cons`` plus ``var = value``."""
    lin = Linear.make({var: Fraction(1)}, -Fraction(value))
    return cons + [Constraint(lin, False), Constraint(-lin, False)]
