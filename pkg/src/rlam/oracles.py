"""Independent checks: finite differences, polynomial denotations, continuity probing."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .entail import fm_model, linear_branches, pin
from .logic import Formula, formula_vars, truth_domain_member
from .polynomial import Polynomial
from .prims import DEFAULT_REGISTRY, PrimRegistry
from .semantics import PolyMode, RealV, UnsupportedPrim, evaluate
from .syntax import Term, has_conditional, prims_used
from .typecheck import check_first_order
from .types import TypingContext

DEFAULT_SEED = 0xC0FFEE
POLY_PRIMS = frozenset({"add", "sub", "mul", "neg"})


def finite_diff(f, point, i: int, h: float = 1e-6) -> float:
    """Central difference of ``f`` along coordinate ``i``."""
    if h <= 0:
        raise ValueError("step must be positive")
    point = [float(p) for p in point]
    if not 0 <= i < len(point):
        raise IndexError(f"coordinate {i} out of range")
    up = list(point)
    down = list(point)
    up[i] += h
    down[i] -= h
    return (f(*up) - f(*down)) / (2 * h)


def poly_normalize(t: Term, ctx: TypingContext,
                   registry: PrimRegistry = DEFAULT_REGISTRY) -> Polynomial:
    """The polynomial denoted by a first-order term over +, -, * and literals."""
    check_first_order(ctx, t, registry)
    for p in sorted(prims_used(t)):
        if registry.canonical(p) not in POLY_PRIMS:
            raise UnsupportedPrim(p, PolyMode.name)
    if has_conditional(t):
        raise UnsupportedPrim("if", PolyMode.name)
    names = ctx.names
    env = {n: RealV(Polynomial.variable(names, n)) for n in names}
    return evaluate(env, t, PolyMode(names), registry).value


# -- domain sampling ----------------------------------------------------------


def sample_formula(phi: Formula, variables, count: int, rng: random.Random,
                   registry: PrimRegistry = DEFAULT_REGISTRY, lo: float = -10.0,
                   hi: float = 10.0, max_tries: int = 20_000) -> list[tuple[Fraction, ...]]:
    """Up to ``count`` exact points of the truth domain of ``phi``.

    Linear formulas are sampled region by region: variables are pinned to
    random targets while that stays feasible, which also produces boundary
    points. Anything else falls back to rejection sampling.
    """
    variables = list(variables)
    extra = formula_vars(phi) - set(variables)
    if extra:
        raise ValueError(f"formula mentions {sorted(extra)} outside {variables}")
    out: list[tuple[Fraction, ...]] = []
    branches = linear_branches(phi)
    if branches:
        for _ in range(count):
            cons = rng.choice(branches)
            order = list(variables)
            rng.shuffle(order)
            for v in order:
                # two attempts; when both miss, the solver's choice is often a boundary point
                for _attempt in range(2):
                    target = Fraction(round(rng.uniform(lo, hi), 3)).limit_denominator(1000)
                    if rng.random() < 0.2:
                        target = Fraction(rng.randint(int(lo), int(hi)))
                    trial = pin(cons, v, target)
                    if fm_model(trial) is not None:
                        cons = trial
                        break
            model = fm_model(cons)
            if model is None:
                continue
            out.append(tuple(model.get(v, Fraction(0)) for v in variables))
        return out
    if branches is not None:
        return out  # unsatisfiable
    for _ in range(max_tries):
        if len(out) >= count:
            break
        pt = tuple(Fraction(round(rng.uniform(lo, hi), 3)).limit_denominator(1000)
                   for _ in variables)
        try:
            if truth_domain_member(phi, dict(zip(variables, pt)), registry):
                out.append(pt)
        except (ArithmeticError, ValueError):
            continue
    return out


# -- continuity probing -------------------------------------------------------


@dataclass(frozen=True)
class ProbeConfig:
    depth: int = 40
    cutoff: int = 30
    radius: float = 1.0
    directions: int = 8
    tolerance: float = 1e-6
    seed: int = DEFAULT_SEED


@dataclass(frozen=True)
class Continuous:
    checked: int = 0

    def __str__(self):
        return "Continuous"


@dataclass(frozen=True)
class SuspectDiscontinuity:
    point: tuple
    left_value: float
    right_value: float

    def __str__(self):
        pt = ", ".join(_num(x) for x in self.point)
        return (f"SuspectDiscontinuity at ({pt}): "
                f"limit along a sequence {self.left_value!r}, value {self.right_value!r}")


@dataclass(frozen=True)
class Inconclusive:
    reason: str

    def __str__(self):
        return f"Inconclusive: {self.reason}"


ContinuityVerdict = Continuous | SuspectDiscontinuity | Inconclusive


def _num(x) -> str:
    if isinstance(x, Fraction) and x.denominator == 1:
        return str(x.numerator)
    return str(x) if isinstance(x, Fraction) else repr(float(x))


def _directions(n: int, cfg: ProbeConfig, rng: random.Random):
    dirs = []
    for i in range(n):
        for s in (1.0, -1.0):
            e = [0.0] * n
            e[i] = s
            dirs.append(e)
    for _ in range(cfg.directions):
        v = [rng.gauss(0.0, 1.0) for _ in range(n)]
        norm = math.sqrt(sum(c * c for c in v)) or 1.0
        dirs.append([c / norm for c in v])
    return dirs


def continuity_probe(f, domain, seeds, cfg: ProbeConfig | None = None) -> ContinuityVerdict:
    """Look for a sequence inside ``domain`` converging to a seed whose images do not.

    ``f`` takes n reals; ``domain`` is a predicate on a point (a tuple of reals).
    """
    cfg = cfg or ProbeConfig()
    rng = random.Random(cfg.seed)
    seeds = [tuple(s) for s in seeds]
    if not seeds:
        return Inconclusive("no seed points")
    usable = 0
    for x in seeds:
        n = len(x)
        try:
            fx = float(f(*x))
        except (ArithmeticError, ValueError) as exc:
            return Inconclusive(f"evaluation failed at {x}: {exc}")
        tol = cfg.tolerance * max(1.0, abs(fx))
        base = [float(c) for c in x]
        hit = False
        for d in _directions(n, cfg, rng):
            for k in range(cfg.cutoff, cfg.depth + 1):
                r = cfg.radius * 2.0 ** (-k)
                pt = tuple(b + r * c for b, c in zip(base, d))
                if pt == tuple(base) or not domain(pt):
                    continue
                hit = True
                fk = float(f(*pt))
                if not abs(fk - fx) <= tol:
                    return SuspectDiscontinuity(x, fk, fx)
        if hit:
            usable += 1
    if usable == 0:
        return Inconclusive("no sequence points inside the domain near any seed")
    return Continuous(usable)


def formula_domain(phi: Formula, variables, registry: PrimRegistry = DEFAULT_REGISTRY):
    """Membership predicate for the truth domain of ``phi``, on float points."""
    variables = list(variables)

    def member(pt) -> bool:
        sigma = {v: Fraction(c) for v, c in zip(variables, pt)}
        try:
            return truth_domain_member(phi, sigma, registry)
        except (ArithmeticError, ValueError):
            return False

    return member
