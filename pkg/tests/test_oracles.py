import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rlam.autodiff import grad_at
from rlam.gen import random_first_order
from rlam.logic import truth_domain_member
from rlam.oracles import (Continuous, Inconclusive, ProbeConfig, SuspectDiscontinuity,
                          continuity_probe, finite_diff, formula_domain, poly_normalize,
                          sample_formula)
from rlam.parser import parse, parse_formula
from rlam.polynomial import Polynomial
from rlam.semantics import EXACT, RealV, UnsupportedPrim, denote_first_order, evaluate
from rlam.typecheck import NotFirstOrder
from rlam.types import TypingContext

ALL = lambda pt: True


def test_finite_diff_examples():
    assert abs(finite_diff(lambda x: x * x, [3], 0) - 6) <= 1e-6
    assert abs(finite_diff(lambda x: x, [1.7], 0) - 1) <= 1e-9
    assert finite_diff(lambda x: 4.0, [1.7], 0) == 0.0
    with pytest.raises(ValueError):
        finite_diff(lambda x: x, [0], 0, h=0)


def test_poly_examples():
    xy = TypingContext.reals(["x", "y"])
    p = poly_normalize(parse("x * y + x"), xy)
    assert p.as_dict() == {"x*y": "1", "x": "1"}
    assert str(poly_normalize(parse("2"), TypingContext.reals(["x"]))) == "2"


def test_poly_fourth_power():
    # (\f.\x. f (f x)) (\y. y*y), opened at its binder x
    x = TypingContext.reals(["x"])
    t = parse(r"(\f:R -> R. \z:R. f (f z)) (\y:R. y * y) x")
    p = poly_normalize(t, x)
    v = Polynomial.variable(["x"], "x")
    assert p == v * v * v * v
    assert str(p) == "x^4"
    for q in (Fraction(-3, 2), Fraction(2), Fraction(5, 7)):
        assert p.evaluate([q]) == q ** 4


def test_poly_rejections():
    x = TypingContext.reals(["x"])
    with pytest.raises(UnsupportedPrim):
        poly_normalize(parse("sin(x)"), x)
    with pytest.raises(UnsupportedPrim):
        poly_normalize(parse("if x < 0 then 1 else x"), x)
    with pytest.raises(NotFirstOrder):
        poly_normalize(parse(r"\y:R. y"), x)


def test_probe_examples():
    assert isinstance(continuity_probe(abs, ALL, [(0.0,)]), Continuous)
    step = lambda x: 0.0 if x < 0 else 1.0
    v = continuity_probe(step, ALL, [(0.0,)])
    assert v == SuspectDiscontinuity((0.0,), 0.0, 1.0)
    fig_a = lambda x: -x if x < 0 else x + 1
    v = continuity_probe(fig_a, ALL, [(0.0,)])
    assert isinstance(v, SuspectDiscontinuity) and v.point == (0.0,)


def test_probe_respects_domain():
    step = lambda x: 0.0 if x < 0 else 1.0
    right = lambda pt: pt[0] >= 0
    assert isinstance(continuity_probe(step, right, [(0.0,)]), Continuous)
    assert isinstance(continuity_probe(step, lambda pt: False, [(0.0,)]), Inconclusive)
    assert isinstance(continuity_probe(step, ALL, []), Inconclusive)


def test_probe_is_deterministic():
    f = lambda x, y: x * y
    cfg = ProbeConfig(seed=7)
    assert continuity_probe(f, ALL, [(1.0, 2.0)], cfg) == continuity_probe(f, ALL, [(1.0, 2.0)], cfg)


def test_sample_formula_stays_inside():
    phi = parse_formula(r"x >= 0 /\ y >= x \/ x < -3")
    pts = sample_formula(phi, ["x", "y"], 200, random.Random(1))
    assert len(pts) == 200
    for pt in pts:
        assert truth_domain_member(phi, dict(zip(["x", "y"], pt)))
    # boundary points are reachable
    assert any(p[0] == 0 or p[0] == p[1] for p in pts)


def test_sample_formula_nonlinear_and_empty():
    phi = parse_formula("sin(x) <= 0")
    pts = sample_formula(phi, ["x"], 30, random.Random(2))
    assert pts and all(math.sin(float(p[0])) <= 0 for p in pts)
    assert sample_formula(parse_formula(r"x < 0 /\ x > 0"), ["x"], 10, random.Random(0)) == []


def test_formula_domain():
    member = formula_domain(parse_formula("x <= 1"), ["x"])
    assert member((1.0,)) and not member((1.5,))


seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_polynomial_agrees_with_exact_evaluation(seed):
    rng = random.Random(seed)
    ctx, t = random_first_order(rng, prims=("add", "sub", "mul", "neg"))
    p = poly_normalize(t, ctx)
    for _ in range(5):
        pt = [Fraction(rng.randint(-9, 9), rng.randint(1, 6)) for _ in ctx.names]
        env = {n: RealV(q) for n, q in zip(ctx.names, pt)}
        assert p.evaluate(pt) == evaluate(env, t, EXACT).value


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_finite_diff_converges_toward_ad(seed):
    rng = random.Random(seed)
    ctx, t = random_first_order(rng, max_depth=4)
    f = denote_first_order(t, ctx)
    pt = [rng.uniform(-1.5, 1.5) for _ in ctx.names]
    g = grad_at(t, ctx, pt)
    for i, gi in enumerate(g):
        coarse = abs(finite_diff(f, pt, i, 1e-4) - gi)
        fine = abs(finite_diff(f, pt, i, 1e-6) - gi)
        # rounding noise dominates once the truncation error is tiny
        assert fine <= coarse + 1e-8 * max(1.0, abs(gi))


@pytest.mark.parametrize("name", ["add", "sub", "mul", "neg", "sin", "cos", "min", "max",
                                  "abs", "exp"])
def test_probe_never_flags_prims_on_their_domain(name):
    from rlam.prims import DEFAULT_REGISTRY

    pf = DEFAULT_REGISTRY[name]
    rng = random.Random(name)
    seeds = [tuple(rng.uniform(-5, 5) for _ in range(pf.arity)) for _ in range(100)]
    v = continuity_probe(pf.fn, ALL, seeds, ProbeConfig(directions=2))
    assert isinstance(v, Continuous)
