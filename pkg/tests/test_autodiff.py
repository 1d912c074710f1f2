import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rlam.autodiff import (ConditionalInAD, MissingDerivative, ad_ctx, ad_term, ad_type, derive,
                           dual_of, grad_at, naming_for, primal)
from rlam.gen import random_first_order, random_typed_term
from rlam.parser import parse, parse_type
from rlam.printer import pretty
from rlam.semantics import RealV, evaluate
from rlam.syntax import Lit, Pair, Var, alpha_equiv
from rlam.typecheck import typecheck
from rlam.types import R, Arrow, Prod, TypingContext


@pytest.mark.parametrize("ty,out", [
    ("R", "R * R"),
    ("R -> R", "R * R -> R * R"),
    ("R * R", "(R * R) * (R * R)"),
])
def test_ad_type(ty, out):
    assert ad_type(parse_type(ty)) == parse_type(out)


def test_ad_ctx():
    assert len(ad_ctx(TypingContext())) == 0
    ctx = TypingContext([("x", R), ("f", Arrow(R, R))])
    out = ad_ctx(ctx)
    assert list(out) == [("dx", Prod(R, R)), ("df", Arrow(Prod(R, R), Prod(R, R)))]


def test_numeral():
    assert ad_term(Lit(Fraction(5))) == Pair(Lit(Fraction(5)), Lit(Fraction(0)))
    assert pretty(ad_term(parse("5.0"))) == "(5.0, 0.0)"


def _dual_env(**pairs):
    return {k: Pair_value(*v) for k, v in pairs.items()}


def Pair_value(a, b):
    from rlam.semantics import PairV

    return PairV(RealV(float(a)), RealV(float(b)))


def test_product_rule_matches_closed_form():
    # tangent of x*y is fst dx * snd dy + snd dx * fst dy
    dt = ad_term(parse("x * y"))
    rng = random.Random(3)
    for _ in range(50):
        a, da, b, db = (rng.uniform(-4, 4) for _ in range(4))
        v = evaluate(_dual_env(dx=(a, da), dy=(b, db)), dt)
        assert v.left.value == a * b
        assert math.isclose(v.right.value, a * db + da * b, rel_tol=1e-12, abs_tol=1e-12)


def test_sin_plus_cos_matches_closed_form():
    dt = ad_term(parse("sin(x) + cos(y)"))
    rng = random.Random(4)
    for _ in range(50):
        a, da, b, db = (rng.uniform(-4, 4) for _ in range(4))
        v = evaluate(_dual_env(dx=(a, da), dy=(b, db)), dt)
        assert v.left.value == math.sin(a) + math.cos(b)
        expected = math.cos(a) * da - math.sin(b) * db
        assert math.isclose(v.right.value, expected, rel_tol=1e-12, abs_tol=1e-12)


def test_dual_names_avoid_collisions():
    t = parse("x + dx")
    naming = naming_for(TypingContext.reals(["x", "dx"]), t)
    assert naming.dual("x") != "dx"
    assert len({naming.dual(n) for n in ("x", "dx")}) == 2
    out = ad_term(t, naming)
    assert typecheck(ad_ctx(TypingContext.reals(["x", "dx"]), naming), out) == Prod(R, R)


def test_dual_of():
    assert dual_of("x", "x") == Pair(Var("x"), Lit(Fraction(1)))
    assert dual_of("x", "y") == Pair(Var("y"), Lit(Fraction(0)))
    assert dual_of("z", "z") == Pair(Var("z"), Lit(Fraction(1)))


def _at(t, **env):
    return evaluate({k: RealV(float(v)) for k, v in env.items()}, t).value


def test_derive_product_is_other_factor():
    ctx = TypingContext.reals(["x", "y"])
    d = derive(ctx, parse("x * y"), "x")
    for x in range(-3, 4):
        for y in range(-3, 4):
            assert _at(d, x=x, y=y) == float(y)


def test_derive_constant_and_sine():
    ctx = TypingContext.reals(["x"])
    assert _at(derive(ctx, parse("5.0"), "x"), x=2.5) == 0.0
    assert _at(derive(ctx, parse("sin(x)"), "x"), x=0) == 1.0


def test_grad_at():
    xy = TypingContext.reals(["x", "y"])
    assert grad_at(parse("x * y"), xy, [2, 3]) == [3.0, 2.0]
    assert grad_at(parse("7.5"), xy, [1, -1]) == [0.0, 0.0]
    assert grad_at(parse("sin(x) + cos(y)"), xy, [0, 0]) == [1.0, 0.0]


def test_higher_order_subterms_differentiate():
    ctx = TypingContext.reals(["x"])
    t = parse(r"(\f:R -> R. \z:R. f (f z)) (\y:R. y * y) x")
    assert grad_at(t, ctx, [2]) == [32.0]


def test_conditionals_are_rejected():
    with pytest.raises(ConditionalInAD):
        ad_term(parse("if x < 0 then 1 else x"))


def test_missing_derivative():
    with pytest.raises(MissingDerivative):
        ad_term(parse("lt(x, 1)"))


seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_static_correctness(seed):
    ctx, t, ty = random_typed_term(random.Random(seed))
    naming = naming_for(ctx, t)
    assert typecheck(ad_ctx(ctx, naming), ad_term(t, naming)) == ad_type(ty)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_primal_preservation(seed):
    rng = random.Random(seed)
    ctx, t = random_first_order(rng)
    p = primal(ctx, t)
    for _ in range(5):
        env = {n: RealV(rng.uniform(-3, 3)) for n in ctx.names}
        assert evaluate(env, p).value == evaluate(env, t).value


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_linearity(seed):
    rng = random.Random(seed)
    ctx, s = random_first_order(rng)
    from rlam.gen import TermGen
    from rlam.syntax import PrimApp

    t = TermGen(rng).term(ctx, R, 5)
    pt = [rng.uniform(-2, 2) for _ in ctx.names]
    gs, gt = grad_at(s, ctx, pt), grad_at(t, ctx, pt)
    gsum = grad_at(PrimApp("add", (s, t)), ctx, pt)
    for a, b, c in zip(gs, gt, gsum):
        assert abs((a + b) - c) <= 1e-9 * max(1.0, abs(c))


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_derive_commutes_with_renaming(seed):
    rng = random.Random(seed)
    ctx, t = random_first_order(rng)
    from rlam.syntax import substitute_many

    ren = {n: f"r_{n}" for n in ctx.names}
    t2 = substitute_many(t, {k: Var(v) for k, v in ren.items()})
    ctx2 = TypingContext.reals(list(ren.values()))
    x = rng.choice(ctx.names)
    d1 = derive(ctx, t, x)
    d2 = derive(ctx2, t2, ren[x])
    d1r = substitute_many(d1, {k: Var(v) for k, v in ren.items()})
    assert alpha_equiv(d1r, d2)
