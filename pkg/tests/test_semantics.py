import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rlam.gen import TermGen, random_first_order, random_typed_term
from rlam.parser import parse
from rlam.semantics import (EXACT, EvalError, FunV, RealV, UnsupportedPrim,
                            denote_first_order, evaluate, matches_type, pack, unpack)
from rlam.syntax import App, Lam, Param, substitute
from rlam.types import R, TypingContext
from rlam.prims import DEFAULT_REGISTRY


def ev(src, **env):
    return evaluate({k: RealV(float(v)) for k, v in env.items()}, parse(src))


def test_arithmetic():
    assert ev("2.0 * 3.0") == RealV(6.0)
    assert ev("x * y", x=2, y=3) == RealV(6.0)


def test_fig_b_left_branch():
    assert ev("if x < 0 then 1 else x + 1", x=-1) == RealV(1.0)


def test_nonzero_guard_takes_then_branch():
    assert ev("if x then 1 else 2", x=0.5) == RealV(1.0)
    assert ev("if x then 1 else 2", x=0) == RealV(2.0)


def test_closures_capture_environment():
    v = ev(r"(\y:R. \z:R. y + z) 1")
    assert isinstance(v, FunV)
    assert v(RealV(2.0)) == RealV(3.0)


def test_multi_argument_functions_take_packed_values():
    f = ev(r"\x:R, y:R. x - y")
    assert f(pack([RealV(5.0), RealV(2.0)])) == RealV(3.0)
    assert unpack(pack([RealV(1.0), RealV(2.0), RealV(3.0)]), 3) == [RealV(1.0), RealV(2.0),
                                                                      RealV(3.0)]


def test_denote_first_order():
    assert denote_first_order(parse("x * y"), TypingContext.reals(["x", "y"]))(2, 3) == 6
    assert denote_first_order(parse("5.0"), TypingContext.reals(["x"]))(123.0) == 5
    assert denote_first_order(parse("min(x, y)"), TypingContext.reals(["x", "y"]))(1, 2) == 1


def test_exact_mode():
    v = evaluate({"x": RealV(Fraction(1, 3))}, parse("x * 3 + 1/10"), EXACT)
    assert v == RealV(Fraction(11, 10))
    with pytest.raises(UnsupportedPrim):
        evaluate({}, parse("sin(1)"), EXACT)


def test_unbound_variable_at_runtime():
    with pytest.raises(EvalError):
        evaluate({}, parse("x"))


def test_registry_invariants():
    for name, pf in DEFAULT_REGISTRY.items():
        for d in pf.partials or ():
            assert DEFAULT_REGISTRY[d].arity == pf.arity, name
        if pf.guard is not None:
            for a in (-2.0, -0.5, 0.0, 0.5, 2.0):
                for b in (-1.0, 0.0, 1.0):
                    assert pf.fn(*([a, b][:pf.arity])) in (0.0, 1.0)


def test_division_like_prim_is_total():
    wdiv = DEFAULT_REGISTRY["wdiv"]
    assert wdiv.fn(2.0, 0.5) == 4.0
    assert wdiv.fn(2.0, 1.0) == 0.0
    assert wdiv.fn(2.0, 7.0) == 0.0


seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def _closed_instance(rng, ctx):
    """Closed values for every variable of ``ctx`` built from generated terms."""
    gen = TermGen(rng)
    env = {}
    for name, ty in ctx:
        from rlam.gen import min_depth

        t = gen.term(TypingContext(), ty, max(3, min_depth(ty)))
        env[name] = evaluate({}, t)
    return env


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_type_soundness(seed):
    rng = random.Random(seed)
    ctx, t, ty = random_typed_term(rng)
    env = _closed_instance(rng, ctx)
    assert matches_type(evaluate(env, t), ty)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_compositionality(seed):
    rng = random.Random(seed)
    ctx, s = random_first_order(rng)
    x = ctx.names[0]
    t = TermGen(rng).term(ctx, R, 3)
    point = {n: RealV(Fraction(rng.randint(-6, 6), rng.choice((1, 2, 3)))) for n in ctx.names}
    lhs = evaluate(point, substitute(s, x, t), EXACT) if _exact_ok(s, t) else None
    if lhs is None:
        return
    inner = dict(point)
    inner[x] = evaluate(point, t, EXACT)
    assert lhs == evaluate(inner, s, EXACT)


def _exact_ok(*terms):
    from rlam.syntax import prims_used

    return all(DEFAULT_REGISTRY[p].exact is not None for t in terms for p in prims_used(t))


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_beta_at_observation(seed):
    rng = random.Random(seed)
    ctx, s = random_first_order(rng, prims=("add", "mul", "sub"))
    x = ctx.names[-1]
    rest = TypingContext.reals(ctx.names[:-1]) if len(ctx) > 1 else TypingContext.reals(["w"])
    t = TermGen(rng, ("add", "mul")).term(rest, R, 3)
    point = {n: RealV(Fraction(rng.randint(-5, 5))) for n in rest.names}
    redex = App(Lam((Param(x, R),), s), (t,))
    assert evaluate(point, redex, EXACT) == evaluate(point, substitute(s, x, t), EXACT)
