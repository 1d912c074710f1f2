import math
import random
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from rlam.gen import random_linear_formula
from rlam.entail import Invalid, Unknown, Valid, entails, satisfiable, valid
from rlam.logic import TOP, And, Leq, Not, implies, truth_domain_member
from rlam.parser import parse_formula as F


def test_truth_domain_member():
    assert truth_domain_member(F("a <= 3"), {"a": 2})
    assert not truth_domain_member(F("~(a <= 3)"), {"a": 2})
    assert truth_domain_member(TOP, {})


def test_sugar_expands_to_core_connectives():
    f = F(r"a < 1 \/ a = 2 => a >= 0")
    core = (Leq, And, Not, type(TOP))

    def walk(g):
        assert isinstance(g, core)
        if isinstance(g, And):
            walk(g.left), walk(g.right)
        elif isinstance(g, Not):
            walk(g.body)
    walk(f)


def test_entails_examples():
    assert entails(F(r"a >= 0 /\ b >= 0"), F("a >= 0")) == Valid()
    out = entails(F("a > 0"), F("a >= 1"))
    assert out == Invalid({"a": Fraction(1, 2)})


def test_top_short_circuit_and_nonlinear_refutation():
    assert entails(F("sin(a) <= 0"), TOP) == Valid()
    out = entails(TOP, F("sin(a) <= 0"))
    assert isinstance(out, Invalid)
    a = out.witness["a"]
    # a point of the step-0.1 grid on which sin is positive
    assert (a * 10).denominator == 1 and math.sin(float(a)) > 0


def test_unknown_when_sampling_cannot_decide():
    # valid, but not provable by linear reasoning
    out = entails(TOP, F("sin(a) * sin(a) <= 1"))
    assert isinstance(out, Unknown)


def test_strict_and_equality_reasoning():
    assert entails(F(r"a < 1 /\ a > 0"), F("~(a = 2)")) == Valid()
    assert entails(F(r"a <= 0 /\ a >= 0"), F("a = 0")) == Valid()
    assert entails(F(r"a < 0 /\ a > 0"), F("a = 17")) == Valid()
    assert isinstance(entails(F(r"a <= 0 \/ a >= 1"), F("a <= 0")), Invalid)


def test_satisfiable_and_valid():
    assert satisfiable(F(r"a < 0 /\ a > 0"))[0] is False
    assert satisfiable(F(r"a + b = 3 /\ a - b = 1"))[1] == {"a": 2, "b": 1}
    assert valid(F(r"a <= 1 \/ a > 1")) == Valid()


# -- agreement with an independent grid refuter ------------------------------

GRID = [Fraction(i, 4) for i in range(-32, 33)]
@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_verdicts_are_sound_against_grid(seed):
    rng = random.Random(seed)
    variables = ["a", "b", "c"][: rng.randint(1, 3)]
    psi, phi = random_linear_formula(rng, variables), random_linear_formula(rng, variables)
    out = entails(psi, phi)
    imp = implies(psi, phi)
    if isinstance(out, Valid):
        step = GRID[::4] if len(variables) == 3 else GRID
        import itertools

        for pt in itertools.product(step, repeat=len(variables)):
            assert truth_domain_member(imp, dict(zip(variables, pt)))
    else:
        assert isinstance(out, Invalid)
        sigma = {v: out.witness.get(v, Fraction(0)) for v in variables}
        assert not truth_domain_member(imp, sigma)
