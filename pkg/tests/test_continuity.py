import pytest

from rlam.continuity import (Accepted, CheckError, CheckOptions, Equiv, EquivUnknown,
                             MissingAnnotation, NotEquiv, RefJudgment, Rejected, UnknownVerdict,
                             ctx_equiv_probe, judgment_from_source, refine_check,
                             synthesize_guard_formulas)
from rlam.entail import Valid, entails
from rlam.logic import TOP
from rlam.parser import (parse, parse_file, parse_formula as F, parse_ref_context as C,
                         parse_reftype as T)
from rlam.printer import show_annotation
from rlam.reftypes import ArrowGround, RealRef, RefContext, RefTypeError, erase, validate
from rlam.types import R, Arrow, Prod

from conftest import EXAMPLES


def judge(ctx, term, ty, domain="T", image=None, **opts):
    j = RefJudgment(C(ctx) if ctx else RefContext(), parse(term), T(ty), F(domain),
                    F(image) if image else None)
    return refine_check(j, opts=CheckOptions(**opts))


def test_erase():
    assert erase(T("{a}")) == R
    assert erase(T("{a} ->[T; T] {b}")) == Arrow(R, R)
    higher = T("({a} ->[T; T] {b}, {c}) ->[T] ({d} ->[T; T] {e})")
    assert erase(higher) == Arrow(Prod(Arrow(R, R), R), Arrow(R, R))


def test_reftype_invariants():
    a, b = RealRef("a"), RealRef("b")
    validate(ArrowGround((a,), F("a >= 0"), F("b >= 0"), b))
    with pytest.raises(RefTypeError):
        validate(ArrowGround((a, a), TOP, TOP, b))
    with pytest.raises(RefTypeError):
        validate(ArrowGround((a,), F("b >= 0"), TOP, b))
    with pytest.raises(RefTypeError):
        validate(ArrowGround((a,), TOP, F("a >= 0"), b))
    with pytest.raises(RefTypeError):
        validate(ArrowGround((), TOP, TOP, b))


def test_image_only_at_ground_type():
    with pytest.raises(CheckError):
        RefJudgment(RefContext(), parse(r"\x:R. x"), T("{a} ->[T; T] {b}"), TOP, TOP)


def test_display_one():
    v = judge("x:{a}, y:{b}", "x", "{a}", r"a >= 0 /\ b >= 0", "a >= 0")
    assert isinstance(v, Accepted) and v.trace[0].startswith("var-F")


def test_display_two():
    v = judge("x:{a}, y:{b}", "min(x, y)", "{g}", r"a >= 0 /\ b >= 0", "g >= 0")
    assert isinstance(v, Accepted) and v.trace[0].startswith("Rf")


def test_fig_b_accepted():
    assert isinstance(judge("", r"\x:R. if x < 0 then 1 else x + 1", "{a} ->[T; T] {b}"),
                      Accepted)


def test_fig_a_rejected_at_zero():
    v = judge("", r"\x:R. if x < 0 then -x else x + 1", "{a} ->[T; T] {b}")
    assert isinstance(v, Rejected)
    assert v.rule == "If" and "branch agreement" in v.condition
    assert v.witness == {"a": 0}


def test_nested_conditional_accepted():
    v = judge("", r"\x:R. if x > 0 then 0 else (if x = 4 then 1 else 0)", "{a} ->[T; T] {b}")
    assert isinstance(v, Accepted)


def test_composition_through_prims():
    v = judge("", r"\x:R, y:R. jump(min(x, y))", r"({a}, {b}) ->[a >= 0 /\ b >= 0; g >= 1] {g}")
    assert isinstance(v, Accepted)
    # without the domain restriction the image claim fails
    v = judge("", r"\x:R, y:R. jump(min(x, y))", "({a}, {b}) ->[T; g >= 1] {g}")
    assert not isinstance(v, Accepted)


def test_wrong_image_is_rejected_with_witness():
    v = judge("x:{a}", "x", "{a}", "a >= 0", "a >= 1")
    assert isinstance(v, Rejected) and v.rule == "var-F"
    assert v.witness is not None


def test_higher_order_variable_and_application():
    ctx = "f:{u} ->[u >= 0; v >= 0] {v}, x:{a}"
    assert isinstance(judge(ctx, "f x", "{c}", "a >= 1", "c >= 0"), Accepted)
    v = judge(ctx, "f x", "{c}", "a >= -1", "c >= 0")
    assert not isinstance(v, Accepted)


def test_strict_equiv_turns_probe_into_unknown():
    v = judge("", r"\x:R. if x < 0 then 1 else x + 1", "{a} ->[T; T] {b}", strict_equiv=True)
    assert isinstance(v, UnknownVerdict)
    v = judge("", r"\x:R. if x < 0 then 1 else x + 1", "{a} ->[T; T] {b}", strict_equiv=True,
              permissive=True)
    assert isinstance(v, Accepted) and v.warnings


def test_unknown_entailment_is_not_accepted():
    v = judge("x:{a}", "x", "{a}", "T", "sin(a) * sin(a) <= 1 + a * a * 0 + sin(a) * 0")
    assert not isinstance(v, Accepted)


def test_type_mismatch_is_a_check_error():
    with pytest.raises(Exception):
        judge("", r"\x:R. x", "{a}")


def test_ctx_equiv_probe_examples():
    ctx = C("x:{a}")
    assert isinstance(ctx_equiv_probe(parse("1"), parse("x + 1"), ctx, F("a = 0")), Equiv)
    assert isinstance(ctx_equiv_probe(parse("x"), parse("x"), ctx, F("a = 0")), Equiv)
    out = ctx_equiv_probe(parse("-x"), parse("x + 1"), ctx, F("a = 0"))
    assert isinstance(out, NotEquiv) and out.witness == {"a": 0}
    out = ctx_equiv_probe(parse("1"), parse("x + 1"), ctx, F("a = 0"), CheckOptions(strict_equiv=True))
    assert isinstance(out, EquivUnknown)


def test_guard_synthesis():
    ctx = C("x:{a}")
    lt = synthesize_guard_formulas(parse("x < 0"), ctx)
    assert show_annotation(lt) == "{t: ~(a = 0.0); t0: 0.0 <= a; t1: 0.0 > a}"
    eq = synthesize_guard_formulas(parse("x = 4"), ctx)
    assert entails(eq.guard_one, F("a = 4")) == Valid() and entails(F("a = 4"), eq.guard_one) == Valid()
    assert entails(eq.guard_zero, F("~(a = 4)")) == Valid()
    assert entails(eq.guard_cont, F("~(a = 4)")) == Valid()
    with pytest.raises(MissingAnnotation):
        synthesize_guard_formulas(parse("sin(x) < 0"), ctx)


def test_explicit_annotation_is_used():
    v = judge("", r"\x:R. if x < 0 {t: ~(a = 0); t0: a >= 0; t1: a < 0} then 1 else x + 1",
              "{a} ->[T; T] {b}")
    assert isinstance(v, Accepted)


def test_unannotated_nonlinear_guard_needs_annotation():
    with pytest.raises(MissingAnnotation):
        judge("", r"\x:R. if sin(x) < 0 then 1 else 2", "{a} ->[T; T] {b}")


@pytest.mark.parametrize("term,ty,dom,img,wider", [
    ("min(x, y)", "{g}", r"a >= 0 /\ b >= 0", "g >= 0", "g >= -1"),
    ("x + y", "{g}", r"a >= 1 /\ b >= 1", "g >= 2", "T"),
    ("x", "{a}", r"a >= 2 /\ b >= 0", "a >= 2", "a >= 0"),
])
def test_image_widening(term, ty, dom, img, wider):
    ctx = "x:{a}, y:{b}"
    assert isinstance(judge(ctx, term, ty, dom, img), Accepted)
    assert entails(F(img), F(wider)) == Valid()
    assert isinstance(judge(ctx, term, ty, dom, wider), Accepted)


@pytest.mark.parametrize("term,ty,dom,narrow,img", [
    ("min(x, y)", "{g}", r"a >= 0 /\ b >= 0", r"a >= 1 /\ b >= 3", "g >= 0"),
    ("jump(x)", "{g}", "a >= 0", r"a >= 5 /\ b <= 0", "g >= 1"),
])
def test_domain_narrowing(term, ty, dom, narrow, img):
    ctx = "x:{a}, y:{b}"
    assert isinstance(judge(ctx, term, ty, dom, img), Accepted)
    assert entails(F(narrow), F(dom)) == Valid()
    assert isinstance(judge(ctx, term, ty, narrow, img), Accepted)


def test_judgment_from_source_requires_type():
    src = parse_file(str(EXAMPLES / "mul.rlam"))
    with pytest.raises(CheckError, match="@type"):
        judgment_from_source(src)
    j = judgment_from_source(parse_file(str(EXAMPLES / "display2.rlam")))
    assert j.image == F("g >= 0")
