"""Refinement type checking for local continuity.

The checker verifies a derivation skeleton: lambdas and conditionals carry
(or synthesize) the formulas, and the checker discharges every side condition
with the entailment engine. Branch agreement at guard discontinuities is a
sampling semi-decision (``ctx_equiv_probe``).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import logic as L
from .entail import Invalid, RefuterConfig, Unknown, entails, satisfiable
from .logic import TOP, Formula, conj, conjuncts, disj, formula_vars, rename, subst_formula
from .oracles import DEFAULT_SEED, sample_formula
from .parser import SourceFile, parse_formula, parse_ref_context, parse_reftype
from .prims import DEFAULT_REGISTRY, RESULT_VAR, PrimRegistry, arg_var
from .printer import pretty, show_formula, show_reftype
from .reftypes import (ArrowGround, ArrowHigher, RealRef, RefContext, RefType, erase,
                       rename_vars, validate)
from .semantics import EvalError, FunV, PairV, RealV, evaluate
from .syntax import App, If, IfAnnotation, Lam, Lit, PrimApp, Term, Var, alpha_equiv, \
    substitute_many
from .typecheck import check_restricted, typecheck
from .types import Arrow, Prod, Real, SimpleType


class CheckError(Exception):
    pass


class MissingAnnotation(CheckError):
    pass


@dataclass(frozen=True)
class RefJudgment:
    context: RefContext
    term: Term
    target: RefType
    domain: Formula = TOP
    image: Formula | None = None

    def __post_init__(self):
        ground = isinstance(self.target, RealRef)
        if ground and self.image is None:
            object.__setattr__(self, "image", TOP)
        if not ground and self.image is not None:
            raise CheckError("an image formula is only allowed at ground type")


@dataclass
class CheckOptions:
    permissive: bool = False
    strict_equiv: bool = False
    semantic_ho: bool = False
    equiv_samples: int = 48
    equiv_tolerance: float = 1e-9
    seed: int = DEFAULT_SEED
    refuter: RefuterConfig | None = None


@dataclass
class Accepted:
    trace: list[str]
    warnings: list[str] = field(default_factory=list)

    def __str__(self):
        return "Accepted"


@dataclass
class Rejected:
    rule: str
    condition: str
    witness: dict | None
    trace: list[str] = field(default_factory=list)

    def __str__(self):
        return f"Rejected [{self.rule}] {self.condition}"


@dataclass
class UnknownVerdict:
    gaps: list[str]
    trace: list[str] = field(default_factory=list)

    def __str__(self):
        return "Unknown: " + "; ".join(self.gaps)


Verdict = Accepted | Rejected | UnknownVerdict


class _Fail(Exception):
    def __init__(self, rule: str, condition: str, witness=None):
        self.rule = rule
        self.condition = condition
        self.witness = witness
        super().__init__(f"[{rule}] {condition}")


class _Gap(Exception):
    pass


# -- contextual equivalence probe -------------------------------------------


@dataclass(frozen=True)
class Equiv:
    samples: int

    def __str__(self):
        return "Equiv"


@dataclass(frozen=True)
class NotEquiv:
    witness: dict
    detail: str

    def __str__(self):
        return f"NotEquiv({_show_sigma(self.witness)}: {self.detail})"


@dataclass(frozen=True)
class EquivUnknown:
    reason: str

    def __str__(self):
        return f"Unknown: {self.reason}"


def _show_sigma(sigma) -> str:
    return ", ".join(f"{k} = {_show_q(v)}" for k, v in sorted(sigma.items()))


def _show_q(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else str(v)
    return repr(v)


def _sample_value(ty: SimpleType, rng: random.Random):
    """A deterministic semantic value of type ``ty``, used as an opaque argument."""
    match ty:
        case Real():
            return RealV(round(rng.uniform(-3, 3), 3))
        case Prod(a, b):
            return PairV(_sample_value(a, rng), _sample_value(b, rng))
        case Arrow(dom, cod):
            coeffs = [rng.uniform(-2, 2) for _ in range(8)]
            probe_arg = _sample_value(dom, rng)
            sub_rng_seed = rng.randrange(1 << 30)

            def fn(v):
                xs = _scalars(v, probe_arg)
                s = coeffs[0] + sum(c * x for c, x in zip(coeffs[1:], xs))
                return _from_scalar(cod, math.sin(s) + 0.5 * s, random.Random(sub_rng_seed))

            return FunV(fn)
    raise CheckError(f"not a type: {ty!r}")


def _scalars(v, probe):
    match v:
        case RealV(x):
            return [float(x)]
        case PairV(a, b):
            return _scalars(a, probe) + _scalars(b, probe)
        case FunV():
            try:
                return _scalars(v(probe), probe)[:2]
            except (EvalError, TypeError):
                return []
    return []


def _from_scalar(ty: SimpleType, s: float, rng: random.Random):
    match ty:
        case Real():
            return RealV(s)
        case Prod(a, b):
            return PairV(_from_scalar(a, s, rng), _from_scalar(b, 2 * s - 1, rng))
        case Arrow():
            inner = _sample_value(ty, rng)
            return FunV(lambda v: _shift(inner(v), s))
    raise CheckError(f"not a type: {ty!r}")


def _shift(v, s):
    match v:
        case RealV(x):
            return RealV(x + s)
        case PairV(a, b):
            return PairV(_shift(a, s), b)
    return v


def _close(v1, v2, tol: float) -> bool:
    match v1, v2:
        case RealV(a), RealV(b):
            a, b = float(a), float(b)
            return abs(a - b) <= tol * max(1.0, abs(a), abs(b))
        case PairV(a1, b1), PairV(a2, b2):
            return _close(a1, a2, tol) and _close(b1, b2, tol)
    return False


def ctx_equiv_probe(s: Term, p: Term, ctx: RefContext, boundary: Formula,
                    opts: CheckOptions | None = None, result_type: SimpleType | None = None,
                    registry: PrimRegistry = DEFAULT_REGISTRY):
    """Do ``s`` and ``p`` agree at every assignment satisfying ``boundary``?

    Equiv is established by sampling only; NotEquiv carries a witness.
    """
    opts = opts or CheckOptions()
    if alpha_equiv(s, p):
        return Equiv(0)
    sat, model = satisfiable(boundary, registry, opts.refuter)
    if sat is False:
        return Equiv(0)
    if opts.strict_equiv:
        return EquivUnknown("branches are not alpha-equivalent")
    ground = ctx.ground
    names = [n for n, _ in ground]
    lvars = [t.var for _, t in ground]
    rng = random.Random(opts.seed)
    points = sample_formula(boundary, lvars, opts.equiv_samples, rng, registry)
    if sat and model is not None:
        points.insert(0, tuple(model.get(v, Fraction(0)) for v in lvars))
    if not points:
        return EquivUnknown("no points found on the boundary")
    erased = ctx.erase()
    ty = result_type or typecheck(erased, s, registry)
    higher = ctx.higher
    instances = []
    for _ in range(3 if higher else 1):
        instances.append({n: _sample_value(erase(t), rng) for n, t in higher})
    checked = 0
    for pt in points:
        sigma = dict(zip(lvars, pt))
        mapping = {n: Lit(Fraction(v)) for n, v in zip(names, pt)}
        s_sig = substitute_many(s, mapping)
        p_sig = substitute_many(p, mapping)
        if isinstance(ty, Arrow) and not opts.semantic_ho:
            if not alpha_equiv(s_sig, p_sig):
                return NotEquiv(sigma, "higher-order branches are not alpha-equivalent")
            checked += 1
            continue
        for env in instances:
            try:
                v1 = evaluate(env, s_sig, registry=registry)
                v2 = evaluate(env, p_sig, registry=registry)
                if isinstance(ty, Arrow):
                    arg = _sample_value(ty.domain, rng)
                    v1, v2 = v1(arg), v2(arg)
            except (ArithmeticError, ValueError) as exc:
                return EquivUnknown(f"evaluation failed at {_show_sigma(sigma)}: {exc}")
            if not _close(v1, v2, opts.equiv_tolerance):
                return NotEquiv(sigma, f"{_show_value(v1)} vs {_show_value(v2)}")
            checked += 1
    return Equiv(checked)


def _show_value(v) -> str:
    match v:
        case RealV(x):
            return repr(float(x))
        case PairV(a, b):
            return f"({_show_value(a)}, {_show_value(b)})"
    return "<function>"


# -- guard synthesis ----------------------------------------------------------


def term_to_expr(t: Term, ctx: RefContext) -> L.Expr | None:
    """The logical reading of a ground arithmetic term over the context's reals."""
    match t:
        case Var(name):
            v = ctx.var_of(name)
            return L.LVar(v) if v is not None else None
        case Lit(q):
            return L.Const(q)
        case PrimApp(p, args):
            parts = [term_to_expr(a, ctx) for a in args]
            if any(x is None for x in parts):
                return None
            return L.FnApp(p, tuple(parts))
    return None


def linear_reading(t: Term, ctx: RefContext) -> L.Expr | None:
    """As ``term_to_expr`` but only for rational-linear terms."""
    e = term_to_expr(t, ctx)
    if e is None or L.linearize(e) is None:
        return None
    return e


def synthesize_guard_formulas(guard: Term, ctx: RefContext,
                              registry: PrimRegistry = DEFAULT_REGISTRY) -> IfAnnotation:
    """Guard formulas from a comparison primitive applied to linear arguments."""
    if not isinstance(guard, PrimApp):
        raise MissingAnnotation(f"cannot synthesize guard formulas for {pretty(guard)}")
    pf = registry[guard.prim]
    if pf.guard is None:
        raise MissingAnnotation(f"{guard.prim} has no registered guard facts")
    exprs = {}
    for i, a in enumerate(guard.args, 1):
        e = linear_reading(a, ctx)
        if e is None:
            raise MissingAnnotation(
                f"guard argument {pretty(a)} is not linear in the context's reals")
        exprs[arg_var(i)] = e
    g = pf.guard
    return IfAnnotation(guard_cont=subst_formula(g.continuity, exprs),
                        guard_zero=subst_formula(g.zero, exprs),
                        guard_one=subst_formula(g.one, exprs))


# -- helpers ------------------------------------------------------------------


def _fresh_var(base: str, avoid: set[str]) -> str:
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def _bound_vars(t: RefType) -> set[str]:
    match t:
        case RealRef(v):
            return {v}
        case ArrowGround() | ArrowHigher():
            out = set()
            for a in t.args:
                out |= _bound_vars(a)
            return out | _bound_vars(t.result)
    return set()


def canonical(t: RefType) -> RefType:
    """Rename logical variables positionally; equal results mean equal types."""
    counter = [0]

    def go(t):
        match t:
            case RealRef():
                return t
            case ArrowGround() | ArrowHigher():
                args = [go(a) for a in t.args]
                ren = {}
                new_args = []
                for a in args:
                    if isinstance(a, RealRef):
                        counter[0] += 1
                        ren[a.var] = f"#c{counter[0]}"
                        new_args.append(RealRef(ren[a.var]))
                    else:
                        new_args.append(a)
                dom = rename(t.domain, ren)
                if isinstance(t, ArrowGround):
                    counter[0] += 1
                    rv = f"#c{counter[0]}"
                    img = rename(t.image, {t.result.var: rv})
                    return ArrowGround(tuple(new_args), dom, img, RealRef(rv))
                return ArrowHigher(tuple(new_args), dom, go(t.result))
        return t

    return go(t)


def reftype_equiv(a: RefType, b: RefType) -> bool:
    return canonical(a) == canonical(b)


def _only(f: Formula, var: str) -> Formula:
    """Conjuncts of ``f`` that mention nothing but ``var``."""
    return conj(*(c for c in conjuncts(f) if formula_vars(c) and formula_vars(c) <= {var}))


def _eq_const(var: str, q: Fraction) -> Formula:
    return L.eq(L.LVar(var), L.Const(Fraction(q)))


# -- the checker --------------------------------------------------------------


class _Checker:
    def __init__(self, registry: PrimRegistry, opts: CheckOptions):
        self.registry = registry
        self.opts = opts
        self.warnings: list[str] = []
        self.gaps: list[str] = []

    # entailment with bookkeeping
    def entail(self, psi: Formula, phi: Formula, rule: str, what: str, trace, depth):
        r = entails(psi, phi, self.registry, self.opts.refuter)
        text = f"{show_formula(psi)} => {show_formula(phi)}"
        if isinstance(r, Invalid):
            raise _Fail(rule, f"{what}: {text} fails at {_show_sigma(r.witness)}", r.witness)
        if isinstance(r, Unknown):
            msg = f"{rule}: {what}: {text} undecided ({r.reason})"
            if not self.opts.permissive:
                self.gaps.append(msg)
                raise _Gap(msg)
            self.warnings.append(msg)
        trace.append("  " * (depth + 1) + f"|= {text}")

    def first(self, attempts, trace, depth):
        """Run alternative derivations; keep the first that succeeds."""
        failures: list[_Fail] = []
        gap = False
        for attempt in attempts:
            sub: list[str] = []
            try:
                attempt(sub)
            except _Fail as f:
                failures.append(f)
                continue
            except _Gap:
                gap = True
                continue
            trace.extend(sub)
            return
        if failures and not gap:
            raise failures[0]
        if gap:
            raise _Gap("undecided entailment")
        raise _Fail("none", "no rule applies")

    # judgments
    def check(self, ctx: RefContext, t: Term, target: RefType, theta: Formula,
              eta: Formula | None, trace, depth=0):
        if isinstance(target, RealRef):
            self.ground(ctx, t, target, theta, eta if eta is not None else TOP, trace, depth)
        else:
            self.higher(ctx, t, target, theta, trace, depth)

    def _line(self, trace, depth, rule, ctx, t, target, theta, eta=None):
        dom = show_formula(theta) if eta is None else \
            f"{show_formula(theta)} ~> {show_formula(eta)}"
        trace.append("  " * depth + f"{rule}: |-[{dom}] {pretty(t)} : {show_reftype(target)}")

    def ground(self, ctx, t, target: RealRef, theta, eta, trace, depth):
        beta = target.var
        match t:
            case Var(name):
                ty = ctx.lookup(name)
                if not isinstance(ty, RealRef):
                    raise _Fail("var-F", f"{name} is not a ground variable of the context")
                self._line(trace, depth, "var-F", ctx, t, target, theta, eta)
                self.entail(theta, rename(eta, {beta: ty.var}), "var-F", "domain to image",
                            trace, depth)
            case Lit(q):
                self._line(trace, depth, "Rf", ctx, t, target, theta, eta)
                self.entail(_eq_const(beta, q), eta, "Rf", "constant image", trace, depth)
            case PrimApp():
                self.first([lambda tr, f=f: self.rf(ctx, t, target, theta, eta, f, tr, depth)
                            for f in self._facts(t)]
                           + [lambda tr: self.linear_rule(ctx, t, target, theta, eta, tr, depth)],
                           trace, depth)
            case App():
                self.app(ctx, t, target, theta, eta, trace, depth)
            case If():
                self.cond(ctx, t, target, theta, eta, trace, depth)
            case _:
                raise _Fail("none", f"no refinement rule for {pretty(t)}")

    def _facts(self, t: PrimApp):
        return list(self.registry[t.prim].continuity_facts())

    def rf(self, ctx, t: PrimApp, target, theta, eta, fact, trace, depth):
        beta = target.var
        avoid = set(ctx.logical_vars) | {beta} | formula_vars(theta) | formula_vars(eta)
        n = len(t.args)
        alphas = []
        for _ in range(n):
            a = _fresh_var("r", avoid)
            avoid.add(a)
            alphas.append(a)
        ren = {arg_var(i + 1): alphas[i] for i in range(n)}
        ren[RESULT_VAR] = beta
        dom = rename(fact.domain, ren)
        img = rename(fact.image, ren)
        lits = {alphas[i]: L.Const(a.value) for i, a in enumerate(t.args) if isinstance(a, Lit)}
        dom_lit = subst_formula(dom, lits)
        premises = []
        for a, alpha in zip(t.args, alphas):
            match a:
                case Lit(q):
                    premises.append(_eq_const(alpha, q))
                case Var(name) if ctx.var_of(name) is not None:
                    premises.append(rename(_only(theta, ctx.var_of(name)),
                                           {ctx.var_of(name): alpha}))
                case _:
                    premises.append(_only(dom_lit, alpha))
        self._line(trace, depth, "Rf", ctx, t, target, theta, eta)
        theta_args = conj(*premises)
        self.entail(theta_args, dom, "Rf", f"{t.prim} continuous on the argument domain",
                    trace, depth)
        try:
            self.entail(img, eta, "Rf", f"{t.prim} image", trace, depth)
        except (_Fail, _Gap):
            applied = L.FnApp(t.prim, tuple(L.LVar(x) for x in alphas))
            self.entail(theta_args, subst_formula(eta, {beta: applied}), "Rf",
                        f"{t.prim} maps the argument domain into the image", trace, depth)
        for a, alpha, prem in zip(t.args, alphas, premises):
            self.ground(ctx, a, RealRef(alpha), theta, prem, trace, depth + 1)

    def linear_rule(self, ctx, t, target, theta, eta, trace, depth):
        """Linear arithmetic over the context's reals is continuous everywhere."""
        e = linear_reading(t, ctx)
        if e is None:
            raise _Fail("Rf", f"no continuity fact of {t.prim} applies")
        self._line(trace, depth, "Rf-linear", ctx, t, target, theta, eta)
        self.entail(theta, subst_formula(eta, {target.var: e}), "Rf-linear",
                    "domain to image", trace, depth)

    def higher(self, ctx, t, target, theta, trace, depth):
        match t:
            case Var(name):
                ty = ctx.lookup(name)
                if ty is None or isinstance(ty, RealRef) or not reftype_equiv(ty, target):
                    raise _Fail("var-H", f"{name} does not have type {show_reftype(target)}")
                self._line(trace, depth, "var-H", ctx, t, target, theta)
            case Lam():
                self.abs(ctx, t, target, theta, trace, depth)
            case App():
                self.app(ctx, t, target, theta, None, trace, depth)
            case If():
                self.cond(ctx, t, target, theta, None, trace, depth)
            case _:
                raise _Fail("none", f"no refinement rule for {pretty(t)}")

    def _freshen_arrow(self, ctx, arrow, params):
        """Align argument variables with binder annotations and away from ``ctx``."""
        taken = set(ctx.logical_vars)
        ren = {}
        for p, a in zip(params, arrow.args):
            if isinstance(a, RealRef) and isinstance(p.ref, RealRef):
                ren[a.var] = p.ref.var
        avoid = taken | _bound_vars(arrow) | set(ren.values())
        for v in sorted(_bound_vars(arrow)):
            if v in ren:
                continue
            if v in taken:
                ren[v] = _fresh_var(v, avoid)
                avoid.add(ren[v])
        if set(ren.values()) & taken:
            raise _Fail("abs", "binder annotation reuses a logical variable of the context")
        return rename_vars(arrow, ren) if ren else arrow

    def abs(self, ctx, t: Lam, target, theta, trace, depth):
        if len(t.params) != len(target.args):
            raise _Fail("abs", f"{len(t.params)} binders for {len(target.args)} arguments")
        arrow = self._freshen_arrow(ctx, target, t.params)
        for p, a in zip(t.params, arrow.args):
            if erase(a) != p.type:
                raise _Fail("abs", f"binder {p.name} has the wrong type")
            if p.ref is not None and not reftype_equiv(p.ref, a):
                raise _Fail("abs", f"binder {p.name} is annotated differently from the target")
        self._line(trace, depth, "abs", ctx, t, target, theta)
        inner = ctx.extend([(p.name, a) for p, a in zip(t.params, arrow.args)])
        psi = conj(arrow.domain, theta)
        self.entail(conj(arrow.domain, theta), psi, "abs", "body domain", trace, depth)
        if isinstance(arrow, ArrowGround):
            self.ground(inner, t.body, arrow.result, psi, arrow.image, trace, depth + 1)
        else:
            self.higher(inner, t.body, arrow.result, psi, trace, depth + 1)

    def synth(self, ctx, fn: Term, result: RefType, eta):
        """A refinement type for a function in head position."""
        match fn:
            case Var(name):
                ty = ctx.lookup(name)
                if ty is None or isinstance(ty, RealRef):
                    raise _Fail("app", f"{name} is not a function of the context")
                return ty
            case Lam(params, _):
                avoid = set(ctx.logical_vars)
                args = []
                for p in params:
                    if p.ref is not None:
                        args.append(p.ref)
                    elif p.type == Real():
                        v = _fresh_var("p", avoid)
                        avoid.add(v)
                        args.append(RealRef(v))
                    else:
                        raise _Fail("app", f"binder {p.name} needs a refinement annotation")
                if isinstance(result, RealRef):
                    return ArrowGround(tuple(args), TOP, eta, result)
                return ArrowHigher(tuple(args), TOP, result)
            case App(g, args):
                inner = self.synth(ctx, g, result, eta)
                if isinstance(inner, ArrowGround):
                    raise _Fail("app", "too many arguments")
                return inner.result
        raise _Fail("app", f"cannot type {pretty(fn)} in head position")

    def app(self, ctx, t: App, target, theta, eta, trace, depth):
        fn_type = self.synth(ctx, t.fn, target, eta)
        if isinstance(fn_type, RealRef):
            raise _Fail("app", "head is not a function")
        arrow = self._freshen_arrow(ctx, fn_type, ())
        if len(t.args) != len(arrow.args):
            raise _Fail("app", f"{len(t.args)} arguments for {len(arrow.args)} parameters")
        self._line(trace, depth, "app", ctx, t, target, theta, eta)
        if isinstance(arrow, ArrowGround):
            if not isinstance(target, RealRef):
                raise _Fail("app", "ground result used at higher type")
            self.entail(rename(arrow.image, {arrow.result.var: target.var}), eta,
                        "app", "image", trace, depth)
        elif isinstance(target, RealRef) or not reftype_equiv(arrow.result, target):
            raise _Fail("app", "result type mismatch")
        self.higher(ctx, t.fn, fn_type, theta, trace, depth + 1)
        thetas = []
        for a, ty in zip(t.args, arrow.args):
            if isinstance(ty, RealRef):
                th = _only(arrow.domain, ty.var)
                thetas.append(th)
                self.ground(ctx, a, ty, theta, th, trace, depth + 1)
            else:
                self.higher(ctx, a, ty, theta, trace, depth + 1)
        self.entail(conj(*thetas), arrow.domain, "app", "argument images cover the domain",
                    trace, depth)

    def cond(self, ctx, t: If, target, theta, eta, trace, depth):
        ann = t.ann or IfAnnotation()
        if None in (ann.guard_cont, ann.guard_zero, ann.guard_one):
            syn = synthesize_guard_formulas(t.guard, ctx, self.registry)
            ann = IfAnnotation(ann.guard_cont or syn.guard_cont, ann.guard_zero or syn.guard_zero,
                               ann.guard_one or syn.guard_one, ann.then_dom, ann.else_dom)
        th_t, th_0, th_1 = ann.guard_cont, ann.guard_zero, ann.guard_one
        if ann.then_dom is not None or ann.else_dom is not None:
            plans = [(ann.then_dom or theta, ann.else_dom or theta)]
        else:
            plans = [(theta, theta),
                     (conj(theta, disj(L.negate(th_0), L.negate(th_t))),
                      conj(theta, disj(L.negate(th_1), L.negate(th_t))))]
        self.first([lambda tr, pl=pl: self._cond_with(ctx, t, target, theta, eta, th_t, th_0,
                                                      th_1, pl[0], pl[1], tr, depth)
                    for pl in plans], trace, depth)

    def _cond_with(self, ctx, t, target, theta, eta, th_t, th_0, th_1, th_s, th_p, trace, depth):
        self._line(trace, depth, "If", ctx, t, target, theta, eta)
        avoid = set(ctx.logical_vars) | formula_vars(theta)
        beta = _fresh_var("g", avoid)
        zero, one = _eq_const(beta, 0), _eq_const(beta, 1)
        guard_ref = RealRef(beta)
        self.ground(ctx, t.guard, guard_ref, th_t, disj(zero, one), trace, depth + 1)
        self.ground(ctx, t.guard, guard_ref, th_0, zero, trace, depth + 1)
        self.ground(ctx, t.guard, guard_ref, th_1, one, trace, depth + 1)
        self.check(ctx, t.then, target, th_s, eta, trace, depth + 1)
        self.check(ctx, t.orelse, target, th_p, eta, trace, depth + 1)
        cover = conj(disj(th_s, th_p), disj(th_1, th_p), disj(th_0, th_s),
                     disj(th_t, conj(th_s, th_p)))
        self.entail(theta, cover, "If", "branch cover", trace, depth)
        boundary = conj(theta, L.negate(th_t))
        res = ctx_equiv_probe(t.then, t.orelse, ctx, boundary, self.opts,
                              registry=self.registry)
        if isinstance(res, NotEquiv):
            raise _Fail("If", f"branch agreement on {show_formula(boundary)}: branches differ "
                              f"at {_show_sigma(res.witness)} ({res.detail})", res.witness)
        if isinstance(res, EquivUnknown):
            msg = f"If: branch agreement on {show_formula(boundary)}: {res.reason}"
            if not self.opts.permissive:
                self.gaps.append(msg)
                raise _Gap(msg)
            self.warnings.append(msg)
        trace.append("  " * (depth + 1) + f"branches agree on {show_formula(boundary)} "
                                          f"({res.samples} samples)"
                     if isinstance(res, Equiv) else "  " * (depth + 1) + "branch agreement assumed")


def refine_check(j: RefJudgment, registry: PrimRegistry = DEFAULT_REGISTRY,
                 opts: CheckOptions | None = None) -> Verdict:
    """Check a refined judgment; Accepted only when every side condition is discharged."""
    opts = opts or CheckOptions()
    validate(j.target)
    for _, ty in j.context:
        validate(ty)
    erased_ctx = j.context.erase()
    ty = typecheck(erased_ctx, j.term, registry)
    if ty != erase(j.target):
        raise CheckError(f"term has simple type {ty}, target erases to {erase(j.target)}")
    if not check_restricted(ty):
        raise CheckError(f"type {ty} is outside the restricted grammar")
    checker = _Checker(registry, opts)
    trace: list[str] = []
    try:
        checker.check(j.context, j.term, j.target, j.domain, j.image, trace)
    except _Fail as f:
        return Rejected(f.rule, f.condition, f.witness, trace)
    except _Gap:
        return UnknownVerdict(sorted(set(checker.gaps)), trace)
    return Accepted(trace, checker.warnings)


def judgment_from_source(src: SourceFile, registry: PrimRegistry = DEFAULT_REGISTRY) -> RefJudgment:
    """Read ``@context``, ``@type``, ``@domain`` and ``@image`` pragmas."""
    pr = src.pragmas
    if "type" not in pr:
        raise CheckError("missing @type pragma")
    ctx = parse_ref_context(pr["context"], registry) if pr.get("context") else RefContext()
    target = parse_reftype(pr["type"], registry)
    domain = parse_formula(pr["domain"], registry) if "domain" in pr else TOP
    image = None
    if isinstance(target, RealRef):
        image = parse_formula(pr["image"], registry) if "image" in pr else TOP
    elif "image" in pr:
        raise CheckError("@image given for a higher-order target")
    return RefJudgment(ctx, src.term, target, domain, image)
