"""Command-line front end.

Exit codes: 0 success or Accepted, 1 negative analysis result, 2 usage,
parse or internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .autodiff import ADError, ad_term, grad_at, naming_for
from .continuity import (Accepted, CheckError, CheckOptions, Rejected, judgment_from_source,
                         refine_check)
from .logic import formula_vars
from .oracles import (DEFAULT_SEED, Continuous, Inconclusive, ProbeConfig, SuspectDiscontinuity,
                      continuity_probe, finite_diff, formula_domain, poly_normalize,
                      sample_formula)
from .parser import ParseError, SourceFile, parse_file, parse_formula, parse_ref_context
from .prims import DEFAULT_REGISTRY, RegistryError, load_aliases
from .printer import pretty
from .reftypes import RefTypeError
from .semantics import EvalError, RealV, UnsupportedPrim, evaluate, pack, show_value, to_python
from .syntax import Lam, Term
from .typecheck import TypeCheckError, typecheck
from .types import Arrow, Real, TypingContext, flatten_prod, show_type

OK, NEGATIVE, ERROR = 0, 1, 2
SCHEMA_PATH = Path(__file__).with_name("output.schema.json")


class UsageError(Exception):
    pass


class Outcome:
    def __init__(self, status: str, result, lines: list[str], code: int, diagnostics=None):
        self.status = status
        self.result = result
        self.lines = lines
        self.code = code
        self.diagnostics = diagnostics or []


def _diag(level: str, message: str, **extra) -> dict:
    d = {"level": level, "message": message}
    d.update(extra)
    return d


def _num(x):
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 2 ** 53 else x


def _parse_point(text: str) -> list[Fraction]:
    try:
        return [Fraction(s.strip()) for s in text.split(",") if s.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad number list {text!r}: {exc}") from None


# -- context resolution -------------------------------------------------------


def simple_context(src: SourceFile, registry) -> TypingContext:
    if "vars" in src.pragmas:
        names = src.pragmas["vars"].replace(",", " ").split()
        return TypingContext.reals(names)
    if src.pragmas.get("context"):
        return parse_ref_context(src.pragmas["context"], registry).erase()
    return TypingContext()


def first_order_view(src: SourceFile, registry) -> tuple[TypingContext, Term]:
    """A context of reals and a body of type R; a closed real lambda is opened up."""
    ctx = simple_context(src, registry)
    t = src.term
    if not len(ctx) and isinstance(t, Lam) and all(p.type == Real() for p in t.params):
        return TypingContext.reals([p.name for p in t.params]), t.body
    return ctx, t


# -- subcommands --------------------------------------------------------------


def cmd_typecheck(args, src, registry) -> Outcome:
    ctx = simple_context(src, registry)
    ty = typecheck(ctx, src.term, registry)
    return Outcome("ok", show_type(ty), [show_type(ty)], OK)


def cmd_eval(args, src, registry) -> Outcome:
    ctx = simple_context(src, registry)
    ty = typecheck(ctx, src.term, registry)
    raw = args.args or src.pragmas.get("args", "")
    vals = _parse_point(raw) if raw else []
    if len(ctx):
        if any(t != Real() for _, t in ctx):
            raise UsageError("eval needs a context of reals")
        if len(vals) != len(ctx):
            raise UsageError(f"expected {len(ctx)} arguments, got {len(vals)}")
        env = {n: RealV(float(v)) for n, v in zip(ctx.names, vals)}
        v = evaluate(env, src.term, registry=registry)
    else:
        v = evaluate({}, src.term, registry=registry)
        rest = list(vals)
        # curried functions take their argument groups one after another
        while rest:
            if not isinstance(ty, Arrow):
                raise UsageError("too many --args for this term")
            dom = flatten_prod(ty.domain)
            if any(d != Real() for d in dom) or len(dom) > len(rest):
                raise UsageError(f"cannot apply a function of type {show_type(ty)} to reals")
            v = v(pack(RealV(float(x)) for x in rest[:len(dom)]))
            rest = rest[len(dom):]
            ty = ty.codomain
    text = show_value(v)
    return Outcome("ok", _jsonable(to_python(v)), [text], OK)


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(y) for y in x]
    if isinstance(x, (int, float, Fraction)):
        return _num(x)
    return x


def cmd_ad(args, src, registry) -> Outcome:
    ctx = simple_context(src, registry)
    typecheck(ctx, src.term, registry)
    naming = naming_for(ctx, src.term)
    out = pretty(ad_term(src.term, naming, registry))
    return Outcome("ok", {"term": out, "naming": dict(naming.items())}, [out], OK)


def cmd_grad(args, src, registry) -> Outcome:
    ctx, t = first_order_view(src, registry)
    point = _parse_point(args.at)
    g = grad_at(t, ctx, point, registry)
    grad = [_num(x) for x in g]
    lines = [json.dumps(grad)]
    result = {"gradient": grad}
    code = OK
    diags = []
    if args.check_fd:
        from .semantics import denote_first_order

        f = denote_first_order(t, ctx, registry=registry)
        fd = [finite_diff(f, point, i, args.fd_step) for i in range(len(point))]
        res = [abs(a - b) for a, b in zip(g, fd)]
        tol = [max(1e-5 * abs(a), 1e-4) for a in g]
        ok = all(r <= t_ for r, t_ in zip(res, tol))
        result.update(fd=fd, residuals=res, agree=ok)
        lines.append("finite differences: " + json.dumps(fd))
        lines.append("residuals: " + json.dumps(res))
        lines.append("agree" if ok else "DISAGREE")
        if not ok:
            code = NEGATIVE
            diags.append(_diag("error", "gradient and finite differences disagree"))
    return Outcome("ok" if code == OK else "mismatch", result, lines, code, diags)


def cmd_poly(args, src, registry) -> Outcome:
    ctx, t = first_order_view(src, registry)
    p = poly_normalize(t, ctx, registry)
    return Outcome("ok", {"variables": list(p.variables), "terms": p.as_dict(),
                          "text": str(p)}, [str(p)], OK)


def _check_options(args) -> CheckOptions:
    return CheckOptions(permissive=args.permissive, strict_equiv=args.strict_equiv,
                        seed=args.seed)


def _verdict_outcome(v) -> Outcome:
    if isinstance(v, Accepted):
        diags = [_diag("warning", w) for w in v.warnings]
        return Outcome("accepted", {"verdict": "Accepted", "trace": v.trace},
                       ["Accepted"] + v.trace, OK, diags)
    if isinstance(v, Rejected):
        witness = None if v.witness is None else {k: str(x) for k, x in v.witness.items()}
        return Outcome("rejected",
                       {"verdict": "Rejected", "rule": v.rule, "condition": v.condition,
                        "witness": witness},
                       ["Rejected", f"rule: {v.rule}", f"failed: {v.condition}"]
                       + ([] if witness is None else
                          ["witness: " + ", ".join(f"{k} = {x}" for k, x in witness.items())]),
                       NEGATIVE,
                       [_diag("error", v.condition, rule=v.rule)])
    return Outcome("unknown", {"verdict": "Unknown", "gaps": v.gaps},
                   ["Unknown"] + [f"gap: {g}" for g in v.gaps], NEGATIVE,
                   [_diag("warning", g) for g in v.gaps])


def cmd_check(args, src, registry) -> Outcome:
    j = judgment_from_source(src, registry)
    return _verdict_outcome(refine_check(j, registry, _check_options(args)))


def cmd_check_all(args, registry) -> Outcome:
    root = Path(args.all)
    if not root.is_dir():
        raise UsageError(f"{root} is not a directory")
    rows, lines, code = [], [], OK
    for path in sorted(root.glob("*.rlam")):
        src = parse_file(str(path), registry)
        if "type" not in src.pragmas:
            continue
        try:
            out = cmd_check(args, src, registry)
        except (TypeCheckError, CheckError, RefTypeError) as exc:
            out = Outcome("error", None, [str(exc)], NEGATIVE)
        verdict = out.lines[0]
        rows.append({"file": path.name, "status": out.status})
        lines.append(f"{path.name}: {verdict}")
        code = max(code, out.code)
    return Outcome("ok" if code == OK else "mixed", rows, lines, code)


def cmd_probe(args, src, registry) -> Outcome:
    from .semantics import denote_first_order

    ctx, t = first_order_view(src, registry)
    names = ctx.names
    phi = parse_formula(args.domain, registry)
    extra = formula_vars(phi) - set(names)
    if extra:
        raise UsageError(f"domain mentions {sorted(extra)}; variables are {names}")
    f = denote_first_order(t, ctx, registry=registry)
    rng = random.Random(args.seed)
    seeds = sample_formula(phi, names, args.probe_seeds, rng, registry)
    cfg = ProbeConfig(depth=args.probe_depth, cutoff=min(30, max(0, args.probe_depth - 10)),
                      seed=args.seed)
    v = continuity_probe(f, formula_domain(phi, names, registry),
                         [tuple(float(c) for c in s) for s in seeds], cfg)
    if isinstance(v, SuspectDiscontinuity):
        pt = [_num(c) for c in v.point]
        return Outcome("suspect", {"verdict": "SuspectDiscontinuity", "point": pt,
                                   "left_value": v.left_value, "right_value": v.right_value},
                       [str(v)], NEGATIVE)
    if isinstance(v, Continuous):
        return Outcome("continuous", {"verdict": "Continuous", "seeds": len(seeds)},
                       [f"Continuous ({len(seeds)} seeds)"], OK)
    assert isinstance(v, Inconclusive)
    return Outcome("inconclusive", {"verdict": "Inconclusive", "reason": v.reason},
                   [str(v)], OK, [_diag("warning", v.reason)])


# -- argument parsing ---------------------------------------------------------


def _env_seed() -> int:
    raw = os.environ.get("RLAM_SEED")
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw, 0)
    except ValueError:
        return DEFAULT_SEED


def _common(suppress: bool) -> argparse.ArgumentParser:
    # subcommand copies must not overwrite values given before the subcommand
    def d(value):
        return argparse.SUPPRESS if suppress else value

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=d(False),
                        help="machine-readable output")
    common.add_argument("--seed", type=lambda s: int(s, 0), default=d(_env_seed()),
                        help="RNG seed (default: $RLAM_SEED or 0xC0FFEE)")
    common.add_argument("--probe-depth", type=int, default=d(40))
    common.add_argument("--probe-seeds", type=int, default=d(50))
    common.add_argument("--permissive", action="store_true", default=d(False),
                        help="treat undecided side conditions as warnings")
    common.add_argument("--strict-equiv", action="store_true", default=d(False),
                        help="require alpha-equivalent branches at guard discontinuities")
    common.add_argument("--fd-step", type=float, default=d(1e-6))
    common.add_argument("--aliases", default=d(None),
                        help='JSON manifest {"aliases": {"name": "prim"}}')
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common(suppress=True)
    p = argparse.ArgumentParser(prog="rlam", parents=[_common(suppress=False)],
                                description="AD and continuity checking for a real lambda calculus")
    p.add_argument("--version", action="version", version=f"rlam {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("typecheck", "print the simple type"),
                        ("eval", "evaluate"), ("ad", "print the AD-transformed term"),
                        ("grad", "gradient at a point"), ("poly", "canonical polynomial"),
                        ("check", "refinement-check the file's judgment"),
                        ("probe", "sample for discontinuities")):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("file", nargs="?" if name == "check" else None)
        if name == "eval":
            sp.add_argument("--args", default="")
        if name == "grad":
            sp.add_argument("--at", required=True)
            sp.add_argument("--check-fd", action="store_true")
        if name == "check":
            sp.add_argument("--all", metavar="DIR")
        if name == "probe":
            sp.add_argument("--domain", default="T")
    return p


COMMANDS = {"typecheck": cmd_typecheck, "eval": cmd_eval, "ad": cmd_ad, "grad": cmd_grad,
            "poly": cmd_poly, "check": cmd_check, "probe": cmd_probe}


def _emit(out: Outcome, as_json: bool, stdout, stderr) -> None:
    if as_json:
        doc = {"status": out.status, "result": out.result, "diagnostics": out.diagnostics}
        stdout.write(json.dumps(doc, indent=2, default=str) + "\n")
        return
    for line in out.lines:
        stdout.write(line + "\n")
    for d in out.diagnostics:
        if d["level"] == "warning":
            stderr.write(f"warning: {d['message']}\n")


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else ERROR
    registry = DEFAULT_REGISTRY
    try:
        if args.aliases:
            registry = load_aliases(registry, args.aliases)
        if args.command == "check" and args.all:
            out = cmd_check_all(args, registry)
        else:
            if not args.file:
                raise UsageError("missing FILE")
            src = parse_file(args.file, registry)
            out = COMMANDS[args.command](args, src, registry)
    except (TypeCheckError, ADError, UnsupportedPrim) as exc:
        out = Outcome("type-error" if isinstance(exc, TypeCheckError) else "unsupported", None,
                      [f"error: {exc}"], NEGATIVE, [_diag("error", str(exc))])
    except ParseError as exc:
        out = Outcome("parse-error", None, [f"error: {exc}"], ERROR, [_diag("error", str(exc))])
    except (UsageError, CheckError, RefTypeError, RegistryError, EvalError, OSError,
            ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        out = Outcome("error", None, [f"error: {msg}"], ERROR, [_diag("error", str(msg))])
    if out.code != OK and not args.json and out.status in ("type-error", "unsupported", "parse-error", "error"):
        stderr.write(out.lines[0] + "\n")
        out.lines = []
    _emit(out, args.json, stdout, stderr)
    return out.code


def main() -> None:
    sys.exit(run())
