"""Refinement types: simple types annotated with continuity formulas."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .logic import TOP, Formula, formula_vars, rename
from .types import Arrow, R, SimpleType, TypingContext, prod_of


class RefTypeError(Exception):
    pass


@dataclass(frozen=True)
class RealRef:
    """``{var in R}``."""

    var: str


@dataclass(frozen=True)
class ArrowGround:
    """``(args) ->[domain; image] {result.var}``."""

    args: tuple["RefType", ...]
    domain: Formula
    image: Formula
    result: RealRef


@dataclass(frozen=True)
class ArrowHigher:
    """``(args) ->[domain] result`` with a higher-order result."""

    args: tuple["RefType", ...]
    domain: Formula
    result: "RefType"


RefType = Union[RealRef, ArrowGround, ArrowHigher]
HigherRef = Union[ArrowGround, ArrowHigher]


def is_ground(t: RefType) -> bool:
    return isinstance(t, RealRef)


def split_args(args) -> tuple[list, list[RealRef]]:
    """Higher-order arguments first, then the real ones."""
    higher = [a for a in args if not isinstance(a, RealRef)]
    reals = [a for a in args if isinstance(a, RealRef)]
    return higher, reals


def validate(t: RefType) -> None:
    """Check the grammar side conditions; raises RefTypeError."""
    match t:
        case RealRef(v):
            if not v:
                raise RefTypeError("empty logical variable")
            return
        case ArrowGround() | ArrowHigher() as arrow:
            args, dom, res = arrow.args, arrow.domain, arrow.result
            if not args:
                raise RefTypeError("refined arrow with no arguments")
            seen_real = False
            for a in args:
                if isinstance(a, RealRef):
                    seen_real = True
                elif seen_real:
                    raise RefTypeError("higher-order arguments must precede real ones")
                validate(a)
            _, reals = split_args(args)
            names = [a.var for a in reals]
            if len(set(names)) != len(names):
                raise RefTypeError(f"argument variables not distinct: {names}")
            extra = formula_vars(dom) - set(names)
            if extra:
                raise RefTypeError(f"domain formula mentions {sorted(extra)} beyond {names}")
            if isinstance(arrow, ArrowGround):
                extra = formula_vars(arrow.image) - {res.var}
                if extra:
                    raise RefTypeError(f"image formula mentions {sorted(extra)} beyond {res.var}")
            else:
                if isinstance(res, RealRef):
                    raise RefTypeError("ground result needs an image formula")
                validate(res)
            return
    raise RefTypeError(f"not a refinement type: {t!r}")


def erase(t: RefType) -> SimpleType:
    """Forget the annotations."""
    match t:
        case RealRef():
            return R
        case ArrowGround() | ArrowHigher():
            return Arrow(prod_of([erase(a) for a in t.args]), erase(t.result))
    raise RefTypeError(f"not a refinement type: {t!r}")


def erase_context(ctx) -> TypingContext:
    return TypingContext((n, erase(t)) for n, t in ctx)


def rename_vars(t: RefType, renaming: dict[str, str]) -> RefType:
    """Rename logical variables (the arrow's own bound variables included)."""
    match t:
        case RealRef(v):
            return RealRef(renaming.get(v, v))
        case ArrowGround(args, dom, img, res):
            return ArrowGround(tuple(rename_vars(a, renaming) for a in args),
                               rename(dom, renaming), rename(img, renaming),
                               rename_vars(res, renaming))
        case ArrowHigher(args, dom, res):
            return ArrowHigher(tuple(rename_vars(a, renaming) for a in args),
                               rename(dom, renaming), rename_vars(res, renaming))
    raise RefTypeError(f"not a refinement type: {t!r}")


def top_arrow(args, result: RefType) -> RefType:
    """The arrow with trivial annotations."""
    if isinstance(result, RealRef):
        return ArrowGround(tuple(args), TOP, TOP, result)
    return ArrowHigher(tuple(args), TOP, result)


class RefContext:
    """Ordered refined bindings with ground and higher-order views."""

    def __init__(self, bindings=()):
        self._items: tuple[tuple[str, RefType], ...] = tuple(bindings)
        names = [n for n, _ in self._items]
        if len(set(names)) != len(names):
            raise RefTypeError(f"duplicate names in refined context: {names}")
        lvars = [t.var for _, t in self._items if isinstance(t, RealRef)]
        if len(set(lvars)) != len(lvars):
            raise RefTypeError(f"logical variables not distinct: {lvars}")

    def __iter__(self):
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def lookup(self, name: str) -> RefType | None:
        for n, t in self._items:
            if n == name:
                return t
        return None

    def extend(self, bindings) -> "RefContext":
        new = list(bindings)
        names = {n for n, _ in new}
        return RefContext([b for b in self._items if b[0] not in names] + new)

    @property
    def ground(self) -> list[tuple[str, RealRef]]:
        return [(n, t) for n, t in self._items if isinstance(t, RealRef)]

    @property
    def higher(self) -> list[tuple[str, RefType]]:
        return [(n, t) for n, t in self._items if not isinstance(t, RealRef)]

    @property
    def logical_vars(self) -> list[str]:
        return [t.var for _, t in self.ground]

    def var_of(self, name: str) -> str | None:
        t = self.lookup(name)
        return t.var if isinstance(t, RealRef) else None

    def erase(self):
        return erase_context(self._items)

    def __repr__(self):
        return f"RefContext({list(self._items)!r})"
