"""Simple types and typing contexts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union


@dataclass(frozen=True)
class Real:
    def __str__(self) -> str:
        return "R"


@dataclass(frozen=True)
class Prod:
    left: "SimpleType"
    right: "SimpleType"

    def __str__(self) -> str:
        return show_type(self)


@dataclass(frozen=True)
class Arrow:
    domain: "SimpleType"
    codomain: "SimpleType"

    def __str__(self) -> str:
        return show_type(self)


SimpleType = Union[Real, Prod, Arrow]

R = Real()


def prod_of(types: list[SimpleType]) -> SimpleType:
    """Right-nested product of one or more types (a single type is itself)."""
    if not types:
        raise ValueError("empty product")
    out = types[-1]
    for t in reversed(types[:-1]):
        out = Prod(t, out)
    return out


def flatten_prod(t: SimpleType) -> list[SimpleType]:
    """Inverse of prod_of on right-nested products."""
    out = []
    while isinstance(t, Prod):
        out.append(t.left)
        t = t.right
    out.append(t)
    return out


def show_type(t: SimpleType, level: int = 0) -> str:
    # level 0: top, 1: operand of *, 2: domain of ->
    match t:
        case Real():
            return "R"
        case Prod(left, right):
            s = f"{show_type(left, 2)} * {show_type(right, 1)}"
            return f"({s})" if level >= 2 else s
        case Arrow(dom, cod):
            s = f"{show_type(dom, 2)} -> {show_type(cod, 0)}"
            return f"({s})" if level >= 1 else s
    raise TypeError(f"not a simple type: {t!r}")


class TypingContext:
    """Ordered list of distinct variable bindings."""

    def __init__(self, bindings=()):
        self._items: tuple[tuple[str, SimpleType], ...] = tuple(bindings)
        names = [n for n, _ in self._items]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate names in context: {names}")

    @classmethod
    def reals(cls, names) -> "TypingContext":
        return cls((n, R) for n in names)

    def extend(self, name: str, ty: SimpleType) -> "TypingContext":
        # shadowing: drop the older binding so names stay distinct
        return TypingContext([(n, t) for n, t in self._items if n != name] + [(name, ty)])

    def lookup(self, name: str) -> SimpleType | None:
        for n, t in self._items:
            if n == name:
                return t
        return None

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self._items]

    def __iter__(self) -> Iterator[tuple[str, SimpleType]]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, name: str) -> bool:
        return self.lookup(name) is not None

    def __eq__(self, other) -> bool:
        return isinstance(other, TypingContext) and self._items == other._items

    def __hash__(self) -> int:
        return hash(self._items)

    def __repr__(self) -> str:
        return f"TypingContext({list(self._items)!r})"

    def __str__(self) -> str:
        if not self._items:
            return "."
        return ", ".join(f"{n}: {show_type(t)}" for n, t in self._items)
