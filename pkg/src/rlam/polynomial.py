"""Sparse multivariate polynomials with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping


class Polynomial:
    """Exponent vector -> nonzero coefficient, over a fixed tuple of variable names."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables, terms: Mapping[tuple[int, ...], Fraction] | None = None):
        self.variables: tuple[str, ...] = tuple(variables)
        n = len(self.variables)
        clean = {}
        for mono, c in (terms or {}).items():
            mono = tuple(mono)
            if len(mono) != n or any(e < 0 for e in mono):
                raise ValueError(f"bad exponent vector {mono} for {n} variables")
            c = Fraction(c)
            if c != 0:
                clean[mono] = clean.get(mono, Fraction(0)) + c
        self.terms = {m: c for m, c in sorted(clean.items()) if c != 0}

    @classmethod
    def constant(cls, variables, c) -> "Polynomial":
        return cls(variables, {(0,) * len(tuple(variables)): Fraction(c)})

    @classmethod
    def variable(cls, variables, name: str) -> "Polynomial":
        variables = tuple(variables)
        mono = tuple(1 if v == name else 0 for v in variables)
        if sum(mono) != 1:
            raise ValueError(f"{name!r} is not one of {variables}")
        return cls(variables, {mono: Fraction(1)})

    def _same(self, other: "Polynomial") -> None:
        if self.variables != other.variables:
            raise ValueError(f"variable mismatch: {self.variables} vs {other.variables}")

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._same(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return Polynomial(self.variables, out)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.variables, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        self._same(other)
        out: dict[tuple[int, ...], Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return Polynomial(self.variables, out)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Polynomial) and self.variables == other.variables
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.variables, tuple(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def evaluate(self, point) -> Fraction:
        point = [Fraction(p) for p in point]
        total = Fraction(0)
        for m, c in self.terms.items():
            term = c
            for x, e in zip(point, m):
                if e:
                    term *= x ** e
            total += term
        return total

    def as_dict(self) -> dict[str, str]:
        """Monomial string -> coefficient string; stable for JSON output."""
        return {_show_mono(self.variables, m) or "1": str(c) for m, c in self.terms.items()}

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        # highest total degree first, then lexicographic
        for m, c in sorted(self.terms.items(), key=lambda mc: (-sum(mc[0]), [-e for e in mc[0]])):
            mono = _show_mono(self.variables, m)
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self) -> str:
        return f"Polynomial({self.variables!r}, {self.terms!r})"


def _show_mono(variables, mono) -> str:
    factors = []
    for v, e in zip(variables, mono):
        if e == 1:
            factors.append(v)
        elif e > 1:
            factors.append(f"{v}^{e}")
    return "*".join(factors)
