"""Exact scalars for quadratic-form inputs.

Entries of a form are either exact rationals (``Fraction``), tagged reals
(``Surd``) or plain floats.  A ``Surd`` is a rational linear combination
``c0 + c1*t1 + ... + ck*tk`` of named opaque reals ``t_i``.  The named atoms
are assumed to be linearly independent over Q together with 1; under that
contract every rationality question about a linear expression in the atoms
is decided exactly, without looking at the floating values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union


class NotExact(ArithmeticError):
    """Raised when an operation would leave the tagged-linear algebra."""


@dataclass(frozen=True)
class Surd:
    const: Fraction = Fraction(0)
    terms: tuple[tuple[str, Fraction], ...] = ()
    values: tuple[tuple[str, float], ...] = field(default=(), compare=False)

    @staticmethod
    def atom(label: str, value: float) -> "Surd":
        return Surd(Fraction(0), ((label, Fraction(1)),), ((label, float(value)),))

    @staticmethod
    def _build(const, coeffs: dict, values: dict) -> "Surd | Fraction":
        terms = tuple(sorted((k, v) for k, v in coeffs.items() if v != 0))
        if not terms:
            return Fraction(const)
        vals = tuple(sorted((k, values[k]) for k, _ in terms))
        return Surd(Fraction(const), terms, vals)

    def _parts(self):
        return self.const, dict(self.terms), dict(self.values)

    def __float__(self) -> float:
        vals = dict(self.values)
        return float(self.const) + sum(float(c) * vals[k] for k, c in self.terms)

    @property
    def is_rational(self) -> bool:
        return not self.terms

    def __add__(self, other):
        if isinstance(other, float):
            return float(self) + other
        c0, t0, v0 = self._parts()
        if isinstance(other, Surd):
            c1, t1, v1 = other._parts()
        else:
            c1, t1, v1 = Fraction(other), {}, {}
        coeffs = dict(t0)
        for k, v in t1.items():
            coeffs[k] = coeffs.get(k, 0) + v
        return Surd._build(c0 + c1, coeffs, {**v0, **v1})

    __radd__ = __add__

    def __neg__(self):
        return Surd._build(-self.const, {k: -v for k, v in self.terms}, dict(self.values))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, float):
            return float(self) * other
        if isinstance(other, Surd):
            raise NotExact("product of two tagged irrationals")
        r = Fraction(other)
        return Surd._build(self.const * r, {k: v * r for k, v in self.terms}, dict(self.values))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Surd):
            raise NotExact("division by a tagged irrational")
        if isinstance(other, float):
            return float(self) / other
        return self * (1 / Fraction(other))

    # Order comparisons go through the float value.  A Surd with terms is never
    # equal to a rational, so only near-ties with rationals can be misjudged.
    def __lt__(self, other):
        return float(self) < float(other)

    def __le__(self, other):
        return float(self) <= float(other)

    def __gt__(self, other):
        return float(self) > float(other)

    def __ge__(self, other):
        return float(self) >= float(other)

    def __repr__(self) -> str:
        parts = [str(self.const)] + [f"{c}*{k}" for k, c in self.terms]
        return "Surd(" + " + ".join(parts) + ")"

    def to_json(self) -> dict:
        vals = dict(self.values)
        return {
            "const": str(self.const),
            "terms": [[k, str(c), vals[k]] for k, c in self.terms],
        }

    @staticmethod
    def from_json(obj: dict) -> "Surd | Fraction":
        coeffs = {k: Fraction(c) for k, c, _ in obj["terms"]}
        values = {k: float(v) for k, _, v in obj["terms"]}
        return Surd._build(Fraction(obj["const"]), coeffs, values)


Number = Union[Fraction, Surd, float]


def irrational(value: float, label: str) -> Surd:
    """An opaque real, tagged as irrational, with a float approximation."""
    return Surd.atom(label, value)


def as_number(x) -> Number:
    """Coerce user input: ints and "p/q" strings become exact rationals."""
    if isinstance(x, (Fraction, Surd)):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, dict):
        return Surd.from_json(x)
    if isinstance(x, float):
        return x
    try:
        import numpy as np

        if isinstance(x, np.integer):
            return Fraction(int(x))
        if isinstance(x, np.floating):
            return float(x)
    except ImportError:  # pragma: no cover
        pass
    raise TypeError(f"unsupported scalar {x!r}")


def is_exact(x: Number) -> bool:
    return isinstance(x, (Fraction, Surd))


def is_rational(x: Number) -> bool:
    """Tag-level rationality; floats are refused."""
    if isinstance(x, Fraction):
        return True
    if isinstance(x, Surd):
        return x.is_rational
    raise TypeError("rationality of a float is undecidable")


def is_zero(x: Number) -> bool:
    if isinstance(x, Surd):
        return False  # _build collapses vanishing tag parts to Fraction
    return x == 0


def number_to_json(x: Number):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    if isinstance(x, Surd):
        return x.to_json()
    return float(x)


def exact_root(x: Fraction, n: int) -> Fraction | None:
    """The positive rational n-th root of x > 0, when it exists."""
    if x <= 0:
        return None
    num = _int_root(x.numerator, n)
    den = _int_root(x.denominator, n)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def _int_root(k: int, n: int) -> int | None:
    r = round(k ** (1.0 / n)) if k < 2**1000 else int(math.exp(math.log(k) / n))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**n == k:
            return cand
    return None
