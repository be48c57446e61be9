"""Coefficient groups with a translation-invariant metric: Z, Z2 and Q."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction


class Group(enum.Enum):
    Z = "Z"
    Z2 = "Z2"
    Q = "Q"

    @classmethod
    def parse(cls, name: str) -> "Group":
        try:
            return cls(name)
        except ValueError:
            raise ValueError(f"unknown coefficient group {name!r} (expected Z, Z2 or Q)") from None

    @property
    def zero(self):
        return Fraction(0) if self is Group.Q else 0

    def coerce(self, x):
        """Map an int, Fraction or 'p/q' string into the group."""
        if isinstance(x, str):
            x = Fraction(x.strip())
        if self is Group.Q:
            return Fraction(x)
        x = Fraction(x)
        if x.denominator != 1:
            raise ValueError(f"{x} is not an element of {self.value}")
        n = int(x)
        return n % 2 if self is Group.Z2 else n

    def add(self, a, b):
        s = a + b
        return s % 2 if self is Group.Z2 else s

    def neg(self, a):
        return a if self is Group.Z2 else -a

    def mul(self, n: int, a):
        """Integer multiple n*a (for Q, n may be a Fraction)."""
        if self is Group.Z2:
            return (int(n) * a) % 2
        if self is Group.Z and isinstance(n, Fraction) and n.denominator != 1:
            raise ValueError("non-integer multiple of an integer coefficient")
        return n * a if self is Group.Q else int(n) * a

    def norm(self, a) -> float:
        # Z2 carries the quotient metric of Z/2Z: |1| = inf{|g| : g odd} = 1.
        if self is Group.Z2:
            return float(a % 2)
        return float(abs(a))

    def is_zero(self, a) -> bool:
        return a == 0

    def format(self, a) -> str:
        f = Fraction(a)
        return f"{f.numerator}/{f.denominator}"


@dataclass(frozen=True)
class Coeff:
    group: Group
    value: object

    def __post_init__(self):
        object.__setattr__(self, "value", self.group.coerce(self.value))

    def _check(self, other: "Coeff"):
        if other.group is not self.group:
            raise ValueError(f"group mismatch: {self.group.value} vs {other.group.value}")

    def __add__(self, other: "Coeff") -> "Coeff":
        self._check(other)
        return Coeff(self.group, self.group.add(self.value, other.value))

    def __neg__(self) -> "Coeff":
        return Coeff(self.group, self.group.neg(self.value))

    def __sub__(self, other: "Coeff") -> "Coeff":
        return self + (-other)

    def norm(self) -> float:
        return self.group.norm(self.value)


def add(a: Coeff, b: Coeff) -> Coeff:
    return a + b


def norm(a: Coeff) -> float:
    return a.norm()
