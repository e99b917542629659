"""Exact coefficient arithmetic: rationals and Gaussian rationals.

Rational coefficients are plain ``fractions.Fraction``.  The complex fixtures
need exact arithmetic in Q(i), which the stdlib does not provide, so
``GaussianRational`` implements the little field arithmetic we need (add, mul,
true division, conjugation) on pairs of Fractions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational


@dataclass(frozen=True)
class GaussianRational:
    re: Fraction
    im: Fraction

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    # -- constructors ------------------------------------------------------

    @staticmethod
    def of(value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, Rational):
            return GaussianRational(Fraction(value), Fraction(0))
        raise TypeError(f"cannot coerce {value!r} to a Gaussian rational")

    # -- predicates --------------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def is_rational(self) -> bool:
        return self.im == 0

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        other = GaussianRational.of(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-GaussianRational.of(other))

    def __rsub__(self, other):
        return GaussianRational.of(other) + (-self)

    def __mul__(self, other):
        other = GaussianRational.of(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussianRational.of(other)
        norm = other.re * other.re + other.im * other.im
        if norm == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational(
            (self.re * other.re + self.im * other.im) / norm,
            (self.im * other.re - self.re * other.im) / norm,
        )

    def __rtruediv__(self, other):
        return GaussianRational.of(other) / self

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))


I_UNIT = GaussianRational(Fraction(0), Fraction(1))


def exact_zero(gaussian: bool):
    return GaussianRational(Fraction(0), Fraction(0)) if gaussian else Fraction(0)


def exact_one(gaussian: bool):
    return GaussianRational(Fraction(1), Fraction(0)) if gaussian else Fraction(1)


def coerce_scalar(value, gaussian: bool):
    """Coerce ``value`` into the exact coefficient domain of a ring."""
    if gaussian:
        return GaussianRational.of(value)
    if isinstance(value, GaussianRational):
        if not value.is_rational():
            raise TypeError("imaginary coefficient in a rational-coefficient ring")
        return value.re
    if isinstance(value, Rational):
        return Fraction(value)
    raise TypeError(f"cannot coerce {value!r} to an exact scalar")


def scalar_to_complex(value) -> complex:
    if isinstance(value, GaussianRational):
        return complex(value)
    return complex(float(value), 0.0)


def scalar_is_exact(value) -> bool:
    return isinstance(value, (GaussianRational, Rational))
