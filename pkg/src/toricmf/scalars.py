"""Coefficient arithmetic: exact Gaussian rationals and float complex.

Exact mode works over Q(i) so that identity checks can demand literal zero
residuals; float mode uses machine complex numbers with a drop threshold.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Union

FLOAT_DROP = 1e-14

Number = Union[int, float, complex, Fraction, "QQi"]


class QQi:
    """A Gaussian rational re + im*i with Fraction components."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    @staticmethod
    def coerce(x) -> "QQi":
        if isinstance(x, QQi):
            return x
        if isinstance(x, complex):
            return QQi(Fraction(x.real), Fraction(x.imag))
        return QQi(Fraction(x))

    def __add__(self, other):
        if isinstance(other, LinExpr):
            return NotImplemented
        other = QQi.coerce(other)
        return QQi(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __sub__(self, other):
        if isinstance(other, LinExpr):
            return NotImplemented
        return self + (-QQi.coerce(other))

    def __rsub__(self, other):
        return QQi.coerce(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, LinExpr):
            return NotImplemented
        other = QQi.coerce(other)
        return QQi(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = QQi.coerce(other)
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return QQi(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    def __rtruediv__(self, other):
        return QQi.coerce(other) / self

    def __eq__(self, other):
        try:
            other = QQi.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self):
        return abs(complex(self))

    def conjugate(self):
        return QQi(self.re, -self.im)

    def __repr__(self):
        if self.im == 0:
            return f"QQi({self.re})"
        return f"QQi({self.re}, {self.im})"


class LinExpr:
    """Quadratic expression in solver unknowns.

    ``const + sum terms[v] * v + sum terms2[(v, w)] * v * w`` with the pair
    keys sorted.  Degree-three products raise: the completion solver only
    ever multiplies two operator values.
    """

    __slots__ = ("const", "terms", "terms2")

    def __init__(self, const=0, terms=None, terms2=None):
        self.const = const
        self.terms = terms or {}
        self.terms2 = terms2 or {}

    @staticmethod
    def var(name, coeff=1):
        return LinExpr(0, {name: coeff})

    def _lift(self, other):
        if isinstance(other, LinExpr):
            return other
        return LinExpr(other)

    def __add__(self, other):
        other = self._lift(other)
        terms = dict(self.terms)
        for v, c in other.terms.items():
            terms[v] = terms[v] + c if v in terms else c
        terms2 = dict(self.terms2)
        for p, c in other.terms2.items():
            terms2[p] = terms2[p] + c if p in terms2 else c
        return LinExpr(self.const + other.const, terms, terms2)

    __radd__ = __add__

    def __neg__(self):
        return LinExpr(-self.const,
                       {v: -c for v, c in self.terms.items()},
                       {p: -c for p, c in self.terms2.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, other):
        other = self._lift(other)
        if (self.terms2 and (other.terms or other.terms2)) or \
                (other.terms2 and self.terms):
            raise ArithmeticError("cubic product of solver unknowns")
        terms = {}
        for v, c in self.terms.items():
            terms[v] = c * other.const
        for v, c in other.terms.items():
            terms[v] = terms[v] + self.const * c if v in terms \
                else self.const * c
        terms2 = {}
        for p, c in self.terms2.items():
            terms2[p] = c * other.const
        for p, c in other.terms2.items():
            terms2[p] = terms2[p] + self.const * c if p in terms2 \
                else self.const * c
        for v1, c1 in self.terms.items():
            for v2, c2 in other.terms.items():
                p = (v1, v2) if v1 <= v2 else (v2, v1)
                prod = c1 * c2
                terms2[p] = terms2[p] + prod if p in terms2 else prod
        return LinExpr(self.const * other.const, terms, terms2)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return (not self.terms and not self.terms2
                and coeff_is_zero(self.const))

    def subs(self, assignment: dict) -> "LinExpr":
        """Substitute concrete values for a subset of the variables."""
        out = LinExpr(self.const)
        for v, c in self.terms.items():
            if v in assignment:
                out = out + LinExpr(c * assignment[v])
            else:
                out = out + LinExpr(0, {v: c})
        for (v1, v2), c in self.terms2.items():
            e1 = LinExpr(assignment[v1]) if v1 in assignment \
                else LinExpr.var(v1)
            e2 = LinExpr(assignment[v2]) if v2 in assignment \
                else LinExpr.var(v2)
            out = out + e1 * e2 * c
        return out

    def __repr__(self):
        return (f"LinExpr({self.const!r}, {self.terms!r}, "
                f"{self.terms2!r})")


def coeff_one(exact: bool):
    return QQi(1) if exact else complex(1.0)


def coeff_zero(exact: bool):
    return QQi(0) if exact else complex(0.0)


def coerce_coeff(x, exact: bool):
    """Bring a number into the working coefficient field."""
    if exact:
        return QQi.coerce(x)
    return complex(x)


def coeff_is_zero(c, *, drop_tol: float = FLOAT_DROP) -> bool:
    """Canonical-form test: exact zero for QQi, threshold for complex."""
    if isinstance(c, QQi):
        return not c
    if isinstance(c, LinExpr):
        return c.is_zero()
    return abs(c) < drop_tol


def to_complex(c) -> complex:
    return complex(c)


def coerce_energy(x, exact: bool):
    """Energies are Fractions in exact mode, floats otherwise."""
    if exact:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, str):
            return Fraction(x)
        return Fraction(x)  # exact binary value of a float input
    return float(x)
