"""Graded sign engine and the exterior algebra on n odd generators.

Degrees here are Z/2 parities unless stated otherwise; wedge tuples store
0-based generator positions sorted ascending.
"""
from __future__ import annotations

from typing import Sequence

from .errors import InputError
from .novikov import Monoid, NovikovElement


# -- sign engine -------------------------------------------------------------

def koszul_sign(perm: Sequence[int], degrees: Sequence[int]) -> int:
    """Sign of reordering graded symbols by ``perm``.

    ``perm[i]`` is the original position of the symbol landing in slot ``i``.
    Each inverted pair of symbols of degrees p, q contributes ``(-1)**(p*q)``;
    the permutation itself carries no extra sign.
    """
    if len(perm) != len(degrees):
        raise InputError("permutation/degree length mismatch")
    exponent = 0
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                exponent += degrees[perm[i]] * degrees[perm[j]]
    return -1 if exponent % 2 else 1


def epsilon_sign(degrees: Sequence[int]) -> int:
    """``(-1)**sum (k-i)*deg_i`` over slots i=1..k."""
    k = len(degrees)
    exponent = sum((k - i) * d for i, d in enumerate(degrees, start=1))
    return -1 if exponent % 2 else 1


def eta_sign(left_degrees: Sequence[int], right_degrees: Sequence[int]) -> int:
    """Shuffle sign collecting first factors before second factors.

    For symbols (a_1 x b_1) ... (a_k x b_k) rearranged to (a_1..a_k)(b_1..b_k)
    the sign is ``(-1)**sum_i |a_i| * (|b_{i+1}| + ... + |b_k|)``.
    """
    if len(left_degrees) != len(right_degrees):
        raise InputError("eta_sign length mismatch")
    exponent = 0
    tail = 0
    for i in range(len(left_degrees) - 1, -1, -1):
        exponent += left_degrees[i] * tail
        tail += right_degrees[i]
    return -1 if exponent % 2 else 1


# -- wedge index helpers ------------------------------------------------------

def wedge_merge(a: tuple[int, ...], b: tuple[int, ...]):
    """Merge two sorted wedge tuples; returns (sign, merged) or (0, None)."""
    if set(a) & set(b):
        return 0, None
    merged = sorted(a + b)
    # count transpositions needed to interleave b into a
    sign = 1
    for pos_b, gen in enumerate(b):
        passed = sum(1 for x in a if x > gen)
        if passed % 2:
            sign = -sign
    return sign, tuple(merged)


def all_wedge_tuples(n: int) -> list[tuple[int, ...]]:
    out = [()]
    for gen in range(n):
        out = out + [t + (gen,) for t in out]
    return sorted(out, key=lambda t: (len(t), t))


class ExtElement:
    """Exterior-algebra element with Novikov coefficients.

    ``components`` maps sorted wedge tuples to NovikovElements; zero
    components are dropped.  The Z/2 degree of a term is its wedge length
    (Maslov contributions are even).
    """

    __slots__ = ("dim", "monoid", "cutoff", "components")

    def __init__(self, dim: int, monoid: Monoid, cutoff, components: dict):
        self.dim = dim
        self.monoid = monoid
        self.cutoff = cutoff
        self.components = {
            w: c for w, c in components.items() if not c.is_zero()
        }

    @staticmethod
    def zero(dim: int, monoid: Monoid, cutoff) -> "ExtElement":
        return ExtElement(dim, monoid, cutoff, {})

    @staticmethod
    def unit(dim: int, monoid: Monoid, cutoff, scalar=1) -> "ExtElement":
        return ExtElement(dim, monoid, cutoff,
                          {(): NovikovElement.unit(monoid, cutoff, scalar)})

    @staticmethod
    def generator(dim: int, monoid: Monoid, cutoff, i: int, scalar=1) -> "ExtElement":
        if not 0 <= i < dim:
            raise InputError(f"generator {i} out of range")
        return ExtElement(dim, monoid, cutoff,
                          {(i,): NovikovElement.unit(monoid, cutoff, scalar)})

    @staticmethod
    def basis(dim: int, monoid: Monoid, cutoff, wedge: tuple[int, ...],
              coeff: NovikovElement | None = None) -> "ExtElement":
        if coeff is None:
            coeff = NovikovElement.unit(monoid, cutoff)
        return ExtElement(dim, monoid, cutoff, {tuple(wedge): coeff})

    # -- linear structure ---------------------------------------------------

    def __add__(self, other: "ExtElement") -> "ExtElement":
        comps = dict(self.components)
        for w, c in other.components.items():
            comps[w] = comps[w] + c if w in comps else c
        return ExtElement(self.dim, self.monoid, self.cutoff, comps)

    def __neg__(self):
        return ExtElement(self.dim, self.monoid, self.cutoff,
                          {w: -c for w, c in self.components.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, scalar) -> "ExtElement":
        return ExtElement(self.dim, self.monoid, self.cutoff,
                          {w: c.scale(scalar) for w, c in self.components.items()})

    def scale_nov(self, nov: NovikovElement) -> "ExtElement":
        return ExtElement(self.dim, self.monoid, self.cutoff,
                          {w: c * nov for w, c in self.components.items()})

    def is_zero(self) -> bool:
        return not self.components

    def __eq__(self, other):
        if not isinstance(other, ExtElement):
            return NotImplemented
        return (self.dim == other.dim and self.monoid == other.monoid
                and self.cutoff == other.cutoff
                and self.components == other.components)

    def parity(self) -> int | None:
        """Z/2 degree if homogeneous, else None."""
        parities = {len(w) % 2 for w in self.components}
        if not parities:
            return 0
        if len(parities) > 1:
            return None
        return parities.pop()

    def parity_split(self) -> tuple["ExtElement", "ExtElement"]:
        even = {w: c for w, c in self.components.items() if len(w) % 2 == 0}
        odd = {w: c for w, c in self.components.items() if len(w) % 2 == 1}
        return (ExtElement(self.dim, self.monoid, self.cutoff, even),
                ExtElement(self.dim, self.monoid, self.cutoff, odd))

    def max_abs(self) -> float:
        return max((c.max_abs() for c in self.components.values()), default=0.0)

    # -- products ------------------------------------------------------------

    def wedge(self, other: "ExtElement") -> "ExtElement":
        """Graded-commutative exterior product."""
        if self.dim != other.dim:
            raise InputError("dimension mismatch in wedge")
        comps: dict = {}
        for wa, ca in self.components.items():
            for wb, cb in other.components.items():
                sign, merged = wedge_merge(wa, wb)
                if sign == 0:
                    continue
                term = (ca * cb).scale(sign)
                comps[merged] = comps[merged] + term if merged in comps else term
        return ExtElement(self.dim, self.monoid, self.cutoff, comps)

    def contract(self, v: Sequence[int]) -> "ExtElement":
        """Interior product by the integer vector ``v`` (odd derivation)."""
        if len(v) != self.dim:
            raise InputError("contraction vector length mismatch")
        comps: dict = {}
        for w, c in self.components.items():
            for pos, gen in enumerate(w):
                if v[gen] == 0:
                    continue
                sign = -1 if pos % 2 else 1
                red = w[:pos] + w[pos + 1:]
                term = c.scale(sign * v[gen])
                comps[red] = comps[red] + term if red in comps else term
        return ExtElement(self.dim, self.monoid, self.cutoff, comps)

    def evaluate(self, t: float) -> dict[tuple[int, ...], complex]:
        return {w: c.evaluate(t) for w, c in self.components.items()}

    def __repr__(self):
        if not self.components:
            return "Ext(0)"
        bits = []
        for w in sorted(self.components, key=lambda x: (len(x), x)):
            label = "1" if not w else "e" + "".join(str(i + 1) for i in w)
            bits.append(f"{label}:{self.components[w]!r}")
        return "Ext(" + ", ".join(bits) + ")"


def wedge(a: ExtElement, b: ExtElement) -> ExtElement:
    return a.wedge(b)


def contract(v: Sequence[int], a: ExtElement) -> ExtElement:
    return a.contract(v)
