"""Arithmetic of energy-truncated formal sums over a disk-class monoid.

A ``Monoid`` registers finitely many disk classes, each carrying a symplectic
area at the chosen basepoint, an even Maslov index and an integer boundary
vector.  A ``NovikovElement`` is a finite sum ``sum c * T^g`` over monoid
indices ``g`` (multi-multiplicities of the registered classes), truncated so
that every retained index has area strictly below the cutoff.  The boundary
data drives both the grading and the base-direction derivative of symbols.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InputError, MonoidMismatchError
from .scalars import coeff_is_zero, coerce_coeff, coerce_energy, to_complex


@dataclass(frozen=True)
class DiskClass:
    """A generator class: (area at basepoint, even Maslov index, boundary)."""

    id: int
    energy0: object  # Fraction in exact mode, float otherwise
    maslov: int
    boundary: tuple[int, ...]

    def __post_init__(self):
        if self.energy0 < 0:
            raise InputError(f"class {self.id}: negative area {self.energy0}")
        if self.maslov % 2 != 0:
            raise InputError(f"class {self.id}: odd Maslov index {self.maslov}")


class Monoid:
    """Registry of disk classes over a fixed basepoint.

    Indices are tuples of nonnegative multiplicities, one slot per class.
    Values built over distinct registries never mix.
    """

    def __init__(self, classes: Sequence[DiskClass], dim: int, basepoint=None,
                 exact: bool = True):
        ids = [c.id for c in classes]
        if len(set(ids)) != len(ids):
            raise InputError(f"duplicate class ids: {ids}")
        for c in classes:
            if len(c.boundary) != dim:
                raise InputError(
                    f"class {c.id}: boundary length {len(c.boundary)} != dimension {dim}")
        self.classes = tuple(classes)
        self.dim = dim
        self.exact = exact
        if basepoint is None:
            basepoint = tuple(coerce_energy(0, exact) for _ in range(dim))
        self.basepoint = tuple(coerce_energy(x, exact) for x in basepoint)
        self.zero_index = (0,) * len(classes)
        self._energy_cache: dict = {}
        self._boundary_cache: dict = {}

    def __eq__(self, other):
        return (isinstance(other, Monoid)
                and self.classes == other.classes
                and self.dim == other.dim
                and self.exact == other.exact
                and self.basepoint == other.basepoint)

    def __hash__(self):
        return hash((self.classes, self.dim, self.exact, self.basepoint))

    # -- index arithmetic ---------------------------------------------------

    def energy(self, index: tuple[int, ...]):
        e = self._energy_cache.get(index)
        if e is None:
            e = sum((m * c.energy0 for m, c in zip(index, self.classes)),
                    coerce_energy(0, self.exact))
            self._energy_cache[index] = e
        return e

    def maslov(self, index: tuple[int, ...]) -> int:
        return sum(m * c.maslov for m, c in zip(index, self.classes))

    def boundary(self, index: tuple[int, ...]) -> tuple[int, ...]:
        bd = self._boundary_cache.get(index)
        if bd is None:
            out = [0] * self.dim
            for m, c in zip(index, self.classes):
                if m:
                    for i, b in enumerate(c.boundary):
                        out[i] += m * b
            bd = tuple(out)
            self._boundary_cache[index] = bd
        return bd

    def add_indices(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def generator_index(self, class_pos: int) -> tuple[int, ...]:
        idx = [0] * len(self.classes)
        idx[class_pos] = 1
        return tuple(idx)

    def energy_at(self, index, point) -> object:
        """Area of ``index`` re-based to ``point`` by the boundary pairing."""
        e = self.energy(index)
        bd = self.boundary(index)
        for i in range(self.dim):
            e = e + bd[i] * (point[i] - self.basepoint[i])
        return e

    def rebase(self, point) -> "Monoid":
        """New registry with areas recomputed at ``point``."""
        point = tuple(coerce_energy(x, self.exact) for x in point)
        classes = []
        for c in self.classes:
            e = c.energy0
            for i in range(self.dim):
                e = e + c.boundary[i] * (point[i] - self.basepoint[i])
            if e < 0:
                raise InputError(
                    f"rebasing puts class {c.id} at negative area {e}")
            classes.append(DiskClass(c.id, e, c.maslov, c.boundary))
        return Monoid(classes, self.dim, basepoint=point, exact=self.exact)


def monoid_new(classes: Iterable[tuple], dim: int, basepoint=None,
               exact: bool = True) -> Monoid:
    """Build a registry from ``(id, energy0, maslov, boundary)`` tuples."""
    built = [
        DiskClass(cid, coerce_energy(e, exact), int(mu), tuple(int(b) for b in bd))
        for (cid, e, mu, bd) in classes
    ]
    return Monoid(built, dim, basepoint=basepoint, exact=exact)


class NovikovElement:
    """Finite truncated sum ``sum_g c_g T^g`` with canonical form.

    Stored terms all satisfy ``energy(g) < cutoff`` and carry nonzero
    coefficients.  Instances are immutable by convention; every operation
    returns a fresh element.
    """

    __slots__ = ("monoid", "terms", "cutoff")

    def __init__(self, monoid: Monoid, terms: dict, cutoff):
        self.monoid = monoid
        self.cutoff = cutoff
        clean = {}
        for idx, c in terms.items():
            if coeff_is_zero(c):
                continue
            if monoid.energy(idx) < cutoff:
                clean[idx] = c
        self.terms = clean

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(monoid: Monoid, cutoff) -> "NovikovElement":
        return NovikovElement(monoid, {}, cutoff)

    @staticmethod
    def unit(monoid: Monoid, cutoff, scalar=1) -> "NovikovElement":
        c = coerce_coeff(scalar, monoid.exact)
        return NovikovElement(monoid, {monoid.zero_index: c}, cutoff)

    @staticmethod
    def symbol(monoid: Monoid, cutoff, index, scalar=1) -> "NovikovElement":
        c = coerce_coeff(scalar, monoid.exact)
        return NovikovElement(monoid, {tuple(index): c}, cutoff)

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, NovikovElement):
            return NotImplemented
        return (self.monoid == other.monoid and self.cutoff == other.cutoff
                and self.terms == other.terms)

    def _check_compat(self, other: "NovikovElement"):
        if self.monoid != other.monoid:
            raise MonoidMismatchError("elements over different monoids")
        if self.cutoff != other.cutoff:
            raise MonoidMismatchError(
                f"cutoff mismatch: {self.cutoff} vs {other.cutoff}")

    # -- ring operations ----------------------------------------------------

    def __add__(self, other: "NovikovElement") -> "NovikovElement":
        self._check_compat(other)
        terms = dict(self.terms)
        for idx, c in other.terms.items():
            terms[idx] = terms.get(idx, 0) + c if idx in terms else c
        return NovikovElement(self.monoid, terms, self.cutoff)

    def __neg__(self):
        return NovikovElement(
            self.monoid, {i: -c for i, c in self.terms.items()}, self.cutoff)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "NovikovElement") -> "NovikovElement":
        self._check_compat(other)
        monoid = self.monoid
        out: dict = {}
        for ia, ca in self.terms.items():
            for ib, cb in other.terms.items():
                idx = monoid.add_indices(ia, ib)
                if monoid.energy(idx) >= self.cutoff:
                    continue
                prod = ca * cb
                out[idx] = out.get(idx, 0) + prod if idx in out else prod
        return NovikovElement(monoid, out, self.cutoff)

    def scale(self, scalar) -> "NovikovElement":
        c = coerce_coeff(scalar, self.monoid.exact)
        return NovikovElement(
            self.monoid, {i: v * c for i, v in self.terms.items()}, self.cutoff)

    def truncate(self, cutoff) -> "NovikovElement":
        if cutoff > self.cutoff:
            raise ValueError("cannot raise a truncation bound")
        return NovikovElement(self.monoid, self.terms, cutoff)

    # -- structure maps -----------------------------------------------------

    def valuation(self):
        """Minimal retained area; +inf for the zero element."""
        if not self.terms:
            return float("inf")
        return min(self.monoid.energy(i) for i in self.terms)

    def evaluate(self, t: float) -> complex:
        """Specialize the symbol ``T`` to a positive number."""
        total = 0j
        for idx, c in self.terms.items():
            total += to_complex(c) * (t ** float(self.monoid.energy(idx)))
        return total

    def gm_derivative(self, direction: int) -> "NovikovElement":
        """Area-variation derivative: ``c T^g -> -<bd g, e_i> c T^g``."""
        if not 0 <= direction < self.monoid.dim:
            raise InputError(f"direction {direction} out of range")
        out = {}
        for idx, c in self.terms.items():
            b = self.monoid.boundary(idx)[direction]
            if b:
                out[idx] = c * (-b)
        return NovikovElement(self.monoid, out, self.cutoff)

    def max_abs(self) -> float:
        return max((abs(to_complex(c)) for c in self.terms.values()), default=0.0)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        terms = []
        for idx in sorted(self.terms):
            z = to_complex(self.terms[idx])
            terms.append({"index": list(idx), "re": z.real, "im": z.imag})
        return {"terms": terms, "cutoff": float(self.cutoff)}

    @staticmethod
    def from_json(monoid: Monoid, doc: dict) -> "NovikovElement":
        cutoff = coerce_energy(doc["cutoff"], monoid.exact)
        terms = {}
        for t in doc["terms"]:
            terms[tuple(t["index"])] = coerce_coeff(
                complex(t["re"], t["im"]), monoid.exact)
        return NovikovElement(monoid, terms, cutoff)

    def __repr__(self):
        if not self.terms:
            return "Nov(0)"
        bits = []
        for idx in sorted(self.terms):
            bits.append(f"{self.terms[idx]!r}*T^{idx}")
        return "Nov(" + " + ".join(bits) + ")"


def nov_add(a: NovikovElement, b: NovikovElement) -> NovikovElement:
    return a + b


def nov_mul(a: NovikovElement, b: NovikovElement) -> NovikovElement:
    return a * b


def nov_scale(a: NovikovElement, scalar) -> NovikovElement:
    return a.scale(scalar)


def valuation(a: NovikovElement):
    return a.valuation()


def evaluate(a: NovikovElement, t: float) -> complex:
    return a.evaluate(t)


def gm_derivative(a: NovikovElement, direction: int) -> NovikovElement:
    return a.gm_derivative(direction)
