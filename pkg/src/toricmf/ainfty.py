"""Curved A-infinity structures on exterior-algebra fibers.

Operators are stored as explicit tables on the wedge basis, one table per
(arity, monoid index) pair.  Two sign conventions are supported:

* ``"fooo"`` -- operators are degree-one maps between suspensions; element
  signs in the quadratic relation use shifted parities (wedge degree - 1).
* ``"epsilon"`` -- defining relations carry ``(-1)**(r + s*t)`` and element
  signs use unshifted parities; this is the convention in which tensoring
  with a curved dga is written.

Conversion between the two rescales a table entry by
``(-1)**sum_i (k-i)|a_i|`` computed on its basis inputs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import CutoffError, InputError, MonoidMismatchError
from .graded import ExtElement, all_wedge_tuples, epsilon_sign
from .novikov import Monoid, NovikovElement
from .scalars import coeff_is_zero

CONVENTION_FOOO = "fooo"
CONVENTION_EPS = "epsilon"

WedgeTuple = tuple[int, ...]
InputTuple = tuple  # tuple of WedgeTuple
Table = dict  # InputTuple -> {WedgeTuple: coeff}


@dataclass
class MultiOp:
    """One multilinear operator: an arity, a monoid index and a basis table."""

    arity: int
    index: tuple[int, ...]
    table: Table = field(default_factory=dict)

    def value(self, inputs: InputTuple) -> dict:
        return self.table.get(tuple(inputs), {})


def _tuple_parities(wedges: Sequence[WedgeTuple]) -> tuple[int, ...]:
    return tuple(len(w) % 2 for w in wedges)


class AInftyStructure:
    """A family of operator tables with unit and convention metadata."""

    def __init__(self, monoid: Monoid, dim: int, operators: dict,
                 arity_cutoff: int, energy_cutoff,
                 convention: str = CONVENTION_FOOO, strict_unit: bool = True):
        if convention not in (CONVENTION_FOOO, CONVENTION_EPS):
            raise InputError(f"unknown convention {convention!r}")
        self.monoid = monoid
        self.dim = dim
        self.operators = operators  # (arity, index) -> MultiOp
        self.arity_cutoff = arity_cutoff
        self.energy_cutoff = energy_cutoff
        self.convention = convention
        self.strict_unit = strict_unit
        self._arity_cache: dict | None = None

    # -- basic helpers --------------------------------------------------------

    def zero_element(self) -> ExtElement:
        return ExtElement.zero(self.dim, self.monoid, self.energy_cutoff)

    def unit_element(self, scalar=1) -> ExtElement:
        return ExtElement.unit(self.dim, self.monoid, self.energy_cutoff, scalar)

    def generator(self, i: int, scalar=1) -> ExtElement:
        return ExtElement.generator(self.dim, self.monoid, self.energy_cutoff, i, scalar)

    def basis_element(self, wedge: WedgeTuple,
                      coeff: NovikovElement | None = None) -> ExtElement:
        return ExtElement.basis(self.dim, self.monoid, self.energy_cutoff,
                                wedge, coeff)

    def wedge_basis(self) -> list[WedgeTuple]:
        return all_wedge_tuples(self.dim)

    def ops_of_arity(self, k: int) -> list[MultiOp]:
        if self._arity_cache is None:
            cache: dict = {}
            for (a, _), op in self.operators.items():
                cache.setdefault(a, []).append(op)
            self._arity_cache = cache
        return self._arity_cache.get(k, [])

    def set_table_value(self, arity: int, index: tuple[int, ...],
                        inputs: InputTuple, output: dict) -> None:
        key = (arity, tuple(index))
        op = self.operators.get(key)
        if op is None:
            op = MultiOp(arity, tuple(index))
            self.operators[key] = op
            self._arity_cache = None
        cleaned = {w: c for w, c in output.items() if not coeff_is_zero(c)}
        if cleaned:
            op.table[tuple(inputs)] = cleaned
        else:
            op.table.pop(tuple(inputs), None)

    def copy(self) -> "AInftyStructure":
        ops = {
            key: MultiOp(op.arity, op.index,
                         {inp: dict(out) for inp, out in op.table.items()})
            for key, op in self.operators.items()
        }
        return AInftyStructure(self.monoid, self.dim, ops, self.arity_cutoff,
                               self.energy_cutoff, self.convention,
                               self.strict_unit)

    # -- evaluation ------------------------------------------------------------

    def apply(self, inputs: Sequence[ExtElement]) -> ExtElement:
        """Evaluate ``m_k`` on the inputs, summing all stored indices."""
        k = len(inputs)
        if k > self.arity_cutoff:
            raise CutoffError(f"arity {k} exceeds cutoff {self.arity_cutoff}")
        for x in inputs:
            if x.monoid != self.monoid:
                raise MonoidMismatchError("input over a different monoid")
        monoid = self.monoid
        cutoff = self.energy_cutoff
        out_components: dict = {}

        ops = self.ops_of_arity(k)
        if not ops:
            return self.zero_element()

        # multilinear expansion over basis terms of each input
        term_lists = []
        for x in inputs:
            terms = []
            for w, nov in x.components.items():
                for idx, c in nov.terms.items():
                    terms.append((w, idx, c))
            term_lists.append(terms)

        for choice in itertools.product(*term_lists):
            wedges = tuple(t[0] for t in choice)
            idx_sum = monoid.zero_index
            coeff = None
            for (_, idx, c) in choice:
                idx_sum = monoid.add_indices(idx_sum, idx)
                coeff = c if coeff is None else coeff * c
            for op in ops:
                out = op.table.get(wedges)
                if not out:
                    continue
                total_idx = monoid.add_indices(idx_sum, op.index)
                if monoid.energy(total_idx) >= cutoff:
                    continue
                for w_out, c_out in out.items():
                    c_total = c_out if coeff is None else c_out * coeff
                    comp = out_components.setdefault(w_out, {})
                    comp[total_idx] = comp.get(total_idx, 0) + c_total \
                        if total_idx in comp else c_total

        components = {
            w: NovikovElement(monoid, terms, cutoff)
            for w, terms in out_components.items()
        }
        return ExtElement(self.dim, monoid, cutoff, components)

    def apply_basis(self, tup: InputTuple, cache: dict | None = None) -> ExtElement:
        if cache is not None:
            hit = cache.get(tup)
            if hit is not None:
                return hit
        out = self.apply([self.basis_element(w) for w in tup])
        if cache is not None:
            cache[tup] = out
        return out

    def _apply_inserted(self, pre: InputTuple, elem: ExtElement,
                        post: InputTuple) -> ExtElement:
        """Apply the arity-(len(pre)+1+len(post)) operators with one general
        element in the marked slot and basis elements elsewhere."""
        k = len(pre) + 1 + len(post)
        if k > self.arity_cutoff:
            raise CutoffError(f"arity {k} exceeds cutoff {self.arity_cutoff}")
        monoid = self.monoid
        cutoff = self.energy_cutoff
        ops = self.ops_of_arity(k)
        if not ops or elem.is_zero():
            return self.zero_element()
        out_components: dict = {}
        for w_mid, nov in elem.components.items():
            wedges = pre + (w_mid,) + post
            for idx_mid, c_mid in nov.terms.items():
                for op in ops:
                    out = op.table.get(wedges)
                    if not out:
                        continue
                    total_idx = monoid.add_indices(idx_mid, op.index)
                    if monoid.energy(total_idx) >= cutoff:
                        continue
                    for w_out, c_out in out.items():
                        comp = out_components.setdefault(w_out, {})
                        prod = c_out * c_mid
                        comp[total_idx] = comp[total_idx] + prod \
                            if total_idx in comp else prod
        components = {
            w: NovikovElement(monoid, terms, cutoff)
            for w, terms in out_components.items()
        }
        return ExtElement(self.dim, monoid, cutoff, components)

    # -- the quadratic relation --------------------------------------------------

    def relation_residual_basis(self, tup: InputTuple,
                                cache: dict | None = None) -> ExtElement:
        """Relation residual on a tuple of wedge-basis inputs."""
        n = len(tup)
        if n + 1 > self.arity_cutoff:
            raise CutoffError(
                f"relation at arity {n} needs operators up to arity {n + 1}, "
                f"cutoff is {self.arity_cutoff}")
        parities = [len(w) % 2 for w in tup]
        residual = self.zero_element()
        for s in range(0, n + 1):
            for r in range(0, n - s + 1):
                t = n - s - r
                inner = self.apply_basis(tup[r:r + s], cache)
                if inner.is_zero():
                    continue
                term = self._apply_inserted(tup[:r], inner, tup[r + s:])
                if term.is_zero():
                    continue
                sign = self._relation_sign(r, s, t, parities)
                if sign < 0:
                    term = -term
                residual = residual + term
        return residual

    def relation_residual(self, inputs: Sequence[ExtElement]) -> ExtElement:
        """Signed double sum of nested applications; zero certifies the axiom."""
        n = len(inputs)
        if n + 1 > self.arity_cutoff:
            raise CutoffError(
                f"relation at arity {n} needs operators up to arity {n + 1}, "
                f"cutoff is {self.arity_cutoff}")
        pieces = [x.parity_split() for x in inputs]
        residual = self.zero_element()
        for combo in itertools.product(*(range(2) for _ in range(n))):
            homog = [pieces[i][p] for i, p in enumerate(combo)]
            if any(x.is_zero() for x in homog) and n > 0:
                continue
            residual = residual + self._residual_homogeneous(homog, list(combo))
        return residual

    def _residual_homogeneous(self, inputs, parities) -> ExtElement:
        n = len(inputs)
        residual = self.zero_element()
        for s in range(0, n + 1):
            for r in range(0, n - s + 1):
                t = n - s - r
                inner = self.apply(inputs[r:r + s])
                if inner.is_zero():
                    continue
                outer_inputs = list(inputs[:r]) + [inner] + list(inputs[r + s:])
                term = self.apply(outer_inputs)
                if term.is_zero():
                    continue
                sign = self._relation_sign(r, s, t, parities)
                if sign < 0:
                    term = -term
                residual = residual + term
        return residual

    def _relation_sign(self, r: int, s: int, t: int, parities) -> int:
        if self.convention == CONVENTION_FOOO:
            exponent = sum(parities[i] + 1 for i in range(r))
        else:
            exponent = r + s * t + s * sum(parities[i] for i in range(r))
        return -1 if exponent % 2 else 1

    def relation_suite(self, max_arity: int,
                       tuples: Sequence[InputTuple] | None = None) -> dict:
        """Residuals over all wedge-basis tuples up to ``max_arity``."""
        basis = self.wedge_basis()
        failures = []
        count = 0
        worst = 0.0
        if tuples is None:
            tuples = []
            for k in range(0, max_arity + 1):
                tuples.extend(itertools.product(basis, repeat=k))
        cache: dict = {}
        for tup in tuples:
            res = self.relation_residual_basis(tuple(tup), cache)
            count += 1
            if not res.is_zero():
                worst = max(worst, res.max_abs())
                failures.append(tuple(tup))
        return {"checked": count, "failures": failures, "max_residual": worst,
                "ok": not failures}

    # -- convention conversion ----------------------------------------------------

    def convert_convention(self) -> "AInftyStructure":
        new_ops = {}
        for key, op in self.operators.items():
            table = {}
            for inp, out in op.table.items():
                sign = epsilon_sign(_tuple_parities(inp))
                table[inp] = {w: c if sign > 0 else -c for w, c in out.items()}
            new_ops[key] = MultiOp(op.arity, op.index, table)
        target = CONVENTION_EPS if self.convention == CONVENTION_FOOO \
            else CONVENTION_FOOO
        return AInftyStructure(self.monoid, self.dim, new_ops, self.arity_cutoff,
                               self.energy_cutoff, target, self.strict_unit)

    # -- strict unit ---------------------------------------------------------------

    def check_strict_unit(self) -> dict:
        """Verify unit axioms over the wedge basis; list violations."""
        if not self.strict_unit:
            raise InputError("structure does not flag a strict unit")
        violations = []
        basis = self.wedge_basis()
        unit = self.unit_element()
        fooo = self.convention == CONVENTION_FOOO

        for w in basis:
            x = self.basis_element(w)
            left = self.apply([unit, x])
            right = self.apply([x, unit])
            if left != x:
                violations.append(("m2(1,x) != x", w))
            expected = -x if (fooo and len(w) % 2) else x
            if right != expected:
                violations.append(("m2(x,1) wrong", w))

        # unit insertions must vanish at every other arity
        for (k, idx), op in self.operators.items():
            if k == 2 and idx == self.monoid.zero_index:
                continue
            for inp, out in op.table.items():
                if () in inp and out:
                    violations.append(("unit insertion survives", (k, idx, inp)))
        return {"ok": not violations, "violations": violations}

    def __repr__(self):
        return (f"AInftyStructure(dim={self.dim}, ops={len(self.operators)}, "
                f"K={self.arity_cutoff}, E={self.energy_cutoff}, "
                f"convention={self.convention!r})")


def apply(A: AInftyStructure, inputs: Sequence[ExtElement]) -> ExtElement:
    return A.apply(inputs)


def relation_residual(A: AInftyStructure, inputs: Sequence[ExtElement]) -> ExtElement:
    return A.relation_residual(inputs)


def convert_convention(A: AInftyStructure) -> AInftyStructure:
    return A.convert_convention()


def check_strict_unit(A: AInftyStructure) -> dict:
    return A.check_strict_unit()


# -- tensor with a curved differential graded algebra ---------------------------

class NovikovCDGA:
    """Scalars over the symbol ring: evenly graded, zero differential."""

    def __init__(self, monoid: Monoid, cutoff, curvature: NovikovElement | None = None):
        self.monoid = monoid
        self.cutoff = cutoff
        self.curvature = curvature if curvature is not None \
            else NovikovElement.zero(monoid, cutoff)

    def zero(self):
        return NovikovElement.zero(self.monoid, self.cutoff)

    def one(self):
        return NovikovElement.unit(self.monoid, self.cutoff)

    def embed_nov(self, nov: NovikovElement):
        return nov

    def mul(self, a, b):
        return a * b

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def d(self, a):
        return self.zero()

    def is_zero(self, a) -> bool:
        return a.is_zero()

    def max_abs(self, a) -> float:
        return a.max_abs()


class TensorElement:
    """Element of B (x) A: wedge components with B-valued coefficients."""

    __slots__ = ("dga", "dim", "components")

    def __init__(self, dga, dim: int, components: dict):
        self.dga = dga
        self.dim = dim
        self.components = {w: b for w, b in components.items()
                           if not dga.is_zero(b)}

    def is_zero(self) -> bool:
        return not self.components

    def __add__(self, other):
        comps = dict(self.components)
        for w, b in other.components.items():
            comps[w] = self.dga.add(comps[w], b) if w in comps else b
        return TensorElement(self.dga, self.dim, comps)

    def __neg__(self):
        return TensorElement(self.dga, self.dim,
                             {w: self.dga.neg(b) for w, b in self.components.items()})

    def __sub__(self, other):
        return self + (-other)

    def parity_split(self):
        even = {w: b for w, b in self.components.items() if len(w) % 2 == 0}
        odd = {w: b for w, b in self.components.items() if len(w) % 2 == 1}
        return (TensorElement(self.dga, self.dim, even),
                TensorElement(self.dga, self.dim, odd))

    def max_abs(self) -> float:
        return max((self.dga.max_abs(b) for b in self.components.values()),
                   default=0.0)


class TensorAInfty:
    """Tensor of an evenly graded curved dga with a fiber structure.

    The fiber structure must be given in the epsilon convention; the tensor
    operators are again in the epsilon convention.
    """

    def __init__(self, dga, A: AInftyStructure):
        if A.convention != CONVENTION_EPS:
            raise InputError("tensor factor must use the epsilon convention")
        self.dga = dga
        self.A = A
        self.dim = A.dim

    def zero_element(self) -> TensorElement:
        return TensorElement(self.dga, self.dim, {})

    def element(self, components: dict) -> TensorElement:
        return TensorElement(self.dga, self.dim, components)

    def from_b(self, b, wedge: WedgeTuple = ()) -> TensorElement:
        return TensorElement(self.dga, self.dim, {tuple(wedge): b})

    def _fiber_to_tensor(self, x: ExtElement, b_factor=None) -> TensorElement:
        comps = {}
        for w, nov in x.components.items():
            b = self.dga.embed_nov(nov)
            if b_factor is not None:
                b = self.dga.mul(b_factor, b)
            comps[w] = self.dga.add(comps[w], b) if w in comps else b
        return TensorElement(self.dga, self.dim, comps)

    def curvature(self) -> TensorElement:
        """``1 (x) m0 + W (x) 1`` with W the dga curvature."""
        m0 = self.A.apply([])
        out = self._fiber_to_tensor(m0)
        return out + self.from_b(self.dga.curvature, ())

    def apply(self, inputs: Sequence[TensorElement]) -> TensorElement:
        k = len(inputs)
        if k == 0:
            return self.curvature()
        if k == 1:
            x = inputs[0]
            out = self.zero_element()
            for w, b in x.components.items():
                db = self.dga.d(b)
                if not self.dga.is_zero(db):
                    out = out + TensorElement(self.dga, self.dim, {w: db})
                m1 = self.A.apply([self.A.basis_element(w)])
                if not m1.is_zero():
                    out = out + self._fiber_to_tensor(m1, b_factor=b)
            return out
        out = self.zero_element()
        for choice in itertools.product(*(x.components.items() for x in inputs)):
            wedges = [w for w, _ in choice]
            b_prod = None
            for _, b in choice:
                b_prod = b if b_prod is None else self.dga.mul(b_prod, b)
            mk = self.A.apply([self.A.basis_element(w) for w in wedges])
            if mk.is_zero():
                continue
            out = out + self._fiber_to_tensor(mk, b_factor=b_prod)
        return out

    def relation_residual(self, inputs: Sequence[TensorElement]) -> TensorElement:
        n = len(inputs)
        pieces = [x.parity_split() for x in inputs]
        residual = self.zero_element()
        for combo in itertools.product(*(range(2) for _ in range(n))):
            homog = [pieces[i][p] for i, p in enumerate(combo)]
            if any(x.is_zero() for x in homog) and n > 0:
                continue
            residual = residual + self._residual_homog(homog, list(combo))
        return residual

    def _residual_homog(self, inputs, parities) -> TensorElement:
        n = len(inputs)
        residual = self.zero_element()
        for s in range(0, n + 1):
            for r in range(0, n - s + 1):
                t = n - s - r
                inner = self.apply(inputs[r:r + s])
                if inner.is_zero():
                    continue
                term = self.apply(list(inputs[:r]) + [inner] + list(inputs[r + s:]))
                if term.is_zero():
                    continue
                exponent = r + s * t + s * sum(parities[:r])
                if exponent % 2:
                    term = -term
                residual = residual + term
        return residual


def tensor_with_cdga(B, A: AInftyStructure) -> TensorAInfty:
    return TensorAInfty(B, A)
