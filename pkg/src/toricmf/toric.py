"""Moment-polytope ingestion and the divisor-generated fiber structure.

One disk class per facet (Maslov 2, coefficient one); on degree-one inputs
the class operators are the fully symmetric pairing products forced by the
divisor identity, and the zero-energy layer is the exterior product.  Higher
wedge inputs are filled in by ``complete``, which solves the quadratic
relations level by level as exact linear systems.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .ainfty import CONVENTION_FOOO, AInftyStructure, MultiOp
from .errors import InconsistentSystemError, InputError
from .graded import ExtElement, all_wedge_tuples, wedge_merge
from .novikov import DiskClass, Monoid
from .scalars import LinExpr, coeff_is_zero, coerce_coeff, coerce_energy


@dataclass(frozen=True)
class Facet:
    normal: tuple[int, ...]
    offset: object

    def support(self, point):
        """Value of <normal, point> - offset."""
        return sum(n * x for n, x in zip(self.normal, point)) - self.offset


@dataclass
class ToricData:
    """Validated polytope input: facets and an interior basepoint."""

    dim: int
    facets: tuple[Facet, ...]
    basepoint: tuple
    exact: bool = True

    def supports(self, point) -> list:
        return [f.support(point) for f in self.facets]

    def is_interior(self, point) -> bool:
        return all(s > 0 for s in self.supports(point))


def parse_polytope(doc: dict, exact: bool = True) -> ToricData:
    """Validate a polytope document; see README for the schema."""
    try:
        dim = int(doc["dimension"])
        raw_facets = doc["facets"]
        raw_base = doc["basepoint"]
    except (KeyError, TypeError) as exc:
        raise InputError(f"polytope document missing field: {exc}") from exc
    if dim < 1:
        raise InputError(f"dimension must be positive, got {dim}")
    if len(raw_base) != dim:
        raise InputError("basepoint length does not match dimension")
    facets = []
    for pos, f in enumerate(raw_facets):
        normal = f["normal"]
        if len(normal) != dim:
            raise InputError(f"facet {pos}: normal length != dimension")
        for comp in normal:
            if int(comp) != comp:
                raise InputError(f"facet {pos}: non-integer normal entry {comp}")
        offset = coerce_energy(f["offset"], exact)
        facets.append(Facet(tuple(int(c) for c in normal), offset))
    basepoint = tuple(coerce_energy(x, exact) for x in raw_base)
    data = ToricData(dim, tuple(facets), basepoint, exact)
    bad = [i for i, s in enumerate(data.supports(basepoint)) if s <= 0]
    if bad:
        raise InputError(f"basepoint is not interior (facets {bad})")
    return data


def toric_monoid(data: ToricData) -> Monoid:
    classes = [
        DiskClass(i, f.support(data.basepoint), 2, f.normal)
        for i, f in enumerate(data.facets)
    ]
    return Monoid(classes, data.dim, basepoint=data.basepoint, exact=data.exact)


# -- the divisor-generated core ------------------------------------------------

def divisor_core(data: ToricData, energy_cutoff=3, arity_cutoff: int = 6) -> AInftyStructure:
    """Fiber structure generated by the divisor identity.

    Zero-energy layer: arity two acts by the signed exterior product
    ``(a, b) -> (-1)^{|a|} a ^ b`` (all other zero-energy arities vanish).
    Each facet class carries, at every arity up to the cutoff, the symmetric
    product of boundary pairings on degree-one inputs and an area-weighted
    unit at arity zero.
    """
    monoid = toric_monoid(data)
    E = coerce_energy(energy_cutoff, data.exact)
    n = data.dim
    one = coerce_coeff(1, data.exact)
    operators: dict = {}

    # zero-energy layer
    basis = all_wedge_tuples(n)
    wedge_table = {}
    for wa in basis:
        for wb in basis:
            sign, merged = wedge_merge(wa, wb)
            if sign == 0:
                continue
            if len(wa) % 2:
                sign = -sign
            wedge_table[(wa, wb)] = {merged: coerce_coeff(sign, data.exact)}
    operators[(2, monoid.zero_index)] = MultiOp(2, monoid.zero_index, wedge_table)

    # facet classes
    for pos, cls in enumerate(monoid.classes):
        idx = monoid.generator_index(pos)
        operators[(0, idx)] = MultiOp(0, idx, {(): {(): one}})
        for k in range(1, arity_cutoff + 1):
            table = {}
            for combo in itertools.product(range(n), repeat=k):
                coeff = Fraction(1, math.factorial(k)) if data.exact \
                    else 1.0 / math.factorial(k)
                val = coerce_coeff(coeff, data.exact)
                for j in combo:
                    val = val * cls.boundary[j]
                if coeff_is_zero(val):
                    continue
                inputs = tuple((j,) for j in combo)
                table[inputs] = {(): val}
            if table:
                operators[(k, idx)] = MultiOp(k, idx, table)

    return AInftyStructure(monoid, n, operators, arity_cutoff, E,
                           convention=CONVENTION_FOOO, strict_unit=True)


# -- completion by level-wise linear solves -------------------------------------

def _instance_tuples(basis, n_rel: int):
    yield from itertools.product(basis, repeat=n_rel)


def _feasible_outputs(basis, tup, arity: int, maslov: int) -> list:
    """Wedge-degree bookkeeping: an operator of arity k and Maslov weight mu
    shifts wedge degree by 2 - k - mu."""
    out_deg = sum(len(w) for w in tup) + 2 - arity - maslov
    return [w for w in basis if len(w) == out_deg]


def _is_unknown_tuple(tup, mult: int) -> bool:
    """Tuples the generated core leaves open at a given multiplicity level."""
    if any(len(w) == 0 for w in tup):
        return False  # strict unit insertions vanish identically
    if mult == 1 and all(len(w) == 1 for w in tup):
        return False  # fixed by the divisor closed form
    return True


class _SparseSolver:
    """Incremental Gauss-Jordan over exact (or complex) coefficients.

    Stored pivot rows are kept fully reduced; a column index maps each free
    variable to the pivot rows containing it so eliminations touch only the
    affected rows.
    """

    def __init__(self):
        self.pivots = {}  # var -> (row dict over free vars, rhs)
        self.columns = {}  # free var -> set of pivot vars whose row holds it
        self.inconsistent = []

    def _reduce(self, row, rhs):
        changed = True
        while changed:
            changed = False
            for var in list(row):
                if var in self.pivots:
                    prow, prhs = self.pivots[var]
                    factor = row[var]
                    del row[var]
                    for v2, c2 in prow.items():
                        row[v2] = row.get(v2, 0) - factor * c2 \
                            if v2 in row else -factor * c2
                        if coeff_is_zero(row[v2]):
                            del row[v2]
                    rhs = rhs - factor * prhs
                    changed = True
                    break
        return row, rhs

    def add(self, row: dict, rhs, tag=None):
        row = {v: c for v, c in row.items() if not coeff_is_zero(c)}
        row, rhs = self._reduce(row, rhs)
        if not row:
            if not coeff_is_zero(rhs):
                self.inconsistent.append((tag, rhs))
            return
        var = next(iter(row))
        inv = 1 / row[var] if not isinstance(row[var], complex) \
            else 1.0 / row[var]
        del row[var]
        prow = {v: c * inv for v, c in row.items()}
        prhs = rhs * inv
        # eliminate the new pivot from the rows that contain it
        holders = self.columns.pop(var, ())
        for v0 in holders:
            r0, h0 = self.pivots[v0]
            f = r0.pop(var, None)
            if f is None:
                continue
            for v2, c2 in prow.items():
                old = r0.get(v2)
                new = old - f * c2 if old is not None else -f * c2
                if coeff_is_zero(new):
                    if old is not None:
                        del r0[v2]
                        self.columns[v2].discard(v0)
                else:
                    r0[v2] = new
                    if old is None:
                        self.columns.setdefault(v2, set()).add(v0)
            self.pivots[v0] = (r0, h0 - f * prhs)
        for v2 in prow:
            self.columns.setdefault(v2, set()).add(var)
        self.pivots[var] = (prow, prhs)

    def solution(self):
        """Pivot values with all free variables set to zero."""
        out = {}
        free = set()
        for var, (row, rhs) in self.pivots.items():
            free.update(row)
            out[var] = rhs
        return out, sorted(free)


def _indices_of_multiplicity(monoid: Monoid, mult: int, energy_bound):
    counts = len(monoid.classes)
    for combo in itertools.combinations_with_replacement(range(counts), mult):
        idx = [0] * counts
        for pos in combo:
            idx[pos] += 1
        idx = tuple(idx)
        if monoid.energy(idx) < energy_bound:
            yield idx


def _min_feasible_arity(n: int, mult: int) -> int:
    """Smallest arity admitting an output of nonnegative wedge degree."""
    if mult <= 1:
        return 1
    if n <= 1:
        return 10 ** 9
    return -(-(2 * mult - 2) // (n - 1))  # ceil


def complete(A: AInftyStructure, arity_cutoff: int | None = None,
             extension_arity: int | None = None,
             max_passes: int = 5) -> tuple[AInftyStructure, dict]:
    """Extend a divisor core so relation residuals vanish below a cutoff.

    With cutoff K the target is residual zero on all basis tuples of arity
    up to R = K - 1.  Unknown operator values are injected into the tables
    as linear-expression placeholders, bounded by the wedge-degree
    bookkeeping: multiplicity-m indices carry them up to arity R + 2 - m
    (R + 1 at multiplicity one).  One sweep of the relation instances then
    yields a sparse linear system; a residual row is used only when every
    unknown it could reference is in the injected set, and rows where two
    placeholders multiply are deferred to a later pass, by which time the
    pinned factors have become concrete.  Free directions are set to zero
    and reported; an unsatisfiable constraint raises.

    ``extension_arity`` widens the unknown set up to the given arity with
    the insertion patterns entering matrix-factorization assembly (at most
    two higher-wedge slots, exactly two at multiplicity two) and sweeps the
    single-insertion instances that certify them.  That family is closed
    under the relation terms for fibers of dimension <= 2.
    """
    if A.convention != CONVENTION_FOOO:
        raise InputError("complete expects the shifted-convention structure")
    K = arity_cutoff if arity_cutoff is not None else A.arity_cutoff - 2
    R = K - 1
    B = A.copy()
    monoid = B.monoid
    basis = B.wedge_basis()
    report: dict = {"passes": 0, "free": [], "target_arity": R,
                    "unknowns": 0, "deferred": []}

    if B.dim == 1:
        report["note"] = "no higher-wedge basis; core already closed"
        return B, report

    m_max = 1
    probe = 2
    while _min_feasible_arity(B.dim, probe) <= R + 2 - probe and \
            any(True for _ in _indices_of_multiplicity(monoid, probe,
                                                       B.energy_cutoff)):
        m_max = probe
        probe += 1

    if R + 3 > A.arity_cutoff:
        raise InputError(
            f"completion to arity {R} needs structure cutoff >= {R + 3}")
    ext = extension_arity
    if ext is not None:
        if B.dim > 2:
            raise InputError(
                "insertion-pattern extension supports fiber dimension <= 2")
        if ext + 2 > A.arity_cutoff:
            raise InputError("extension arity exceeds the structure cutoff")
        if ext <= R + 1:
            ext = None  # the solver window already covers it

    deg1 = [w for w in basis if len(w) == 1]
    higher = [w for w in basis if len(w) >= 2]

    def insertion_tuples(k: int, max_ins: int):
        for j in range(0, max_ins + 1):
            for positions in itertools.combinations(range(k), j):
                for ins in itertools.product(higher, repeat=j):
                    for rest in itertools.product(deg1, repeat=k - j):
                        slots = list(rest)
                        for p, h in sorted(zip(positions, ins)):
                            slots.insert(p, h)
                        yield tuple(slots)

    def cap(m: int) -> int:
        if m == 1:
            return R + 1
        if m <= m_max:
            return R + 2 - m
        return -1

    # enumerate unknown slots (index, arity, input tuple, feasible outputs)
    unknowns = []
    for m in range(1, m_max + 1):
        for idx in _indices_of_multiplicity(monoid, m, B.energy_cutoff):
            mu = monoid.maslov(idx)
            for k in range(_min_feasible_arity(B.dim, m), cap(m) + 1):
                for tup in itertools.product([w for w in basis if w],
                                             repeat=k):
                    if not _is_unknown_tuple(tup, m):
                        continue
                    outs = _feasible_outputs(basis, tup, k, mu)
                    if outs:
                        unknowns.append((idx, k, tup, tuple(outs)))
    if ext is not None:
        for m, j_set in ((1, (1, 2)), (2, (2,))):
            for idx in _indices_of_multiplicity(monoid, m, B.energy_cutoff):
                mu = monoid.maslov(idx)
                for k in range(cap(m) + 1, ext + 1):
                    for tup in insertion_tuples(k, max(j_set)):
                        if sum(1 for w in tup if len(w) >= 2) not in j_set:
                            continue
                        outs = _feasible_outputs(basis, tup, k, mu)
                        if outs:
                            unknowns.append((idx, k, tup, tuple(outs)))
    report["unknowns"] = len(unknowns)

    def equation_safe(n_rel: int, sector, insertions: int) -> bool:
        """True when every unknown this row could reference is injected."""
        m_s = sum(sector)
        if ext is not None and insertions <= 1:
            return n_rel <= (ext + 1 if m_s <= 1 else ext)
        if not (n_rel - 1 <= cap(m_s)
                or n_rel - 1 < _min_feasible_arity(B.dim, m_s)):
            return False
        for m2 in range(1, m_s):
            if not (n_rel <= cap(m2)
                    or n_rel < _min_feasible_arity(B.dim, m2)):
                return False
        return True

    zero = coerce_coeff(0, monoid.exact)

    def inject(var_values: dict):
        for (idx, k, tup, outs) in unknowns:
            out_map = {}
            for w in outs:
                var = (idx, k, tup, w)
                out_map[w] = var_values.get(var, LinExpr.var(var))
            B.set_table_value(k, idx, tup, out_map)

    def full_sweep():
        out = []
        for n_rel in range(1, R + 3):
            for inst in _instance_tuples(basis, n_rel):
                if any(len(w) == 0 for w in inst):
                    continue  # unit slots contribute no constraints
                out.append(inst)
        if ext is not None:
            for n_rel in range(R + 3, ext + 2):
                out.extend(insertion_tuples(n_rel, 1))
        return out

    def harvest(solver, sweep, deferred):
        apply_cache: dict = {}
        for inst in sweep:
            n_rel = len(inst)
            insertions = sum(1 for w in inst if len(w) >= 2)
            residual = B.relation_residual_basis(inst, apply_cache)
            for w_out, nov in residual.components.items():
                for sector, coeff in nov.terms.items():
                    if not equation_safe(n_rel, sector, insertions):
                        continue
                    if not isinstance(coeff, LinExpr):
                        if not coeff_is_zero(coeff):
                            raise InconsistentSystemError(
                                "residual constraint outside the unknown "
                                "space", instances=[(inst, sector, w_out)])
                        continue
                    if coeff.terms2:
                        deferred.append(inst)
                        continue
                    solver.add(dict(coeff.terms), -coeff.const,
                               tag=(inst, sector, w_out))
        if solver.inconsistent:
            raise InconsistentSystemError(
                "unsatisfiable completion constraints",
                instances=solver.inconsistent)

    var_values: dict = {}
    if ext is None:
        # relation-suite target: per-pass relinearization converges on the
        # window family and is certified by the final residual suite
        sweep = full_sweep()
        for pass_no in range(1, max_passes + 1):
            report["passes"] = pass_no
            inject(var_values)
            solver = _SparseSolver()
            deferred: list = []
            harvest(solver, sweep, deferred)
            values, _ = solver.solution()
            progress = 0
            for var, val in values.items():
                if var not in var_values:
                    progress += 1
                var_values[var] = val
            report["deferred"].append(len(deferred))
            if not deferred or progress == 0:
                break
            sweep = sorted(set(deferred))
    else:
        # brane/matrix-factorization target: one accumulated system keeps
        # every single-insertion constraint enforced simultaneously; rows
        # where two placeholders multiply are relinearized against pinned
        # values and any multi-insertion deviation is reported, not hidden
        solver = _SparseSolver()
        baked: dict = {}
        sweep = full_sweep()
        for pass_no in range(1, max_passes + 1):
            report["passes"] = pass_no
            inject(baked)
            deferred = []
            harvest(solver, sweep, deferred)
            newly = 0
            for var, (row, rhs) in solver.pivots.items():
                if not row and var not in baked:
                    baked[var] = rhs
                    newly += 1
            report["deferred"].append(len(deferred))
            if not deferred or newly == 0:
                break
            sweep = sorted(set(deferred))
        values, _ = solver.solution()
        var_values = dict(values)
        var_values.update(baked)

    # remaining directions are free: set them to zero and report
    for (idx, k, tup, outs) in unknowns:
        for w in outs:
            var = (idx, k, tup, w)
            if var not in var_values:
                var_values[var] = zero
                report["free"].append(var)

    for (idx, k, tup, outs) in unknowns:
        out_map = {w: var_values[(idx, k, tup, w)] for w in outs
                   if not coeff_is_zero(var_values[(idx, k, tup, w)])}
        B.set_table_value(k, idx, tup, out_map)

    if ext is not None:
        deviations = B.relation_suite(R)
        report["suite_deviations"] = deviations["failures"]
    return B, report


def verify_completion(B: AInftyStructure, max_arity: int) -> dict:
    """Independent residual re-check after completion."""
    return B.relation_suite(max_arity)


# -- the divisor identity as a checkable statement -------------------------------

def divisor_identity_residual(A: AInftyStructure, b_coeffs: Sequence,
                              inputs_wedges: Sequence[tuple[int, ...]],
                              l: int) -> float:
    """Max residual of the insertion identity for ``l`` copies of a one-form.

    Distributing l copies of ``b = sum b_j e_j`` among the slots of the
    (k+l)-ary class operators must reproduce ``<b, bd>^l / l!`` times the
    k-ary value, class by class.
    """
    monoid = A.monoid
    k = len(inputs_wedges)
    b = A.zero_element()
    for j, c in enumerate(b_coeffs):
        b = b + A.generator(j, c)
    fixed = [A.basis_element(w) for w in inputs_wedges]

    lhs = A.zero_element()
    for comp in itertools.product(range(l + 1), repeat=k + 1):
        if sum(comp) != l:
            continue
        seq: list[ExtElement] = []
        for gap in range(k + 1):
            seq.extend([b] * comp[gap])
            if gap < k:
                seq.append(fixed[gap])
        lhs = lhs + A.apply(seq)

    worst = 0.0
    for pos, cls in enumerate(monoid.classes):
        gen_idx = monoid.generator_index(pos)
        pairing = sum(c * bc for c, bc in zip(b_coeffs, cls.boundary))
        factor = pairing ** l / math.factorial(l) if not monoid.exact else \
            Fraction(1, math.factorial(l)) * (pairing ** l)
        rhs_full = A.apply(fixed)
        for w in set(lhs.components) | set(rhs_full.components):
            lc = lhs.components.get(w)
            rc = rhs_full.components.get(w)
            lval = lc.terms.get(gen_idx, 0) if lc else 0
            rval = rc.terms.get(gen_idx, 0) if rc else 0
            diff = lval - coerce_coeff(factor, monoid.exact) * rval
            worst = max(worst, abs(complex(diff)))
    return worst


# -- the potential and its critical points ----------------------------------------

def potential(A: AInftyStructure, x: Sequence, y: Sequence, t: float) -> complex:
    """Closed-form unit coefficient of the deformed curvature at (x, y).

    Areas are re-based to ``x`` through the boundary pairing; each class
    contributes ``coeff * t**area(x) * exp(-i <y, bd>)``.
    """
    monoid = A.monoid
    if len(x) != monoid.dim or len(y) != monoid.dim:
        raise InputError("point dimension mismatch")
    total = 0j
    for pos, cls in enumerate(monoid.classes):
        idx = monoid.generator_index(pos)
        op = A.operators.get((0, idx))
        if op is None:
            continue
        coeff = complex(op.table.get((), {}).get((), 0))
        if coeff == 0:
            continue
        area = float(monoid.energy_at(idx, [coerce_energy(v, monoid.exact)
                                            for v in x]))
        if area <= 0:
            raise InputError(f"point outside polytope (class {cls.id})")
        phase = -sum(float(yy) * bb for yy, bb in zip(y, cls.boundary))
        total += coeff * (t ** area) * cmath.exp(1j * phase)
    return total


def potential_from_apply(A: AInftyStructure, x: Sequence, y: Sequence,
                         t: float, max_arity: int) -> complex:
    """Unit coefficient of the truncated sum over arities (oracle route)."""
    b = A.zero_element()
    for j in range(A.dim):
        b = b + A.generator(j, complex(0, -float(y[j])))
    total = 0j
    point = [coerce_energy(v, A.monoid.exact) for v in x]
    for k in range(0, max_arity + 1):
        out = A.apply([b] * k)
        nov = out.components.get(())
        if nov is None:
            continue
        for idx, c in nov.terms.items():
            total += complex(c) * (t ** float(A.monoid.energy_at(idx, point)))
    return total


def _grad_potential(data: ToricData, z, t: float):
    """Gradient and Hessian of the complexified potential at z (vector)."""
    import numpy as np

    n = data.dim
    logt = math.log(t)
    grad = np.zeros(n, dtype=complex)
    hess = np.zeros((n, n), dtype=complex)
    for f in data.facets:
        ell = sum(v * zz for v, zz in zip(f.normal, z)) - complex(f.offset)
        term = cmath.exp(logt * ell)
        for j in range(n):
            grad[j] += logt * f.normal[j] * term
            for kk in range(n):
                hess[j, kk] += (logt ** 2) * f.normal[j] * f.normal[kk] * term
    return grad, hess


def critical_points(data: ToricData, t: float, starts_per_dim: int = 4,
                    tol: float = 1e-10) -> dict:
    """Multistart damped Newton search for critical points of the potential.

    Starts range over interior basepoints and one fundamental torus domain
    ``y in [0, 2pi)``; converged roots are deduplicated at 1e-8.
    """
    import numpy as np

    if not 0 < t < 1:
        raise InputError("evaluation parameter must lie in (0, 1)")
    n = data.dim
    base = np.array([float(b) for b in data.basepoint])
    x_offsets = [-0.15, 0.0, 0.15] if n <= 2 else [0.0]
    y_grid = [2 * math.pi * k / starts_per_dim for k in range(starts_per_dim)]

    roots: list[np.ndarray] = []
    failures = 0
    for x_off in itertools.product(x_offsets, repeat=n):
        x0 = base + np.array(x_off)
        supports = [sum(v * x for v, x in zip(f.normal, x0)) - float(f.offset)
                    for f in data.facets]
        if any(s <= 0 for s in supports):
            continue
        for y0 in itertools.product(y_grid, repeat=n):
            z = x0 + 1j * np.array(y0)
            ok = False
            for _ in range(80):
                grad, hess = _grad_potential(data, z, t)
                gn = np.linalg.norm(grad)
                if gn < 1e-13:
                    ok = True
                    break
                try:
                    step = np.linalg.solve(hess, -grad)
                except np.linalg.LinAlgError:
                    break
                sn = np.linalg.norm(step)
                if sn > 1.0:
                    step = step / sn
                z = z + step
            if not ok:
                failures += 1
                continue
            z = z.real + 1j * (np.mod(z.imag, 2 * math.pi))
            grad, _ = _grad_potential(data, z, t)
            if np.linalg.norm(grad) >= tol:
                failures += 1
                continue
            if any(np.linalg.norm(_torus_diff(z, r)) < 1e-8 for r in roots):
                continue
            roots.append(z)

    results = []
    for z in sorted(roots, key=lambda r: (tuple(np.round(r.imag, 6)),
                                          tuple(np.round(r.real, 6)))):
        w = sum(cmath.exp(math.log(t) * (sum(v * zz for v, zz in
                                             zip(f.normal, z)) - complex(f.offset)))
                for f in data.facets)
        results.append({"z": [complex(c) for c in z], "value": complex(w)})
    return {"roots": results, "failed_starts": failures}


def _torus_diff(a, b):
    import numpy as np

    d = a - b
    im = np.mod(d.imag + math.pi, 2 * math.pi) - math.pi
    return d.real + 1j * im
