"""Flat projectively equivariant quantization and its independent oracle."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

from ._linalg import SparseEchelon
from ._rational import QQ, format_rational
from .casimir import CriticalityReport, block_projector, criticality, curly_casimir, n_operator, tree_family
from .fields import poly_ring
from .flatcalc import (
    PolyOperator,
    PolySymbol,
    curly_L,
    lie_derivative,
    monomial,
    operator_lie_derivative,
    principal_symbol,
    proj_vector_field,
    q_aff,
)
from .liecore import build_dual_bases
from .repspace import FiberSpace, RepSpec, casimir_blocks, multi_indices, shift_delta

__all__ = [
    "CriticalPairError",
    "LiftResult",
    "lift",
    "lift_symbol",
    "quantize_flat",
    "QuantizationTable",
    "flat_table",
    "apply_table",
    "BruteForceResult",
    "brute_force_quantization",
    "EquivarianceReport",
    "verify_equivariance",
    "spanning_symbols",
    "check_symbol_preservation",
    "full_table",
    "brute_force_failure_set",
    "FailureSet",
    "NotInBlockError",
    "eigen_recursion",
]

log = logging.getLogger(__name__)


class CriticalPairError(ValueError):
    def __init__(self, message, report: CriticalityReport | None = None):
        super().__init__(message)
        self.report = report


class NotInBlockError(ValueError):
    pass


@dataclass(frozen=True)
class LiftResult:
    input: PolySymbol
    block: tuple  # (k, s)
    alpha: object
    components: tuple  # T_k, T_{k-1}, ..., T_0
    hat: PolySymbol

    def check(self) -> bool:
        """Eigenvector equation and tree-level membership, exactly."""
        if curly_casimir(self.hat) != self.hat.scale(self.alpha):
            return False
        k, s = self.block
        tree = tree_family(k, s, self.hat.m, self.hat.v1, self.hat.v2)
        return all(_in_span(comp, tree.levels[l], tree.level_fiber(l)) for l, comp in enumerate(self.components))


def _in_span(T: PolySymbol, rows, fiber: FiberSpace) -> bool:
    """Every x-coefficient vector of T lies in span(rows)."""
    from ._linalg import dmatrix

    by_xmon: dict = {}
    m = T.m
    for (alpha, b, a), poly in T.items():
        for mon, c in poly.items():
            by_xmon.setdefault(mon[:m], [QQ(0)] * fiber.dim)[fiber.index[(alpha, b, a)]] = c
    if not by_xmon:
        return True
    if not rows:
        return False
    base = dmatrix(rows, (len(rows), fiber.dim))
    r = base.rank()
    for vec in by_xmon.values():
        ext = dmatrix([*rows, vec], (len(rows) + 1, fiber.dim))
        if ext.rank() != r:
            return False
    return True


def _block_of_symbol(T: PolySymbol, k: int) -> int:
    fiber = T.fiber(k)
    hits = [b.index for b in casimir_blocks(fiber).blocks if block_projector(fiber, b.index).apply(T) == T]
    if len(hits) != 1:
        raise NotInBlockError("symbol is not contained in a single Casimir block")
    return hits[0]


def eigen_recursion(T, k: int, s: int, n_op, m: int, v1: RepSpec, v2: RepSpec):
    """Solve (C - alpha) T_{k-l} = -n_op(T_{k-l+1}) for l = 1..k, blockwise.

    ``T`` is any field whose first slots are (V2, V1*) and whose momenta span
    S^k R^m; ``n_op`` is the deformation (flat N or its curved analogue).
    C is scalar on Casimir blocks, so each step is a division per block.
    Returns (alpha, [T_k, ..., T_0]).
    """
    alpha = casimir_blocks(FiberSpace(m, k, v1, v2)).blocks[s].alpha
    comps = [T]
    cur = T
    for l in range(1, k + 1):
        rhs = -n_op(cur)
        lower = FiberSpace(m, k - l, v1, v2)
        nxt = T.zero()
        for b in casimir_blocks(lower).blocks:
            part = block_projector(lower, b.index).apply(rhs)
            if part.is_zero():
                continue
            if b.alpha == alpha:
                rep = criticality(v1, v2, m, k)
                raise CriticalPairError(
                    f"alpha = {format_rational(alpha)} recurs at tree level {l} (block {b.index})", rep
                )
            nxt = nxt + part.scale(QQ(1) / (b.alpha - alpha))
        comps.append(nxt)
        cur = nxt
    return alpha, comps


def lift(T: PolySymbol, s: int | None = None) -> LiftResult:
    """Eigenvector of the deformed Casimir extending T by lower-degree terms.

    T must be homogeneous of degree k with fiber part in block s.
    """
    degs = T.xi_degrees()
    if len(degs) > 1:
        raise ValueError("lift expects a homogeneous symbol")
    k = degs.pop() if degs else 0
    if s is None:
        s = _block_of_symbol(T, k) if not T.is_zero() else 0
    alpha, comps = eigen_recursion(T, k, s, n_operator, T.m, T.v1, T.v2)
    hat = T.zero()
    for c in comps:
        hat = hat + c
    return LiftResult(T, (k, s), alpha, tuple(comps), hat)


def lift_symbol(T: PolySymbol) -> PolySymbol:
    """Lift an arbitrary symbol: split by degree and Casimir block, lift each piece."""
    out = T.zero()
    for k in sorted(T.xi_degrees()):
        part = T.xi_degree_part(k)
        fiber = T.fiber(k)
        for b in casimir_blocks(fiber).blocks:
            piece = block_projector(fiber, b.index).apply(part)
            if not piece.is_zero():
                out = out + lift(piece, b.index).hat
    return out


def quantize_flat(T: PolySymbol) -> PolyOperator:
    return q_aff(lift_symbol(T))


# -- quantization tables -------------------------------------------------------


@dataclass(frozen=True)
class QuantizationTable:
    """Q(T) = sum_l sum_{|d| = l} Phi_l[d] (d^d T), Phi_l[d] mapping degree k to degree k - l."""

    m: int
    k: int
    v1: RepSpec
    v2: RepSpec
    entries: dict  # (l, d, source key, target key) -> rational; keys are (alpha, b, a)

    def to_json(self) -> dict:
        levels: dict = {}
        for (l, d, src, tgt), v in sorted(self.entries.items(), key=lambda t: _sort_key(t[0])):
            levels.setdefault(str(l), []).append(
                {"d": list(d), "source": _key_json(src), "target": _key_json(tgt), "value": format_rational(v)}
            )
        return {
            "m": self.m,
            "k": self.k,
            "rep1": self.v1.to_json(),
            "rep2": self.v2.to_json(),
            "levels": levels,
        }


def _key_json(key):
    alpha, b, a = key
    return {"alpha": list(alpha), "b": b, "a": a}


def _sort_key(t):
    l, d, src, tgt = t
    return (l, tuple(-x for x in d), tuple(-x for x in src[0]), src[1], src[2], tuple(-x for x in tgt[0]), tgt[1], tgt[2])


def _factorial_weight(d):
    from math import factorial

    w = 1
    for e in d:
        w *= factorial(e)
    return QQ(1, w)


def flat_table(m: int, k: int, v1: RepSpec, v2: RepSpec, quantizer=None) -> QuantizationTable:
    """Read the constant fiber maps of a translation-invariant quantization off test symbols.

    For T = x^d / d! e_j the degree k - l part of Q(T) at x = 0 is Phi_l[d] e_j.
    """
    quantizer = quantizer or quantize_flat
    fiber = FiberSpace(m, k, v1, v2)
    entries = {}
    for l in range(k + 1):
        for d in multi_indices(m, l):
            for key in fiber.basis:
                T = PolySymbol.from_coeffs(m, v1, v2, {key: monomial(m, d) * _factorial_weight(d)})
                D = quantizer(T)
                for (alpha, b, a), poly in D.items():
                    if sum(alpha) != k - l:
                        continue
                    c = _constant_term(poly)
                    if c:
                        entries[(l, d, key, (alpha, b, a))] = c
    return QuantizationTable(m, k, v1, v2, entries)


def _constant_term(poly):
    return poly.get((0,) * len(poly.ring.gens), QQ(0))


def apply_table(table: QuantizationTable, T: PolySymbol) -> PolyOperator:
    m = table.m
    gens = poly_ring(m)[1]
    R = poly_ring(m)[0]
    coeffs: dict = {}
    src = {key: poly for key, poly in T.items()}
    for (l, d, skey, tkey), v in table.entries.items():
        p = src.get(skey)
        if p is None:
            continue
        for i, e in enumerate(d):
            for _ in range(e):
                p = p.diff(gens[i])
        if p:
            coeffs[tkey] = coeffs.get(tkey, R.zero) + p * v
    return PolyOperator.from_coeffs(m, table.v1, table.v2, coeffs)


# -- brute force oracle ---------------------------------------------------------


@dataclass(frozen=True)
class BruteForceResult:
    """Unique solution, or a certificate that the defining system does not have one."""

    m: int
    k: int
    v1: RepSpec
    v2: RepSpec
    unknowns: int
    equations: int
    rank: int
    inconsistent: bool
    table: QuantizationTable | None = None

    @property
    def unique(self) -> bool:
        return self.table is not None

    def certificate(self) -> dict | None:
        if self.unique:
            return None
        return {
            "kind": "inconsistent" if self.inconsistent else "rank-deficient",
            "rank": self.rank,
            "unknowns": self.unknowns,
            "equations": self.equations,
        }


@lru_cache(maxsize=None)
def _curly_on_monomial(h, m, v1, v2, key, xmon):
    T = PolySymbol.from_coeffs(m, v1, v2, {key: monomial(m, xmon)})
    return curly_L(h, T)


def _unknown_index(m, k, v1, v2):
    idx = {}
    for l in range(1, k + 1):
        src = FiberSpace(m, k, v1, v2)
        tgt = FiberSpace(m, k - l, v1, v2)
        for d in multi_indices(m, l):
            for skey in src.basis:
                for tkey in tgt.basis:
                    idx[(l, d, skey, tkey)] = len(idx)
    return idx


def _derivative(poly, d, gens):
    for i, e in enumerate(d):
        for _ in range(e):
            poly = poly.diff(gens[i])
            if not poly:
                return poly
    return poly


def _equations(k: int, v1: RepSpec, v2: RepSpec, m: int, bound: int, idx: dict):
    """Yield ``(key, row, rhs)`` for the defining system; ``key`` names the equation."""
    gens = poly_ring(m)[1]
    by_src: dict = {}
    for (l, d, skey, tkey), n in idx.items():
        by_src.setdefault(skey, []).append((l, d, tkey, n))
    fiber = FiberSpace(m, k, v1, v2)
    basis = build_dual_bases(m).basis()

    def expand(S: PolySymbol):
        # Q(S) - S = sum_n u_n B_n(S); B_n(S) = (d^d S)_source placed on the target basis vector
        out: dict = {}
        for skey, poly in S.items():
            for l, d, tkey, n in by_src.get(skey, ()):
                dp = _derivative(poly, d, gens)
                if dp:
                    out.setdefault(n, []).append((tkey, dp))
        return out

    for hi, h in enumerate(basis):
        X = proj_vector_field(h)
        for total in range(bound + 1):
            for beta in multi_indices(m, total):
                for key in fiber.basis:
                    T = PolySymbol.from_coeffs(m, v1, v2, {key: monomial(m, beta)})
                    LT = lie_derivative(X, T)
                    eqs: dict = {}

                    def add(sym, n, c0):
                        for (al, b, a), poly in sym.items():
                            for mon, c in poly.items():
                                row = eqs.setdefault((al, b, a, mon), {})
                                row[n] = row.get(n, 0) + c0 * c

                    # -1 collects the part free of unknowns: curly_L(T) - L(T)
                    add(_curly_on_monomial(h, m, v1, v2, key, beta) - LT, -1, 1)
                    for n, parts in expand(T).items():
                        for tkey, dp in parts:
                            for mon, c in dp.items():
                                add(_curly_on_monomial(h, m, v1, v2, tkey, mon[:m]), n, c)
                    for n, parts in expand(LT).items():
                        for tkey, dp in parts:
                            add(PolySymbol.from_coeffs(m, v1, v2, {tkey: dp}), n, -1)
                    for ekey, row in eqs.items():
                        rhs = -row.pop(-1, 0)
                        yield (hi, beta, key, ekey), {c: v for c, v in row.items() if v}, rhs


def brute_force_quantization(k: int, v1: RepSpec, v2: RepSpec, m: int, degree_bound: int | None = None) -> BruteForceResult:
    """Solve sigma o Q = id and curly_L_h o Q = Q o L_h directly on an ansatz.

    The ansatz is Q(T) = T + sum_{l >= 1} Phi_l(d^l T) with constant Phi_l; the
    equations are imposed for every basis h of sl(m+1) and every test symbol
    x^beta e_j with |beta| <= degree_bound (default k + 1), coefficientwise.
    """
    bound = k + 1 if degree_bound is None else degree_bound
    idx = _unknown_index(m, k, v1, v2)
    solver = SparseEchelon(len(idx))
    for _, row, rhs in _equations(k, v1, v2, m, bound, idx):
        solver.add(row, rhs)
    log.debug("brute force m=%d k=%d: %d unknowns, %d equations, rank %d", m, k, len(idx), solver.n_equations, solver.rank)
    table = None
    if not solver.inconsistent and solver.rank == len(idx):
        sol = solver.solve()
        entries = {key: sol[n] for key, n in idx.items() if sol[n]}
        table = QuantizationTable(m, k, v1, v2, entries)
    return BruteForceResult(m, k, v1, v2, len(idx), solver.n_equations, solver.rank, solver.inconsistent, table)


@dataclass(frozen=True)
class FailureSet:
    """Shifts at which the brute-force system has no unique solution, V1 fixed and V2's weight free."""

    k: int
    shifts: tuple  # exact rationals, each confirmed by a numeric rerun
    candidates: tuple  # rational zeros and poles of the generic pivots
    irrational_factors: tuple  # nonlinear irreducible factors, reported as strings
    generic_unique: bool


def brute_force_failure_set(k: int, v1: RepSpec, v2: RepSpec, m: int, degree_bound: int | None = None) -> FailureSet:
    """Exact set of shifts where :func:`brute_force_quantization` returns a certificate.

    The system depends affinely on the weight w of V2 (checked at three points),
    so it is eliminated once over QQ(w).  Away from the zeros and poles of the
    pivots met along the way the elimination specialises verbatim, which leaves
    a finite candidate list; every rational candidate is then rerun exactly.
    """
    from sympy import Poly, Symbol

    bound = k + 1 if degree_bound is None else degree_bound
    idx = _unknown_index(m, k, v1, v2)
    samples = []
    for w in (0, 1, 2):
        sample = {}
        for key, row, rhs in _equations(k, v1, v2.with_weight(w), m, bound, idx):
            sample[key] = (row, rhs)
        samples.append(sample)
    w = Symbol("w")
    K = QQ.frac_field(w)
    wk = K.convert(w)
    solver = SparseEchelon(len(idx), domain=K, track=True)
    zero_row = ({}, QQ(0))
    for key in sorted(set().union(*samples), key=repr):
        (r0, c0), (r1, c1), (r2, c2) = (s.get(key, zero_row) for s in samples)
        row = {}
        for col in set(r0) | set(r1) | set(r2):
            a0, a1, a2 = r0.get(col, 0), r1.get(col, 0), r2.get(col, 0)
            if a2 - 2 * a1 + a0:
                raise AssertionError("system is not affine in the target weight")
            row[col] = K.convert(a0) + K.convert(a1 - a0) * wk
        if c2 - 2 * c1 + c0:
            raise AssertionError("system is not affine in the target weight")
        solver.add(row, K.convert(c0) + K.convert(c1 - c0) * wk)
    generic_unique = solver.rank == len(idx) and not solver.inconsistent
    roots, irrational = set(), set()
    for val in solver.pivot_values:
        for part in (K.numer(val), K.denom(val)):
            P = Poly(part.as_expr(), w, domain="QQ")
            if P.degree() <= 0:
                continue
            for fac, _ in P.factor_list()[1]:
                if fac.degree() == 1:
                    c1, c0 = fac.all_coeffs()
                    roots.add(QQ.convert(-c0) / QQ.convert(c1))
                else:
                    irrational.add(str(fac.as_expr()))
    a1 = m * shift_delta(v1, v2.with_weight(0), m)  # a1 - a2(0)
    shifts = set()
    for r in sorted(roots):
        res = brute_force_quantization(k, v1, v2.with_weight(r), m, bound)
        if not res.unique:
            shifts.add(a1 / m - r)
    cands = tuple(sorted(a1 / m - r for r in roots))
    return FailureSet(k, tuple(sorted(shifts)), cands, tuple(sorted(irrational)), generic_unique)


def _identity_table_part(m, k, v1, v2):
    fiber = FiberSpace(m, k, v1, v2)
    return {(0, (0,) * m, key, key): QQ(1) for key in fiber.basis}


def full_table(result: BruteForceResult) -> QuantizationTable:
    """Brute-force solution including the identity (l = 0) part."""
    entries = dict(result.table.entries)
    entries.update(_identity_table_part(result.m, result.k, result.v1, result.v2))
    return QuantizationTable(result.m, result.k, result.v1, result.v2, entries)


# -- verification -------------------------------------------------------------------


@dataclass(frozen=True)
class EquivarianceReport:
    passed: bool
    checked: int
    counterexample: dict | None = None
    generators: tuple = field(default_factory=tuple)

    def to_json(self) -> dict:
        return {"passed": self.passed, "checked": self.checked, "counterexample": self.counterexample}


def spanning_symbols(m: int, k: int, v1: RepSpec, v2: RepSpec, coeff_degree: int = 3):
    fiber = FiberSpace(m, k, v1, v2)
    for total in range(coeff_degree + 1):
        for beta in multi_indices(m, total):
            for key in fiber.basis:
                yield PolySymbol.from_coeffs(m, v1, v2, {key: monomial(m, beta)})


def verify_equivariance(Q, m: int, k: int, v1: RepSpec, v2: RepSpec, coeff_degree: int = 3, generators=None) -> EquivarianceReport:
    """Check Q(L_h T) = curly-L_h Q(T) for basis generators h and monomial symbols T.

    ``Q`` maps PolySymbol to PolyOperator. ``generators`` defaults to the whole
    basis of sl(m+1); pass a subset to test partial equivariance.
    """
    gens = build_dual_bases(m).basis() if generators is None else list(generators)
    checked = 0
    for T in spanning_symbols(m, k, v1, v2, coeff_degree):
        QT = Q(T)
        for h in gens:
            X = proj_vector_field(h)
            left = operator_lie_derivative(X, QT)
            right = Q(lie_derivative(X, T))
            checked += 1
            if left != right:
                ce = {
                    "generator": h.to_json(),
                    "symbol": {str(key): str(p.as_expr()) for key, p in T.items()},
                    "defect": {str(key): str(p.as_expr()) for key, p in (left - right).items()},
                }
                return EquivarianceReport(False, checked, ce, tuple(gens))
    return EquivarianceReport(True, checked, None, tuple(gens))


def check_symbol_preservation(T: PolySymbol, D: PolyOperator) -> bool:
    k = T.degree
    return principal_symbol(D, k) == T.xi_degree_part(k) and all(d <= k for d in D.xi_degrees())
