"""Curved construction on a chart: projective classes, the normal Cartan connection,
invariant differentiation and the natural projectively equivariant quantization.

Functions on the Cartan bundle are represented in the partial trivialisation
u = s(x) exp(eta), eta in g_1, with s the gauge of the trace-free representative
Pi of the projective class.  G_0-equivariance is carried by the slot
representations, so only the x and eta derivatives need to be computed.  In
this gauge the connection pulls back to
``omega = Ad(exp(-eta)) (dx + Pi + P) + d eta``, which gives the invariant
derivative in direction e_j as

    D_j F = d_{x_j} F + rho_*(B_j) F - sum_l C_{jl} d_{eta_l} F,
    B_j = e_j eta^T + eta_j Id + Pi_j,
    C_{jl} = P_{jl} - eta_j eta_l - sum_i eta_i Pi^i_{jl}.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import factorial

from ._rational import QQ, as_rational
from .casimir import block_projector, casimir_spectral
from .fields import Field, covector_slot, inert_slot, poly_ring, rep_slot, vector_slot
from .flatcalc import PolyOperator, PolySymbol, _HomField, gamma_apply
from .liecore import GradedElement, bracket_parts, build_dual_bases, eps_raw
from .quantflat import eigen_recursion
from .repspace import RepSpec, casimir_blocks

__all__ = [
    "ProjConnection",
    "WeylWitness",
    "CartanData",
    "LiftedFunction",
    "HEquivarianceError",
    "weyl_equivalent",
    "normal_cartan",
    "invariant_diff",
    "iterated_invariant_diff",
    "q_omega",
    "n_omega",
    "curly_casimir_omega",
    "equivariance_defect",
    "commutator_defect",
    "curved_lift",
    "lift_symbol_curved",
    "quantize_curved",
    "quantize_curved_apply",
    "pullback_connection",
    "pullback_symbol",
]


class HEquivarianceError(RuntimeError):
    """The quantized output still depends on the fiber coordinate."""


def _x_only(m, p):
    if any(any(mon[m:]) for mon in p):
        raise ValueError("connection coefficients must be polynomials in x only")
    return p


class ProjConnection:
    """Symmetric polynomial Christoffel symbols Gamma^i_{jk} on R^m."""

    __slots__ = ("m", "_gamma")

    def __init__(self, m: int, gamma: dict | None = None):
        R = poly_ring(m)[0]
        self.m = m
        store: dict = {}
        for (i, j, k), value in (gamma or {}).items():
            if not all(0 <= t < m for t in (i, j, k)):
                raise ValueError(f"index ({i},{j},{k}) out of range for m={m}")
            p = value if isinstance(value, type(R.one)) else R(as_rational(value))
            p = _x_only(m, p)
            key = (i, min(j, k), max(j, k))
            if key in store and store[key] != p:
                raise ValueError(f"Gamma^{i}_{{{j}{k}}} is not symmetric in the lower indices")
            if p:
                store[key] = p
        self._gamma = store

    def __call__(self, i: int, j: int, k: int):
        return self._gamma.get((i, min(j, k), max(j, k)), poly_ring(self.m)[0].zero)

    def items(self):
        return sorted(self._gamma.items())

    def __eq__(self, other):
        return isinstance(other, ProjConnection) and self.m == other.m and self._gamma == other._gamma

    def __hash__(self):
        return hash((self.m, tuple((k, frozenset(v.items())) for k, v in sorted(self._gamma.items()))))

    def __repr__(self):
        return f"ProjConnection(m={self.m}, {{{', '.join(f'{k}: {v.as_expr()}' for k, v in self.items())}}})"

    def is_flat(self) -> bool:
        return not self._gamma

    @classmethod
    def flat(cls, m: int) -> ProjConnection:
        return cls(m, {})

    def weyl_shift(self, alpha) -> ProjConnection:
        """Gamma^i_{jk} + alpha_j delta^i_k + alpha_k delta^i_j."""
        m = self.m
        R = poly_ring(m)[0]
        alpha = [a if isinstance(a, type(R.one)) else R(as_rational(a)) for a in alpha]
        out = {}
        for i in range(m):
            for j in range(m):
                for k in range(j, m):
                    v = self(i, j, k)
                    if i == k:
                        v = v + alpha[j]
                    if i == j:
                        v = v + alpha[k]
                    out[(i, j, k)] = v
        return ProjConnection(m, out)


@dataclass(frozen=True)
class WeylWitness:
    equivalent: bool
    alpha: tuple | None = None


def weyl_equivalent(c1: ProjConnection, c2: ProjConnection) -> WeylWitness:
    """Recover alpha_j = sum_i (Gamma' - Gamma)^i_{ji} / (m+1) and verify it."""
    if c1.m != c2.m:
        raise ValueError("dimension mismatch")
    m = c1.m
    R = poly_ring(m)[0]
    alpha = []
    for j in range(m):
        tr = sum((c2(i, j, i) - c1(i, j, i) for i in range(m)), R.zero)
        alpha.append(tr * QQ(1, m + 1))
    if c1.weyl_shift(alpha) == c2:
        return WeylWitness(True, tuple(alpha))
    return WeylWitness(False, None)


class CartanData:
    """Normal Cartan connection in the gauge of the trace-free representative."""

    def __init__(self, m: int, pi: dict, p: list):
        self.m = m
        self.pi = pi  # (i, j, k) -> polynomial, all orderings present
        self.p = p  # m x m polynomials

    def Pi(self, i, j, k):
        return self.pi[(i, j, k)]

    def pi_matrix(self, j):
        """Pi_j as the gl(m) matrix (Pi_j)^i_k = Pi^i_{jk}."""
        return [[self.pi[(i, j, k)] for k in range(self.m)] for i in range(self.m)]

    def __eq__(self, other):
        return isinstance(other, CartanData) and self.m == other.m and self.pi == other.pi and self.p == other.p

    def __hash__(self):
        return hash((self.m, tuple(frozenset(v.items()) for _, v in sorted(self.pi.items()))))

    def is_flat(self) -> bool:
        return not any(self.pi.values()) and not any(any(r) for r in self.p)

    def omega(self, j: int):
        """Pull-back of omega along the gauge, evaluated on d/dx_j, as (v, A, xi)."""
        m = self.m
        R = poly_ring(m)[0]
        v = [R.one if i == j else R.zero for i in range(m)]
        return v, self.pi_matrix(j), list(self.p[j])

    def curvature(self) -> dict:
        """Omega_{jk} = d_j omega_k - d_k omega_j + [omega_j, omega_k] for j < k."""
        m = self.m
        R, gens = poly_ring(m)
        out = {}
        for j in range(m):
            for k in range(j + 1, m):
                vj, Aj, xj = self.omega(j)
                vk, Ak, xk = self.omega(k)
                bv, bA, bx = bracket_parts(vj, Aj, xj, vk, Ak, xk, R.zero)
                v = [bv[i] for i in range(m)]
                A = [[Ak[a][b].diff(gens[j]) - Aj[a][b].diff(gens[k]) + bA[a][b] for b in range(m)] for a in range(m)]
                xi = [xk[b].diff(gens[j]) - xj[b].diff(gens[k]) + bx[b] for b in range(m)]
                out[(j, k)] = (v, A, xi)
        return out

    def normality_residual(self):
        """Trace sum_j (Omega_{jk})^j_l of the g_0-curvature (zero for normal data)."""
        m = self.m
        R = poly_ring(m)[0]
        curv = self.curvature()
        res = [[R.zero] * m for _ in range(m)]
        for j in range(m):
            for k in range(m):
                if j == k:
                    continue
                sign, key = (1, (j, k)) if j < k else (-1, (k, j))
                A = curv[key][1]
                for l in range(m):
                    res[k][l] = res[k][l] + A[j][l] * sign
        return res

    @cached_property
    def B(self):
        m = self.m
        R, gens = poly_ring(m)
        eta = gens[m : 2 * m]
        out = []
        for j in range(m):
            M = [[self.pi[(p, j, q)] for q in range(m)] for p in range(m)]
            for q in range(m):
                M[j][q] = M[j][q] + eta[q]
            for p in range(m):
                M[p][p] = M[p][p] + eta[j]
            out.append(M)
        return out

    @cached_property
    def C(self):
        m = self.m
        R, gens = poly_ring(m)
        eta = gens[m : 2 * m]
        out = []
        for j in range(m):
            row = []
            for l in range(m):
                c = self.p[j][l] - eta[j] * eta[l]
                for i in range(m):
                    c = c - eta[i] * self.pi[(i, j, l)]
                row.append(c)
            out.append(row)
        return out


def _trace_free(c: ProjConnection) -> dict:
    m = c.m
    R = poly_ring(m)[0]
    tr = [sum((c(l, l, k) for l in range(m)), R.zero) for k in range(m)]
    pi = {}
    for i in range(m):
        for j in range(m):
            for k in range(m):
                v = c(i, j, k)
                if i == j:
                    v = v - tr[k] * QQ(1, m + 1)
                if i == k:
                    v = v - tr[j] * QQ(1, m + 1)
                pi[(i, j, k)] = v
    return pi


@lru_cache(maxsize=64)
def normal_cartan(c: ProjConnection) -> CartanData:
    """Trace-free symbols Pi and the g_1 component P solving the normality condition.

    With Ric_{kl} = sum_j (R_{jk})^j_l for the curvature R of Pi, the condition
    Ric + m P - P^T = 0 splits into P_sym = -Ric_sym / (m-1) and
    P_skew = -Ric_skew / (m+1).
    """
    m = c.m
    R, gens = poly_ring(m)
    pi = _trace_free(c)
    zero = [[R.zero] * m for _ in range(m)]
    flat_p = CartanData(m, pi, zero)
    ric = [[R.zero] * m for _ in range(m)]
    for j in range(m):
        for k in range(m):
            if j == k:
                continue
            Aj, Ak = flat_p.pi_matrix(j), flat_p.pi_matrix(k)
            for l in range(m):
                # (R_jk)^j_l = d_j Pi^j_{kl} - d_k Pi^j_{jl} + [Pi_j, Pi_k]^j_l
                v = Ak[j][l].diff(gens[j]) - Aj[j][l].diff(gens[k])
                for t in range(m):
                    v = v + Aj[j][t] * Ak[t][l] - Ak[j][t] * Aj[t][l]
                ric[k][l] = ric[k][l] + v
    P = [[R.zero] * m for _ in range(m)]
    for k in range(m):
        for l in range(m):
            sym = (ric[k][l] + ric[l][k]) * QQ(1, 2)
            skew = (ric[k][l] - ric[l][k]) * QQ(1, 2)
            P[k][l] = -sym * QQ(1, m - 1) - skew * QQ(1, m + 1)
    cd = CartanData(m, pi, P)
    res = cd.normality_residual()
    if any(any(r) for r in res):
        raise AssertionError("normality system not satisfied")
    return cd


class LiftedFunction(_HomField):
    """G_0-equivariant function on the Cartan bundle in the (x, eta) chart.

    Symbols keep momenta in ``xi`` (``sym=True``).  The argument of an operator
    is the identity operator in marker mode (``sym=False``): ``xi^alpha`` then
    stands for ``d^alpha`` applied to an arbitrary section.
    """

    __slots__ = ()

    @classmethod
    def from_symbol(cls, T: PolySymbol) -> LiftedFunction:
        return cls(T.m, T.slots, dict(T.terms), sym=True, meta=T.meta)

    @classmethod
    def argument(cls, m: int, v1: RepSpec) -> LiftedFunction:
        R = poly_ring(m)[0]
        n = v1.dim(m)
        slots = (rep_slot(v1, m, "1"), inert_slot(n, "src"))
        return cls(m, slots, {(a, a): R.one for a in range(n)}, sym=False, meta=(v1, v1))

    @classmethod
    def from_section(cls, m: int, v1: RepSpec, values: dict) -> LiftedFunction:
        """Lift of a concrete polynomial section ``{a: x-polynomial}``."""
        return cls(m, (rep_slot(v1, m, "1"),), {(a,): p for a, p in values.items()}, sym=True, meta=(v1, v1))

    @property
    def is_h_equivariant(self) -> bool:
        """g_1 acts trivially on the supported targets, so H-equivariance means eta-free."""
        return self.is_eta_free()

    def to_operator(self) -> PolyOperator:
        v1, v2 = self.meta
        return PolyOperator.empty(self.m, v1, v2)._new(dict(self.terms))

    def to_symbol(self) -> PolySymbol:
        v1, v2 = self.meta
        return PolySymbol.empty(self.m, v1, v2)._new(dict(self.terms))


def _d(cd: CartanData, F: Field, j: int) -> Field:
    out = F.dx(j) + F.rho(cd.B[j])
    for l, c in enumerate(cd.C[j]):
        if c:
            dF = F.deta(l)
            if not dF.is_zero():
                out = out - dF.mul_poly(c)
    return out


def invariant_diff(cd: CartanData, F: Field) -> Field:
    """Append an R^{m*} slot holding D_j F."""
    if cd.m != F.m:
        raise ValueError("dimension mismatch")
    return Field.stack([_d(cd, F, j) for j in range(cd.m)], covector_slot(cd.m), len(F.slots))


def _symmetrize_tail(G: Field, k: int) -> Field:
    if k <= 1:
        return G
    n = len(G.slots)
    perms = list(itertools.permutations(range(k)))
    w = QQ(1, factorial(k))
    out: dict = {}
    for comp, poly in G.terms.items():
        head, tail = comp[: n - k], comp[n - k :]
        for p in perms:
            key = head + tuple(tail[t] for t in p)
            out[key] = out.get(key, poly.ring.zero) + poly * w
    return G._new(out)


def iterated_invariant_diff(cd: CartanData, F: Field, k: int) -> Field:
    """Symmetrised k-fold invariant differential (k new R^{m*} slots)."""
    G = F
    for _ in range(k):
        G = invariant_diff(cd, G)
    return _symmetrize_tail(G, k)


def _chain(cd, F, kmax):
    out = [F]
    G = F
    for k in range(1, kmax + 1):
        G = invariant_diff(cd, G)
        out.append(_symmetrize_tail(G, k))
    return out


def q_omega(cd: CartanData, T: Field, f: Field) -> Field:
    """<T, (nabla^omega)^k f> summed over the degrees k present in T.

    T has slots (V2, V1*, extra...) with momenta in xi; f has slots (V1, extra...).
    The result has slots (V2, T extras, f extras) and the mode of f.
    """
    m = T.m
    R = T.ring
    degs = sorted(T.xi_degrees())
    if not degs:
        return f._new({}, slots=(T.slots[0], *T.slots[2:], *f.slots[1:]))
    chain = _chain(cd, f, degs[-1])
    nf = len(f.slots)
    out: dict = {}
    for k in degs:
        S = chain[k]
        index: dict = {}
        for comp, poly in S.terms.items():
            index.setdefault((comp[0], comp[nf:]), []).append((comp[1:nf], poly))
        for comp, tpoly in T.terms.items():
            b, a, ttail = comp[0], comp[1], comp[2:]
            groups: dict = {}
            for mon, c in tpoly.items():
                al = mon[2 * m :]
                if sum(al) != k:
                    continue
                groups.setdefault(al, {})[mon[: 2 * m] + (0,) * m] = c
            for al, coeff in groups.items():
                I = tuple(i for i, e in enumerate(al) for _ in range(e))
                cpoly = R.from_dict(coeff)
                for ftail, spoly in index.get((a, I), ()):
                    key = (b, *ttail, *ftail)
                    out[key] = out.get(key, R.zero) + cpoly * spoly
    res = f._new(out, slots=(T.slots[0], *T.slots[2:], *f.slots[1:]))
    res.meta = (f.meta[0], T.meta[1]) if f.meta and T.meta else T.meta
    return res


def n_omega(cd: CartanData, T: Field) -> Field:
    """N^omega = -2 sum_i gamma(eps^i) D_i."""
    fam = build_dual_bases(T.m)
    acc = T.zero()
    for i, eps in enumerate(fam.eps):
        acc = acc + gamma_apply(eps, _d(cd, T, i))
    return acc.scale(-2)


def curly_casimir_omega(cd: CartanData, T: Field) -> Field:
    """C^omega + N^omega, with C^omega acting by alpha_{k,s} on each block."""
    return casimir_spectral(T) + n_omega(cd, T)


@dataclass(frozen=True)
class CurvedLiftResult:
    block: tuple
    alpha: object
    components: tuple
    hat: LiftedFunction


def curved_lift(cd: CartanData, T: LiftedFunction, s: int | None = None) -> CurvedLiftResult:
    """Solve the curved recursion for a homogeneous symbol in one Casimir block."""
    degs = T.xi_degrees()
    if len(degs) > 1:
        raise ValueError("curved_lift expects a homogeneous symbol")
    k = degs.pop() if degs else 0
    fiber = T.fiber(k)
    if s is None:
        hits = [b.index for b in casimir_blocks(fiber).blocks if block_projector(fiber, b.index).apply(T) == T]
        if len(hits) != 1:
            raise ValueError("symbol is not contained in a single Casimir block")
        s = hits[0]
    alpha, comps = eigen_recursion(T, k, s, lambda S: n_omega(cd, S), T.m, T.v1, T.v2)
    hat = T.zero()
    for c in comps:
        hat = hat + c
    return CurvedLiftResult((k, s), alpha, tuple(comps), hat)


def lift_symbol_curved(cd: CartanData, T: LiftedFunction) -> LiftedFunction:
    out = T.zero()
    for k in sorted(T.xi_degrees()):
        part = T.xi_degree_part(k)
        fiber = T.fiber(k)
        for b in casimir_blocks(fiber).blocks:
            piece = block_projector(fiber, b.index).apply(part)
            if not piece.is_zero():
                out = out + curved_lift(cd, piece, b.index).hat
    return out


def quantize_curved(c: ProjConnection, T: PolySymbol) -> PolyOperator:
    """Q_M(nabla, T) read back on the base as a polynomial differential operator."""
    if c.m != T.m:
        raise ValueError("dimension mismatch")
    cd = normal_cartan(c)
    hat = lift_symbol_curved(cd, LiftedFunction.from_symbol(T))
    out = q_omega(cd, hat, LiftedFunction.argument(T.m, T.v1))
    if not out.is_h_equivariant:
        raise HEquivarianceError("quantized operator depends on the fiber coordinate")
    return PolyOperator.empty(T.m, T.v1, T.v2)._new(dict(out.terms))


def quantize_curved_apply(c: ProjConnection, T: PolySymbol, f: dict) -> dict:
    """Q_M(nabla, T)(f) for a concrete polynomial section, without building the operator."""
    cd = normal_cartan(c)
    hat = lift_symbol_curved(cd, LiftedFunction.from_symbol(T))
    out = q_omega(cd, hat, LiftedFunction.from_section(T.m, T.v1, f))
    if not out.is_h_equivariant:
        raise HEquivarianceError("quantized section depends on the fiber coordinate")
    return {comp[0]: p for comp, p in out.terms.items()}


# -- identities along the fibers -------------------------------------------------


def _eta_family(F: Field) -> Field:
    return Field.stack([F.deta(p) for p in range(F.m)], vector_slot(F.m), len(F.slots))


def _eta_gamma_family(T: Field) -> Field:
    """p -> (L_{eps_p*} + gamma(eps_p)) T as one G_0-equivariant family."""
    m = T.m
    return Field.stack(
        [T.deta(p) + gamma_apply(eps_raw(m, p), T) for p in range(m)], vector_slot(m), len(T.slots)
    )


def _contract(F: Field, h: GradedElement) -> Field:
    pos = len(F.slots) - 1
    acc = None
    for p, c in enumerate(h.xi):
        part = F.component(pos, p)
        acc = part.scale(c) if acc is None else acc + part.scale(c)
    return acc


def equivariance_defect(cd: CartanData, h: GradedElement, T: Field, f: Field) -> Field:
    """L_{h*} Q(T)(f) - Q(T)(L_{h*} f) - Q((L_{h*} + gamma(h)) T)(f); identically zero."""
    if h.grades() - {1}:
        raise ValueError("h must lie in g_1")
    QTf = q_omega(cd, T, f)
    lhs = _contract(_eta_family(QTf), h)
    mid = _contract(q_omega(cd, T, _eta_family(f)), h)
    fam = _eta_gamma_family(T)
    rhs_family = q_omega(cd, fam, f)
    # the family slot sits right after the T slots; move it last before contracting
    n_t = len(T.slots) - 2
    pos = 1 + n_t
    parts = [rhs_family.component(pos, p) for p in range(T.m)]
    rhs = _contract(Field.stack(parts, vector_slot(T.m), len(parts[0].slots)), h)
    return lhs - mid - rhs


def commutator_defect(cd: CartanData, h: GradedElement, T: Field) -> Field:
    """[L_{h*} + gamma(h), C^omega + N^omega] T, computed on the equivariant family."""
    if h.grades() - {1}:
        raise ValueError("h must lie in g_1")
    first = _eta_gamma_family(curly_casimir_omega(cd, T))
    second = curly_casimir_omega(cd, _eta_gamma_family(T))
    return _contract(first - second, h)


# -- affine changes of coordinates -------------------------------------------------


def _affine_substitution(m, M, t):
    """Images of x_i under x -> M x + t, as ring elements."""
    R, gens = poly_ring(m)
    return [sum((gens[j] * as_rational(M[i][j]) for j in range(m)), R.zero) + as_rational(t[i]) for i in range(m)]


def _compose_x(p, images):
    m = len(images)
    gens = p.ring.gens
    return p.compose([(gens[i], images[i]) for i in range(m)])


def _inverse(M):
    from ._linalg import dmatrix

    n = len(M)
    return dmatrix(M, (n, n)).inv().to_list()


def pullback_connection(c: ProjConnection, M, t) -> ProjConnection:
    """phi^* nabla for phi(x) = M x + t."""
    m = c.m
    Minv = _inverse(M)
    images = _affine_substitution(m, M, t)
    R = poly_ring(m)[0]
    out = {}
    for i in range(m):
        for j in range(m):
            for k in range(j, m):
                v = R.zero
                for a in range(m):
                    if not Minv[i][a]:
                        continue
                    for b in range(m):
                        for cc in range(m):
                            g = c(a, b, cc)
                            w = Minv[i][a] * as_rational(M[b][j]) * as_rational(M[cc][k])
                            if g and w:
                                v = v + _compose_x(g, images) * w
                out[(i, j, k)] = v
    return ProjConnection(m, out)


def pullback_symbol(T: PolySymbol, M, t) -> PolySymbol:
    """(x, xi) -> T(M x + t, M^{-T} xi), for density-valued symbols."""
    m = T.m
    if T.v1.base != "trivial" or T.v2.base != "trivial":
        raise ValueError("pullback implemented for densities only")
    Minv = _inverse(M)
    R, gens = poly_ring(m)
    images = _affine_substitution(m, M, t)
    xi_images = [sum((gens[2 * m + j] * Minv[j][i] for j in range(m)), R.zero) for i in range(m)]
    subs = [(gens[i], images[i]) for i in range(m)] + [(gens[2 * m + i], xi_images[i]) for i in range(m)]
    return T._new({c: p.compose(subs) for c, p in T.terms.items()})


def pullback_operator_apply(D: PolyOperator, M, t, f):
    """(phi^* D)(f) = (D (f o phi^{-1})) o phi for scalar polynomial f."""
    m = D.m
    Minv = _inverse(M)
    R, gens = poly_ring(m)
    tt = [as_rational(v) for v in t]
    inv_images = [sum((gens[j] * Minv[i][j] for j in range(m)), R.zero) - sum((Minv[i][j] * tt[j] for j in range(m)), QQ(0)) for i in range(m)]
    g = _compose_x(f, inv_images)
    out = D.apply({0: g}).get(0, R.zero)
    return _compose_x(out, _affine_substitution(m, M, t))
