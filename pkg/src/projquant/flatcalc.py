"""Symbols, differential operators and the projective action on R^m.

Symbols are polynomials in momenta ``xi`` with polynomial coefficients in
``x``, valued in Hom(V1, V2); operators use the same storage with ``xi^alpha``
read as ``d^alpha`` placed to the right of the coefficient (standard ordering),
which makes the affine quantization the identity on data.
"""
from __future__ import annotations

from functools import lru_cache
from math import factorial

from ._rational import QQ, as_rational
from .fields import Field, FiberMap, dual_slot, inert_slot, poly_ring, rep_slot
from .liecore import GradedElement, bracket, e_vec, eps_raw
from .repspace import FiberSpace, RepSpec, generator_action, multi_indices

__all__ = [
    "PolySymbol",
    "PolyOperator",
    "PolyVectorField",
    "proj_vector_field",
    "lie_derivative",
    "lie_operator",
    "compose",
    "operator_lie_derivative",
    "q_aff",
    "q_aff_inv",
    "principal_symbol",
    "curly_L",
    "gamma",
    "gamma_apply",
    "gamma_oracle",
    "vector_field_bracket",
]


def _coerce_poly(m, value):
    R = poly_ring(m)[0]
    if isinstance(value, type(R.one)):
        if value.ring != R:
            raise ValueError("polynomial from a different ring")
        return value
    return R(as_rational(value))


def monomial(m: int, x_exp=None, xi_exp=None, eta_exp=None):
    R = poly_ring(m)[0]
    z = (0,) * m
    mon = tuple(x_exp or z) + tuple(eta_exp or z) + tuple(xi_exp or z)
    return R.from_dict({mon: QQ(1)})


class _HomField(Field):
    __slots__ = ()

    @property
    def v1(self) -> RepSpec:
        return self.meta[0]

    @property
    def v2(self) -> RepSpec:
        return self.meta[1]

    @property
    def degree(self) -> int:
        return max(self.xi_degrees(), default=0)

    def fiber(self, k: int | None = None) -> FiberSpace:
        return FiberSpace(self.m, self.degree if k is None else k, self.v1, self.v2)

    def coefficient(self, alpha, b: int = 0, a: int = 0):
        """Polynomial in x multiplying ``xi^alpha E_ba``."""
        m = self.m
        R = self.ring
        poly = self.terms.get((b, a))
        if poly is None:
            return R.zero
        alpha = tuple(alpha)
        return R.from_dict({mon[:m] + (0,) * (2 * m): c for mon, c in poly.items() if mon[2 * m :] == alpha})

    def items(self):
        """Iterate ``((alpha, b, a), x-polynomial)`` sorted by key."""
        m = self.m
        R = self.ring
        out: dict = {}
        for (b, a), poly in self.terms.items():
            for mon, c in poly.items():
                key = (mon[2 * m :], b, a)
                out.setdefault(key, {})[mon[:m] + (0,) * (2 * m)] = c
        for key in sorted(out, key=lambda t: (-sum(t[0]), tuple(-e for e in t[0]), t[1], t[2])):
            yield key, R.from_dict(out[key])

    @classmethod
    def _build(cls, m, v1, v2, coeffs):
        R = poly_ring(m)[0]
        gens = poly_ring(m)[1]
        acc: dict = {}
        for key, value in coeffs.items():
            alpha, b, a = key
            if len(alpha) != m:
                raise ValueError(f"multi-index {alpha} has wrong length for m={m}")
            p = _coerce_poly(m, value)
            if any(mon[m:] != (0,) * (2 * m) for mon in p):
                raise ValueError("coefficients must be polynomials in x only")
            xi_mon = R.one
            for i, e in enumerate(alpha):
                xi_mon = xi_mon * gens[2 * m + i] ** e
            t = p * xi_mon
            acc[(b, a)] = acc.get((b, a), R.zero) + t
        return cls.empty(m, v1, v2)._new(acc)


class PolySymbol(_HomField):
    """Polynomial section of S R^m (x) Hom(V1, V2); mixed degrees allowed."""

    __slots__ = ()

    @classmethod
    def empty(cls, m: int, v1: RepSpec, v2: RepSpec) -> PolySymbol:
        return cls(m, (rep_slot(v2, m, "2"), dual_slot(v1, m, "1")), {}, sym=True, meta=(v1, v2))

    @classmethod
    def from_coeffs(cls, m: int, v1: RepSpec, v2: RepSpec, coeffs: dict) -> PolySymbol:
        """``coeffs`` maps ``(alpha, b, a)`` to a rational or an x-polynomial."""
        return cls._build(m, v1, v2, coeffs)

    @classmethod
    def from_vector(cls, fiber: FiberSpace, vec, poly=None) -> PolySymbol:
        """Fiber vector (over ``fiber.basis``) times an optional x-polynomial."""
        coeffs = {}
        for key, c in zip(fiber.basis, vec):
            c = as_rational(c)
            if c:
                coeffs[key] = c if poly is None else poly * c
        return cls.from_coeffs(fiber.m, fiber.v1, fiber.v2, coeffs)


class PolyOperator(_HomField):
    """Sum of ``C_alpha(x) o d^alpha`` with C_alpha in Hom(V1, V2)."""

    __slots__ = ()

    @classmethod
    def empty(cls, m: int, v1: RepSpec, v2: RepSpec) -> PolyOperator:
        return cls(m, (rep_slot(v2, m, "2"), inert_slot(v1.dim(m), "src")), {}, sym=False, meta=(v1, v2))

    @classmethod
    def from_coeffs(cls, m: int, v1: RepSpec, v2: RepSpec, coeffs: dict) -> PolyOperator:
        return cls._build(m, v1, v2, coeffs)

    @property
    def order(self) -> int:
        return self.degree

    def apply(self, f: dict) -> dict:
        """Apply to a polynomial V1-valued function ``{a: x-polynomial}``."""
        gens = self.gens
        out: dict = {}
        for (alpha, b, a), coeff in self.items():
            fa = f.get(a)
            if not fa:
                continue
            d = fa
            for i, e in enumerate(alpha):
                for _ in range(e):
                    d = d.diff(gens[i])
            if d:
                out[b] = out.get(b, self.ring.zero) + coeff * d
        return {b: p for b, p in out.items() if p}


class PolyVectorField:
    __slots__ = ("m", "components")

    def __init__(self, m: int, components):
        self.m = m
        self.components = tuple(_coerce_poly(m, c) for c in components)
        if len(self.components) != m:
            raise ValueError("wrong number of components")

    def __eq__(self, other):
        return isinstance(other, PolyVectorField) and self.components == other.components

    def __hash__(self):
        return hash(tuple(frozenset(c.items()) for c in self.components))

    def __add__(self, other):
        return PolyVectorField(self.m, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        return PolyVectorField(self.m, [a - b for a, b in zip(self.components, other.components)])

    def scale(self, c):
        c = as_rational(c)
        return PolyVectorField(self.m, [a * c for a in self.components])

    def jacobian(self):
        gens = poly_ring(self.m)[1]
        return [[Xi.diff(gens[j]) for j in range(self.m)] for Xi in self.components]

    def degree(self) -> int:
        m = self.m
        return max((sum(mon[:m]) for c in self.components for mon in c), default=0)

    def __repr__(self):
        return f"PolyVectorField({[c.as_expr() for c in self.components]})"


def proj_vector_field(h: GradedElement) -> PolyVectorField:
    """X^h: -v, then -A x, then (xi . x) x, summed over the graded parts of h."""
    m = h.m
    gens = poly_ring(m)[1]
    x = gens[:m]
    pair = sum((h.xi[j] * x[j] for j in range(m)), poly_ring(m)[0].zero)
    comps = []
    for i in range(m):
        c = -h.v[i] - sum((h.A[i][j] * x[j] for j in range(m)), poly_ring(m)[0].zero) + pair * x[i]
        comps.append(c)
    return PolyVectorField(m, comps)


def vector_field_bracket(X: PolyVectorField, Y: PolyVectorField) -> PolyVectorField:
    """[X, Y]^i = X(Y^i) - Y(X^i)."""
    m = X.m
    gens = poly_ring(m)[1]
    out = []
    for i in range(m):
        c = sum((X.components[j] * Y.components[i].diff(gens[j]) - Y.components[j] * X.components[i].diff(gens[j]) for j in range(m)), poly_ring(m)[0].zero)
        out.append(c)
    return PolyVectorField(m, out)


def lie_derivative(X: PolyVectorField, T: Field) -> Field:
    """L_X T = X . grad T - rho_*(DX) T, with rho_* acting on every slot and on the momenta."""
    if X.m != T.m:
        raise ValueError("dimension mismatch")
    acc = T.zero()
    for j, Xj in enumerate(X.components):
        if Xj:
            acc = acc + T.diff(j).mul_poly(Xj)
    return acc - T.rho(X.jacobian())


def lie_operator(X: PolyVectorField, spec: RepSpec) -> PolyOperator:
    """L_X on V-valued functions as an operator V -> V."""
    m = X.m
    R, gens = poly_ring(m)
    n = spec.dim(m)
    terms: dict = {}
    for a in range(n):
        terms[(a, a)] = sum((Xj * gens[2 * m + j] for j, Xj in enumerate(X.components)), R.zero)
    D = X.jacobian()
    for (i, j), cols in generator_action(spec, m).items():
        if not D[i][j]:
            continue
        for c, entries in cols.items():
            for r, v in entries:
                terms[(r, c)] = terms.get((r, c), R.zero) - D[i][j] * v
    return PolyOperator.empty(m, spec, spec)._new(terms)


def compose(D1: PolyOperator, D2: PolyOperator) -> PolyOperator:
    """D1 o D2, with symbol sum_gamma (1/gamma!) d_xi^gamma D1 . d_x^gamma D2."""
    if D1.m != D2.m or D1.v1 != D2.v2:
        raise ValueError("operators are not composable")
    m = D1.m
    R, gens = poly_ring(m)
    order = D1.order
    by_source: dict = {}
    for (b, a), p in D2.terms.items():
        by_source.setdefault(b, []).append((a, p))
    terms: dict = {}
    for total in range(order + 1):
        for g in multi_indices(m, total):
            w = QQ(1)
            for e in g:
                w /= factorial(e)
            for (c, b), p1 in D1.terms.items():
                dp1 = p1
                for i, e in enumerate(g):
                    for _ in range(e):
                        dp1 = dp1.diff(gens[2 * m + i])
                if not dp1:
                    continue
                for a, p2 in by_source.get(b, ()):
                    dp2 = p2
                    for i, e in enumerate(g):
                        for _ in range(e):
                            dp2 = dp2.diff(gens[i])
                    if dp2:
                        terms[(c, a)] = terms.get((c, a), R.zero) + dp1 * dp2 * w
    return PolyOperator.empty(m, D2.v1, D1.v2)._new(terms)


def operator_lie_derivative(X: PolyVectorField, D: PolyOperator) -> PolyOperator:
    """Commutator form: L_X o D - D o L_X."""
    return compose(lie_operator(X, D.v2), D) - compose(D, lie_operator(X, D.v1))


def q_aff(T: PolySymbol) -> PolyOperator:
    """Standard ordering: xi^alpha -> d^alpha placed to the right."""
    return PolyOperator.empty(T.m, T.v1, T.v2)._new(dict(T.terms))


def q_aff_inv(D: PolyOperator) -> list[PolySymbol]:
    """Inverse of :func:`q_aff`, split by degree: entry l is the degree-l part."""
    full = PolySymbol.empty(D.m, D.v1, D.v2)._new(dict(D.terms))
    return [full.xi_degree_part(l) for l in range(D.order + 1)]


def q_aff_inv_total(D: PolyOperator) -> PolySymbol:
    return PolySymbol.empty(D.m, D.v1, D.v2)._new(dict(D.terms))


def principal_symbol(D: PolyOperator, k: int | None = None) -> PolySymbol:
    """Degree-k part of the symbol (k defaults to the order)."""
    return q_aff_inv_total(D).xi_degree_part(D.order if k is None else k)


def curly_L(h: GradedElement, T: PolySymbol) -> PolySymbol:
    """Q_Aff^{-1} o (operator Lie derivative along X^h) o Q_Aff."""
    return q_aff_inv_total(operator_lie_derivative(proj_vector_field(h), q_aff(T)))


def gamma_oracle(h: GradedElement, T: PolySymbol) -> PolySymbol:
    """gamma(h) T computed as the defect curly_L - L."""
    return curly_L(h, T) - lie_derivative(proj_vector_field(h), T)


@lru_cache(maxsize=None)
def _gamma_unit(m: int, v1: RepSpec, v2: RepSpec, k: int, j: int) -> FiberMap:
    """Closed form of gamma(eps_raw_j) on the degree-k fiber."""
    eta = eps_raw(m, j)
    n1, n2 = v1.dim(m), v2.dim(m)
    g1 = generator_action(v1, m)
    # rho_1([e_i, eta]) as {a: [(a', coeff)]} meaning E_ba . rho1(B) = sum coeff E_ba'
    right = []
    for i in range(m):
        B = bracket(e_vec(m, i), eta).A
        acc: dict = {}
        for p in range(m):
            for q in range(m):
                if not B[p][q]:
                    continue
                for col, entries in g1[(p, q)].items():
                    for row, v in entries:
                        acc.setdefault(row, {})
                        acc[row][col] = acc[row].get(col, 0) + B[p][q] * v
        right.append({a: [(a2, c) for a2, c in cols.items() if c] for a, cols in acc.items()})
    second = {}
    for i in range(m):
        for l in range(m):
            second[(i, l)] = bracket(e_vec(m, l), bracket(e_vec(m, i), eta)).v
    table: dict = {}
    for alpha in multi_indices(m, k):
        for b in range(n2):
            for a in range(n1):
                images: dict = {}

                def put(key, c):
                    images[key] = images.get(key, 0) + c

                for i in range(m):
                    if not alpha[i]:
                        continue
                    lower = list(alpha)
                    lower[i] -= 1
                    lower = tuple(lower)
                    for a2, c in right[i].get(a, ()):
                        put((lower, (b, a2)), alpha[i] * c)
                for i in range(m):
                    for l in range(i, m):
                        count = alpha[i] * (alpha[i] - 1) // 2 if i == l else alpha[i] * alpha[l]
                        if not count:
                            continue
                        base = list(alpha)
                        base[i] -= 1
                        base[l] -= 1
                        for p, wp in enumerate(second[(i, l)]):
                            if not wp:
                                continue
                            tgt = list(base)
                            tgt[p] += 1
                            put((tuple(tgt), (b, a)), count * wp)
                table[(alpha, (b, a))] = [(t, c) for t, c in images.items() if c]
    return FiberMap(table)


def gamma(h: GradedElement, fiber: FiberSpace) -> FiberMap:
    """Constant fiber map S^k (x) Hom -> S^{k-1} (x) Hom; zero on g_{-1} + g_0."""
    if h.m != fiber.m:
        raise ValueError("dimension mismatch")
    out = FiberMap()
    if fiber.k == 0:
        return out
    for j, c in enumerate(h.xi):
        if c:
            out = out + _gamma_unit(fiber.m, fiber.v1, fiber.v2, fiber.k, j).scale(c)
    return out


def gamma_apply(h: GradedElement, T: PolySymbol) -> PolySymbol:
    acc = T.zero()
    for k in sorted(T.xi_degrees()):
        if k:
            acc = acc + gamma(h, FiberSpace(T.m, k, T.v1, T.v2)).apply(T.xi_degree_part(k))
    return acc
