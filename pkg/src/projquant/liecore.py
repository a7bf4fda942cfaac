"""The graded Lie algebra sl(m+1) = g_{-1} + g_0 + g_1.

An element is stored as a triple ``(v, A, xi)``: a vector of g_{-1} = R^m, a
matrix of g_0 = gl(m) and a covector of g_1 = R^{m*}.  The triple corresponds
to the class of the block matrix ``[[A, v], [xi, 0]]`` in gl(m+1)/R.Id; a
general block matrix ``[[A, v], [xi, a]]`` maps to ``(v, A - a Id, xi)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from ._rational import QQ, as_rational, format_rational

__all__ = [
    "GradedElement",
    "DualBasisFamily",
    "bracket",
    "bracket_parts",
    "killing",
    "build_dual_bases",
    "e_vec",
    "eps_raw",
    "euler",
    "gl_unit",
]


def _vec(values, m):
    values = tuple(as_rational(v) for v in values)
    if len(values) != m:
        raise ValueError(f"expected length {m}, got {len(values)}")
    return values


@dataclass(frozen=True)
class GradedElement:
    m: int
    v: tuple
    A: tuple
    xi: tuple

    def __post_init__(self):
        m = self.m
        if m < 1:
            raise ValueError("dimension must be positive")
        object.__setattr__(self, "v", _vec(self.v, m))
        object.__setattr__(self, "xi", _vec(self.xi, m))
        rows = tuple(_vec(row, m) for row in self.A)
        if len(rows) != m:
            raise ValueError(f"A must be {m}x{m}")
        object.__setattr__(self, "A", rows)

    @classmethod
    def zero(cls, m: int) -> GradedElement:
        z = (0,) * m
        return cls(m, z, (z,) * m, z)

    @classmethod
    def from_parts(cls, m, v=None, A=None, xi=None) -> GradedElement:
        z = (0,) * m
        return cls(m, v if v is not None else z, A if A is not None else (z,) * m, xi if xi is not None else z)

    # -- linear structure -------------------------------------------------
    def _check(self, other):
        if not isinstance(other, GradedElement):
            return NotImplemented
        if other.m != self.m:
            raise ValueError(f"dimension mismatch: {self.m} vs {other.m}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return GradedElement(
            self.m,
            [a + b for a, b in zip(self.v, other.v)],
            [[a + b for a, b in zip(r, s)] for r, s in zip(self.A, other.A)],
            [a + b for a, b in zip(self.xi, other.xi)],
        )

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> GradedElement:
        c = as_rational(c)
        return GradedElement(
            self.m,
            [c * a for a in self.v],
            [[c * a for a in r] for r in self.A],
            [c * a for a in self.xi],
        )

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    # -- grading ----------------------------------------------------------
    def grade_part(self, grade: int) -> GradedElement:
        m = self.m
        if grade == -1:
            return GradedElement.from_parts(m, v=self.v)
        if grade == 0:
            return GradedElement.from_parts(m, A=self.A)
        if grade == 1:
            return GradedElement.from_parts(m, xi=self.xi)
        raise ValueError("grade must be -1, 0 or 1")

    def grades(self) -> set[int]:
        out = set()
        if any(self.v):
            out.add(-1)
        if any(any(r) for r in self.A):
            out.add(0)
        if any(self.xi):
            out.add(1)
        return out

    def is_zero(self) -> bool:
        return not self.grades()

    # -- matrix realisation -----------------------------------------------
    def to_matrix(self) -> list[list]:
        """Traceless (m+1)x(m+1) representative of the class."""
        m = self.m
        tr = sum(self.A[i][i] for i in range(m))
        shift = tr / (m + 1)
        M = [[self.A[i][j] - (shift if i == j else 0) for j in range(m)] + [self.v[i]] for i in range(m)]
        M.append(list(self.xi) + [-shift])
        return M

    @classmethod
    def from_matrix(cls, M) -> GradedElement:
        """Decompose any (m+1)x(m+1) matrix; multiples of the identity are dropped."""
        m = len(M) - 1
        M = [[as_rational(x) for x in row] for row in M]
        a = M[m][m]
        A = [[M[i][j] - (a if i == j else 0) for j in range(m)] for i in range(m)]
        return cls(m, [M[i][m] for i in range(m)], A, M[m][:m])

    def to_json(self) -> dict:
        return {
            "v": [format_rational(x) for x in self.v],
            "A": [[format_rational(x) for x in r] for r in self.A],
            "xi": [format_rational(x) for x in self.xi],
        }

    @classmethod
    def from_json(cls, data: dict) -> GradedElement:
        m = len(data["v"])
        return cls(m, data["v"], data["A"], data["xi"])


def bracket_parts(v1, A1, x1, v2, A2, x2, zero=0):
    """Bracket on raw (v, A, xi) triples; entries may live in any commutative ring."""
    m = len(v1)
    a = sum((x1[i] * v2[i] - x2[i] * v1[i] for i in range(m)), zero)
    A = [
        [
            sum((A1[i][t] * A2[t][j] - A2[i][t] * A1[t][j] for t in range(m)), zero)
            + v1[i] * x2[j]
            - v2[i] * x1[j]
            - (a if i == j else zero)
            for j in range(m)
        ]
        for i in range(m)
    ]
    v = [sum((A1[i][t] * v2[t] - A2[i][t] * v1[t] for t in range(m)), zero) for i in range(m)]
    xi = [sum((x1[t] * A2[t][j] - x2[t] * A1[t][j] for t in range(m)), zero) for j in range(m)]
    return v, A, xi


def bracket(X: GradedElement, Y: GradedElement) -> GradedElement:
    """Class of the matrix commutator, decomposed back into the grading."""
    if X.m != Y.m:
        raise ValueError(f"dimension mismatch: {X.m} vs {Y.m}")
    v, A, xi = bracket_parts(X.v, X.A, X.xi, Y.v, Y.A, Y.xi, QQ(0))
    return GradedElement(X.m, v, A, xi)


def killing(X: GradedElement, Y: GradedElement):
    """Killing form of sl(m+1), computed as 2(m+1) tr(XY) on traceless representatives."""
    if X.m != Y.m:
        raise ValueError(f"dimension mismatch: {X.m} vs {Y.m}")
    MX, MY = X.to_matrix(), Y.to_matrix()
    n = X.m + 1
    tr = sum((MX[i][t] * MY[t][i] for i in range(n) for t in range(n)), QQ(0))
    return 2 * n * tr


def e_vec(m: int, i: int) -> GradedElement:
    """Unit vector e_i of g_{-1} (the matrix unit E_{i, m+1})."""
    v = [0] * m
    v[i] = 1
    return GradedElement.from_parts(m, v=v)


def eps_raw(m: int, i: int) -> GradedElement:
    """Unscaled unit covector of g_1 (the matrix unit E_{m+1, i})."""
    xi = [0] * m
    xi[i] = 1
    return GradedElement.from_parts(m, xi=xi)


def gl_unit(m: int, i: int, j: int) -> GradedElement:
    A = [[0] * m for _ in range(m)]
    A[i][j] = 1
    return GradedElement.from_parts(m, A=A)


def euler(m: int) -> GradedElement:
    """Euler element: acts by -1 on g_{-1}; sits in the A slot as -Id."""
    return GradedElement.from_parts(m, A=[[-1 if i == j else 0 for j in range(m)] for i in range(m)])


def sl_basis(m: int) -> list[list[list]]:
    """Basis of trace-free m x m matrices: off-diagonal units, then E_ii - E_{i+1,i+1}."""
    out = []
    for i in range(m):
        for j in range(m):
            if i != j:
                M = [[QQ(0)] * m for _ in range(m)]
                M[i][j] = QQ(1)
                out.append(M)
    for i in range(m - 1):
        M = [[QQ(0)] * m for _ in range(m)]
        M[i][i], M[i + 1][i + 1] = QQ(1), QQ(-1)
        out.append(M)
    return out


def _gram_dual(basis, form):
    from ._linalg import dmatrix

    n = len(basis)
    G = dmatrix([[form(a, b) for b in basis] for a in basis], (n, n))
    Ginv = G.inv().to_list()
    # dual_i = sum_j (G^{-1})_{j i} basis_j, so form(basis_k, dual_i) = delta_ki
    return [[Ginv[j][i] for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class DualBasisFamily:
    m: int
    e: tuple
    eps: tuple
    h: tuple
    hstar: tuple
    euler: GradedElement
    eps_raw: tuple

    def basis(self) -> list[GradedElement]:
        return [*self.e, *self.h, self.euler, *self.eps]

    def dual(self) -> list[GradedElement]:
        return [*self.eps, *self.hstar, self.euler.scale(QQ(1, 2 * self.m)), *self.e]


@lru_cache(maxsize=None)
def build_dual_bases(m: int) -> DualBasisFamily:
    if m < 2:
        raise ValueError("m must be at least 2")
    e = tuple(e_vec(m, i) for i in range(m))
    raw = tuple(eps_raw(m, i) for i in range(m))
    eps = tuple(r.scale(QQ(1, 2 * (m + 1))) for r in raw)
    h = tuple(GradedElement.from_parts(m, A=M) for M in sl_basis(m))
    coeffs = _gram_dual(h, killing)
    hstar = []
    for row in coeffs:
        acc = GradedElement.zero(m)
        for c, b in zip(row, h):
            if c:
                acc = acc + b.scale(c)
        hstar.append(acc)
    return DualBasisFamily(m, e, eps, h, tuple(hstar), euler(m), raw)


def sl_killing(A, B, m: int):
    """Killing form of sl(m) itself: 2m tr(AB)."""
    return 2 * m * sum((A[i][t] * B[t][i] for i in range(m) for t in range(m)), QQ(0))


def random_element(m: int, rng, grades=(-1, 0, 1), bound: int = 5) -> GradedElement:
    def r():
        return QQ(rng.randint(-bound, bound), rng.randint(1, 3))

    v = [r() for _ in range(m)] if -1 in grades else [0] * m
    A = [[r() for _ in range(m)] for _ in range(m)] if 0 in grades else [[0] * m for _ in range(m)]
    xi = [r() for _ in range(m)] if 1 in grades else [0] * m
    return GradedElement(m, v, A, xi)
