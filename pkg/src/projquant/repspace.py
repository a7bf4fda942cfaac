"""Fiber representations of gl(m) and their sl(m)-Casimir blocks.

A :class:`RepSpec` is a weighted density, symmetric power or exterior power of
R^m; ``rho_*(A)`` is the natural derivation action plus ``weight * tr(A)``.
A :class:`FiberSpace` is ``S^k R^m (x) V1^* (x) V2``, enumerated by triples
``(alpha, b, a)``: a symmetric multi-index, a V2 basis index and a V1 basis
index (the last two label the matrix unit ``E_{ba}`` of Hom(V1, V2)).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from math import comb

from ._linalg import DomainMatrix, dmatrix, eigen_blocks, identity, zeros
from ._rational import QQ, as_rational, format_rational
from .liecore import sl_basis, sl_killing

__all__ = [
    "RepSpec",
    "FiberSpace",
    "CasimirBlock",
    "CasimirBlockDecomposition",
    "rho_star",
    "shift_delta",
    "with_shift",
    "sl_casimir_matrix",
    "casimir_blocks",
    "alpha_eigenvalue",
    "multi_indices",
    "density",
]

BASES = ("trivial", "sym", "ext")


@lru_cache(maxsize=None)
def multi_indices(m: int, k: int) -> tuple[tuple[int, ...], ...]:
    """Exponent tuples of total degree k in m variables, lexicographically descending."""
    if k < 0:
        return ()
    out = []

    def rec(prefix, left, slots):
        if slots == 1:
            out.append((*prefix, left))
            return
        for first in range(left, -1, -1):
            rec((*prefix, first), left - first, slots - 1)

    rec((), k, m)
    return tuple(out)


@dataclass(frozen=True)
class RepSpec:
    base: str = "trivial"
    p: int = 0
    weight: object = 0

    def __post_init__(self):
        if self.base not in BASES:
            raise ValueError(f"unknown base {self.base!r}; expected one of {BASES}")
        if self.base == "trivial" and self.p != 0:
            raise ValueError("trivial base takes p = 0")
        if self.p < 0:
            raise ValueError("p must be non-negative")
        object.__setattr__(self, "weight", as_rational(self.weight))

    def basis(self, m: int) -> tuple:
        if self.base == "trivial":
            return ((),)
        if self.base == "sym":
            return multi_indices(m, self.p)
        if self.p > m:
            raise ValueError(f"Ext^{self.p} of R^{m} is zero")
        return tuple(itertools.combinations(range(m), self.p))

    def dim(self, m: int) -> int:
        return len(self.basis(m))

    def with_weight(self, weight) -> RepSpec:
        return RepSpec(self.base, self.p, weight)

    def to_json(self) -> dict:
        return {"base": self.base, "p": self.p, "weight": format_rational(self.weight)}

    @classmethod
    def from_json(cls, data: dict) -> RepSpec:
        return cls(data.get("base", "trivial"), int(data.get("p", 0)), data.get("weight", "0"))


def density(weight) -> RepSpec:
    return RepSpec("trivial", 0, weight)


@lru_cache(maxsize=None)
def generator_action(spec: RepSpec, m: int) -> dict:
    """Sparse rho_*(E_ij): ``{(i, j): {col: ((row, coeff), ...)}}`` on the basis of ``spec``."""
    basis = spec.basis(m)
    index = {b: n for n, b in enumerate(basis)}
    w = spec.weight
    out = {}
    for i in range(m):
        for j in range(m):
            cols = {}
            for c, b in enumerate(basis):
                acc: dict[int, object] = {}
                if spec.base == "sym" and b[j]:
                    nb = list(b)
                    nb[j] -= 1
                    nb[i] += 1
                    r = index[tuple(nb)]
                    acc[r] = acc.get(r, 0) + QQ(b[j])
                elif spec.base == "ext" and j in b:
                    if i == j:
                        acc[c] = acc.get(c, 0) + QQ(1)
                    elif i not in b:
                        lst = [i if t == j else t for t in b]
                        order = sorted(range(len(lst)), key=lambda t: lst[t])
                        sign = _perm_sign(order)
                        r = index[tuple(sorted(lst))]
                        acc[r] = acc.get(r, 0) + QQ(sign)
                if i == j and w:
                    acc[c] = acc.get(c, 0) + w
                entries = tuple((r, v) for r, v in acc.items() if v)
                if entries:
                    cols[c] = entries
            out[(i, j)] = cols
    return out


def _perm_sign(order) -> int:
    sign, seen = 1, [False] * len(order)
    for start in range(len(order)):
        if seen[start]:
            continue
        length, t = 0, start
        while not seen[t]:
            seen[t] = True
            t = order[t]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def rho_star(spec: RepSpec, A, m: int | None = None) -> DomainMatrix:
    """Matrix of rho_*(A) on the basis of ``spec`` for a rational m x m matrix A."""
    A = [[as_rational(x) for x in row] for row in A]
    if m is None:
        m = len(A)
    if len(A) != m or any(len(r) != m for r in A):
        raise ValueError(f"A must be {m}x{m}")
    d = spec.dim(m)
    M = [[QQ(0)] * d for _ in range(d)]
    for (i, j), cols in generator_action(spec, m).items():
        a = A[i][j]
        if not a:
            continue
        for c, entries in cols.items():
            for r, v in entries:
                M[r][c] += a * v
    return dmatrix(M, (d, d))


def id_eigenvalue(spec: RepSpec, m: int):
    """The scalar a with rho_*(Id) = a Id; raises if rho_*(Id) is not scalar."""
    M = rho_star(spec, [[1 if i == j else 0 for j in range(m)] for i in range(m)], m)
    d = M.shape[0]
    a = M[0, 0].element
    if not (M - identity(d) * a).is_zero_matrix:
        raise ValueError("rho_*(Id) is not a scalar")
    return a


def shift_delta(v1: RepSpec, v2: RepSpec, m: int):
    """Shift (a1 - a2) / m of the pair, where rho_*(Id) = a_i Id on V_i."""
    return (id_eigenvalue(v1, m) - id_eigenvalue(v2, m)) / m


def with_shift(v1: RepSpec, v2: RepSpec, delta, m: int) -> RepSpec:
    """Return V2 with its weight moved so that the pair has shift ``delta``."""
    delta = as_rational(delta)
    a1 = id_eigenvalue(v1, m)
    a2_base = id_eigenvalue(v2.with_weight(0), m)
    return v2.with_weight((a1 - m * delta - a2_base) / m)


@dataclass(frozen=True)
class FiberSpace:
    m: int
    k: int
    v1: RepSpec
    v2: RepSpec

    @cached_property
    def basis(self) -> tuple:
        n1, n2 = self.v1.dim(self.m), self.v2.dim(self.m)
        return tuple((al, b, a) for al in multi_indices(self.m, self.k) for b in range(n2) for a in range(n1))

    @cached_property
    def index(self) -> dict:
        return {key: n for n, key in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def generators(self) -> dict:
        """Dense rho_*(E_ij) on the fiber, keyed by (i, j)."""
        m = self.m
        g1, g2 = generator_action(self.v1, m), generator_action(self.v2, m)
        idx = self.index
        out = {}
        for i in range(m):
            for j in range(m):
                M = [[QQ(0)] * self.dim for _ in range(self.dim)]
                for c, (al, b, a) in enumerate(self.basis):
                    if al[j]:
                        nal = list(al)
                        nal[j] -= 1
                        nal[i] += 1
                        M[idx[(tuple(nal), b, a)]][c] += QQ(al[j])
                    for r, v in g2[(i, j)].get(b, ()):
                        M[idx[(al, r, a)]][c] += v
                    # Hom(V1, V2) carries -rho_1^T on the V1 index
                    for a2, entries in g1[(i, j)].items():
                        for r, v in entries:
                            if r == a:
                                M[idx[(al, b, a2)]][c] -= v
                out[(i, j)] = dmatrix(M, (self.dim, self.dim))
        return out

    def rho(self, A) -> DomainMatrix:
        acc = zeros(self.dim)
        for (i, j), G in self.generators.items():
            a = as_rational(A[i][j])
            if a:
                acc = acc + G * a
        return acc


def expected_dim(m: int, k: int, v1: RepSpec, v2: RepSpec) -> int:
    return comb(m + k - 1, k) * v1.dim(m) * v2.dim(m)


@lru_cache(maxsize=None)
def sl_casimir_matrix(f: FiberSpace) -> DomainMatrix:
    """C' = sum_j rho_*(h_j) rho_*(h_j^#), duals taken for the sl(m) form 2m tr(XY)."""
    m = f.m
    basis = sl_basis(m)
    n = len(basis)
    G = dmatrix([[sl_killing(a, b, m) for b in basis] for a in basis], (n, n))
    Ginv = G.inv().to_list()
    reps = [f.rho(b) for b in basis]
    acc = zeros(f.dim)
    for i in range(n):
        dual = zeros(f.dim)
        for j in range(n):
            if Ginv[j][i]:
                dual = dual + reps[j] * Ginv[j][i]
        acc = acc + reps[i] * dual
    return acc


def alpha_eigenvalue(k: int, cprime, delta, m: int):
    """(1/2m)(m delta - k)(m(delta - 1) - k) + m/(m+1) * cprime."""
    cprime, delta = as_rational(cprime), as_rational(delta)
    return (m * delta - k) * (m * (delta - 1) - k) / (2 * m) + QQ(m, m + 1) * cprime


@dataclass(frozen=True)
class CasimirBlock:
    index: int
    cprime: object
    projector: DomainMatrix
    alpha: object
    dim: int


@dataclass(frozen=True)
class CasimirBlockDecomposition:
    fiber: FiberSpace
    blocks: tuple = field(default_factory=tuple)

    def block_of(self, vec) -> int:
        """Index of the unique block containing the nonzero fiber vector ``vec``."""
        v = dmatrix([[x] for x in vec], (len(vec), 1))
        hits = [b.index for b in self.blocks if not (b.projector * v).is_zero_matrix]
        if len(hits) != 1:
            raise ValueError(f"vector meets blocks {hits}, not exactly one")
        return hits[0]


@lru_cache(maxsize=None)
def casimir_blocks(f: FiberSpace) -> CasimirBlockDecomposition:
    """Exact eigen-decomposition of C' on the fiber; alpha filled from the pair's shift."""
    delta = shift_delta(f.v1, f.v2, f.m)
    blocks = []
    for n, eb in enumerate(eigen_blocks(sl_casimir_matrix(f))):
        blocks.append(CasimirBlock(n, eb.eigenvalue, eb.projector, alpha_eigenvalue(f.k, eb.eigenvalue, delta, f.m), eb.dim))
    return CasimirBlockDecomposition(f, tuple(blocks))
