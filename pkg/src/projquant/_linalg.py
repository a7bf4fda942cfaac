"""Exact linear algebra over QQ.

Dense work goes through sympy's ``DomainMatrix``; the large, sparse and
incrementally assembled systems of the brute-force oracle use
:class:`SparseEchelon`.
"""
from __future__ import annotations

from dataclasses import dataclass

import sympy
from sympy.polys.matrices import DomainMatrix

from ._rational import QQ


class IrrationalSpectrumError(ValueError):
    """Raised when a matrix expected to have a rational spectrum does not."""


def dmatrix(rows, shape=None) -> DomainMatrix:
    rows = [[QQ.convert(v) for v in row] for row in rows]
    if shape is None:
        shape = (len(rows), len(rows[0]) if rows else 0)
    return DomainMatrix(rows, shape, QQ).to_sparse()


def sparse(entries: dict, shape) -> DomainMatrix:
    """Build from ``{row: {col: value}}``."""
    clean = {}
    for r, cols in entries.items():
        row = {c: QQ.convert(v) for c, v in cols.items() if v}
        if row:
            clean[r] = row
    return DomainMatrix(clean, shape, QQ)


def zeros(n: int, m: int | None = None) -> DomainMatrix:
    return DomainMatrix.zeros((n, n if m is None else m), QQ).to_sparse()


def identity(n: int) -> DomainMatrix:
    return DomainMatrix.eye(n, QQ).to_sparse()


def is_zero(M: DomainMatrix) -> bool:
    return M.is_zero_matrix


def row_space(vectors, dim: int) -> list[list]:
    """Reduced row-echelon basis of the span of ``vectors`` (each of length ``dim``)."""
    vectors = [v for v in vectors if any(v)]
    if not vectors:
        return []
    M = dmatrix(vectors, (len(vectors), dim))
    R, pivots = M.rref()
    rows = R.to_list()
    return [rows[i] for i in range(len(pivots))]


def rank(M: DomainMatrix) -> int:
    return M.rank()


@dataclass(frozen=True)
class EigenBlock:
    eigenvalue: object
    projector: DomainMatrix
    dim: int


def eigen_blocks(M: DomainMatrix) -> list[EigenBlock]:
    """Spectral projectors of a diagonalisable matrix with rational eigenvalues.

    Eigenvalues are read off the factorisation of the characteristic
    polynomial; any nonlinear irreducible factor raises
    :class:`IrrationalSpectrumError`.  Diagonalisability is checked by
    verifying that the product of the distinct linear factors annihilates M.
    """
    n = M.shape[0]
    if n == 0:
        return []
    t = sympy.Symbol("t")
    coeffs = M.charpoly()
    cp = sympy.Poly([sympy.Rational(int(QQ.numer(c)), int(QQ.denom(c))) for c in coeffs], t, domain="QQ")
    roots = []
    for factor, _mult in cp.factor_list()[1]:
        if factor.degree() != 1:
            raise IrrationalSpectrumError(f"irreducible factor {factor.as_expr()} of degree > 1")
        a, b = factor.all_coeffs()
        roots.append(QQ.convert(-b / a))
    roots.sort()
    eye = identity(n)
    prod = eye
    for r in roots:
        prod = prod * (M - eye * r)
    if not prod.is_zero_matrix:
        raise ValueError("matrix is not diagonalisable over QQ")
    blocks = []
    for i, r in enumerate(roots):
        P = eye
        for j, s in enumerate(roots):
            if i != j:
                P = (P * (M - eye * s)) * (QQ(1) / (r - s))
        blocks.append(EigenBlock(r, P, P.rank()))
    return blocks


class InconsistentSystem(Exception):
    pass


class SparseEchelon:
    """Incremental Gaussian elimination on sparse rows ``{col: value}`` plus a right-hand side.

    Rows are reduced against the current pivots as they arrive, so memory stays
    bounded by the number of unknowns regardless of how many equations are fed.
    ``domain`` may be any sympy field (QQ by default); with ``track`` the raw
    pivot values are kept, which is what a specialisation argument needs.
    """

    def __init__(self, n_unknowns: int, domain=QQ, track: bool = False):
        self.n = n_unknowns
        self.domain = domain
        self.pivots: dict[int, tuple[dict, object]] = {}
        self.inconsistent = False
        self.n_equations = 0
        self.pivot_values: list | None = [] if track else None
        self.residues: list = []

    def add(self, row: dict, rhs) -> None:
        K = self.domain
        self.n_equations += 1
        row = {c: K.convert(v) for c, v in row.items() if v}
        rhs = K.convert(rhs)
        while row:
            col = min(row)
            if col not in self.pivots:
                if self.pivot_values is not None:
                    self.pivot_values.append(row[col])
                inv = K.one / row[col]
                row = {c: v * inv for c, v in row.items()}
                rhs = rhs * inv
                self.pivots[col] = (row, rhs)
                return
            prow, prhs = self.pivots[col]
            f = row[col]
            for c, v in prow.items():
                nv = row.get(c, K.zero) - f * v
                if nv:
                    row[c] = nv
                else:
                    row.pop(c, None)
            rhs = rhs - f * prhs
        if rhs:
            self.inconsistent = True
            self.residues.append(rhs)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def solve(self) -> list:
        """Back-substitute; requires a consistent system of full column rank."""
        if self.inconsistent:
            raise InconsistentSystem("system is inconsistent")
        if self.rank < self.n:
            raise ValueError(f"rank deficient: rank {self.rank} < {self.n} unknowns")
        sol = [self.domain.zero] * self.n
        for col in sorted(self.pivots, reverse=True):
            row, rhs = self.pivots[col]
            val = rhs
            for c, v in row.items():
                if c != col:
                    val -= v * sol[c]
            sol[col] = val
        return sol
