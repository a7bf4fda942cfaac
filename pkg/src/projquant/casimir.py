"""Casimir operators of the symbol representations, tree-like subspaces, criticality."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from ._linalg import dmatrix, row_space
from ._rational import QQ, format_rational
from .fields import FiberMap
from .flatcalc import PolySymbol, curly_L, gamma, gamma_apply, lie_derivative, proj_vector_field
from .liecore import GradedElement, build_dual_bases
from .repspace import FiberSpace, RepSpec, alpha_eigenvalue, casimir_blocks, shift_delta

__all__ = [
    "casimir_direct",
    "casimir_symmetric",
    "casimir_spectral",
    "n_operator",
    "curly_casimir",
    "curly_casimir_symmetric",
    "block_projector",
    "gamma_matrix",
    "TreeFamily",
    "tree_family",
    "BlockVerdict",
    "CriticalityReport",
    "criticality",
]


@lru_cache(maxsize=None)
def _field(h: GradedElement):
    return proj_vector_field(h)


def _L(h, T):
    return lie_derivative(_field(h), T)


def casimir_direct(T: PolySymbol) -> PolySymbol:
    """2 sum L_{eps^i} L_{e_i} - L_E / 2 + (L_E)^2 / 2m + sum L_{h_j} L_{h_j*}."""
    m = T.m
    fam = build_dual_bases(m)
    acc = T.zero()
    for e, eps in zip(fam.e, fam.eps):
        acc = acc + _L(eps, _L(e, T)).scale(2)
    LE = _L(fam.euler, T)
    acc = acc - LE.scale(QQ(1, 2)) + _L(fam.euler, LE).scale(QQ(1, 2 * m))
    for h, hs in zip(fam.h, fam.hstar):
        acc = acc + _L(h, _L(hs, T))
    return acc


def casimir_symmetric(T: PolySymbol) -> PolySymbol:
    """sum_b L_b L_{b*} over the full basis and its Killing dual."""
    fam = build_dual_bases(T.m)
    acc = T.zero()
    for b, bs in zip(fam.basis(), fam.dual()):
        acc = acc + _L(b, _L(bs, T))
    return acc


def curly_casimir_symmetric(T: PolySymbol) -> PolySymbol:
    """The Casimir of the operator action, sum_b curly_L_b curly_L_{b*}, by conjugation."""
    fam = build_dual_bases(T.m)
    acc = T.zero()
    for b, bs in zip(fam.basis(), fam.dual()):
        acc = acc + curly_L(b, curly_L(bs, T))
    return acc


@lru_cache(maxsize=None)
def block_projector(fiber: FiberSpace, s: int) -> FiberMap:
    P = casimir_blocks(fiber).blocks[s].projector
    return FiberMap.from_matrix(P, fiber, fiber)


@lru_cache(maxsize=None)
def _spectral_map(fiber: FiberSpace) -> FiberMap:
    out = FiberMap()
    for b in casimir_blocks(fiber).blocks:
        out = out + block_projector(fiber, b.index).scale(b.alpha)
    return out


def casimir_spectral(T: PolySymbol) -> PolySymbol:
    """C applied blockwise: alpha_{k,s} on each Casimir block of each degree."""
    acc = T.zero()
    for k in sorted(T.xi_degrees()):
        acc = acc + _spectral_map(T.fiber(k)).apply(T.xi_degree_part(k))
    return acc


def n_operator(T: PolySymbol) -> PolySymbol:
    """N = 2 sum gamma(eps^i) L_{X^{e_i}}."""
    fam = build_dual_bases(T.m)
    acc = T.zero()
    for e, eps in zip(fam.e, fam.eps):
        acc = acc + gamma_apply(eps, _L(e, T))
    return acc.scale(2)


def curly_casimir(T: PolySymbol) -> PolySymbol:
    return casimir_direct(T) + n_operator(T)


@lru_cache(maxsize=None)
def gamma_matrix(fiber: FiberSpace, j: int):
    """Matrix of gamma(eps_raw_j) from ``fiber`` to the fiber one degree lower."""
    from .liecore import eps_raw

    lower = FiberSpace(fiber.m, fiber.k - 1, fiber.v1, fiber.v2)
    return gamma(eps_raw(fiber.m, j), fiber).to_matrix(fiber, lower)


def _apply_rows(M, rows, dim_in):
    if not rows:
        return []
    B = dmatrix(rows, (len(rows), dim_in))
    return (M * B.transpose()).transpose().to_list()


@dataclass(frozen=True)
class TreeFamily:
    m: int
    v1: RepSpec
    v2: RepSpec
    origin: tuple  # (k, s)
    levels: tuple  # levels[l]: rref rows spanning tree^l inside the degree k-l fiber

    def level_fiber(self, l: int) -> FiberSpace:
        return FiberSpace(self.m, self.origin[0] - l, self.v1, self.v2)

    def depth(self) -> int:
        return sum(1 for lv in self.levels if lv)


def tree_family(k: int, s: int, m: int, v1: RepSpec, v2: RepSpec, order=None) -> TreeFamily:
    """Iterated gamma(g_1)-images of block s of the degree-k fiber.

    ``order`` permutes the g_1 directions; the spans do not depend on it.
    """
    fiber = FiberSpace(m, k, v1, v2)
    blocks = casimir_blocks(fiber).blocks
    if not 0 <= s < len(blocks):
        raise ValueError(f"no block {s} in degree {k}")
    P = blocks[s].projector
    levels = [row_space(P.transpose().to_list(), fiber.dim)]
    dirs = list(range(m)) if order is None else list(order)
    for l in range(1, k + 1):
        src = FiberSpace(m, k - l + 1, v1, v2)
        prev = levels[-1]
        images = []
        for j in dirs:
            images.extend(_apply_rows(gamma_matrix(src, j), prev, src.dim))
        levels.append(row_space(images, FiberSpace(m, k - l, v1, v2).dim))
    return TreeFamily(m, v1, v2, (k, s), tuple(levels))


def _blocks_meeting(fiber: FiberSpace, rows) -> list:
    if not rows:
        return []
    B = dmatrix(rows, (len(rows), fiber.dim)).transpose()
    return [b for b in casimir_blocks(fiber).blocks if not (b.projector * B).is_zero_matrix]


@dataclass(frozen=True)
class BlockVerdict:
    k: int
    s: int
    cprime: object
    alpha: object
    critical: bool
    offending: tuple = ()  # ((l, s', alpha'), ...)
    critical_deltas: tuple = ()  # shifts at which this block resonates (symbolic mode)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "s": self.s,
            "cprime": format_rational(self.cprime),
            "alpha": format_rational(self.alpha),
            "verdict": "critical" if self.critical else "regular",
            "offending": [{"level": l, "block": t, "alpha": format_rational(a)} for l, t, a in self.offending],
            "critical_deltas": [format_rational(d) for d in self.critical_deltas],
        }


@dataclass(frozen=True)
class CriticalityReport:
    v1: RepSpec
    v2: RepSpec
    m: int
    k_max: int
    delta: object
    verdicts: tuple = field(default_factory=tuple)
    symbolic: bool = False

    @property
    def critical(self) -> bool:
        return any(v.critical for v in self.verdicts)

    @property
    def critical_deltas(self) -> tuple:
        """Finite set of shifts (V1 fixed, V2 weight varying) at which some block resonates."""
        return tuple(sorted({d for v in self.verdicts for d in v.critical_deltas}))

    def to_json(self) -> dict:
        out = {
            "pair": [self.v1.to_json(), self.v2.to_json()],
            "m": self.m,
            "k_max": self.k_max,
            "delta": format_rational(self.delta),
            "critical": self.critical,
            "verdicts": [v.to_json() for v in self.verdicts],
        }
        if self.symbolic:
            out["critical_deltas"] = [format_rational(d) for d in self.critical_deltas]
        return out


def _resonance(k, c, kl, c2, m):
    """Root in delta of alpha_{k}(c) = alpha_{kl}(c2); the difference is affine in delta."""
    f0 = alpha_eigenvalue(k, c, 0, m) - alpha_eigenvalue(kl, c2, 0, m)
    f1 = alpha_eigenvalue(k, c, 1, m) - alpha_eigenvalue(kl, c2, 1, m)
    slope = f1 - f0
    if not slope:
        return None
    return -f0 / slope


def criticality(v1: RepSpec, v2: RepSpec, m: int, k_max: int, symbolic: bool = False) -> CriticalityReport:
    """Compare alpha_{k,s} with the Casimir spectrum on every tree level l >= 1.

    With ``symbolic`` the weight of V2 is treated as free: the tree spaces and
    C' do not depend on it, so each block pair contributes at most one
    resonant shift, solved exactly.
    """
    delta = shift_delta(v1, v2, m)
    verdicts = []
    for k in range(k_max + 1):
        fiber = FiberSpace(m, k, v1, v2)
        for b in casimir_blocks(fiber).blocks:
            tree = tree_family(k, b.index, m, v1, v2)
            offending, roots = [], set()
            for l in range(1, k + 1):
                lf = FiberSpace(m, k - l, v1, v2)
                for b2 in _blocks_meeting(lf, tree.levels[l]):
                    if b2.alpha == b.alpha:
                        offending.append((l, b2.index, b2.alpha))
                    if symbolic:
                        r = _resonance(k, b.cprime, k - l, b2.cprime, m)
                        if r is not None:
                            roots.add(r)
            verdicts.append(
                BlockVerdict(k, b.index, b.cprime, b.alpha, bool(offending), tuple(offending), tuple(sorted(roots)))
            )
    return CriticalityReport(v1, v2, m, k_max, delta, tuple(verdicts), symbolic)
