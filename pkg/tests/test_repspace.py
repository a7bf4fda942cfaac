import pytest

from projquant._linalg import dmatrix, identity
from projquant._rational import QQ
from projquant.casimir import casimir_direct
from projquant.flatcalc import PolySymbol, monomial
from projquant.liecore import sl_basis
from projquant.repspace import (
    FiberSpace,
    RepSpec,
    alpha_eigenvalue,
    casimir_blocks,
    density,
    expected_dim,
    multi_indices,
    rho_star,
    shift_delta,
    sl_casimir_matrix,
    with_shift,
)


def _rand_matrix(rng, m):
    return [[QQ(rng.randint(-3, 3), rng.randint(1, 2)) for _ in range(m)] for _ in range(m)]


def _comm(A, B):
    m = len(A)
    return [[sum(A[i][t] * B[t][j] - B[i][t] * A[t][j] for t in range(m)) for j in range(m)] for i in range(m)]


def test_rho_star_examples():
    m = 2
    Id = [[1, 0], [0, 1]]
    assert rho_star(density(QQ(3, 5)), Id, m) == dmatrix([[QQ(6, 5)]])
    A = [[1, 2], [3, 4]]
    assert rho_star(RepSpec("sym", 1, 0), A, m) == dmatrix(A)
    assert rho_star(RepSpec("ext", 1, 1), [[1, 0], [0, 2]], m) == dmatrix([[4, 0], [0, 5]])


@pytest.mark.parametrize("spec", [density(QQ(1, 3)), RepSpec("sym", 2, QQ(1, 2)), RepSpec("ext", 2, 1), RepSpec("sym", 1, 0)])
def test_rho_star_is_homomorphism(spec, rng):
    m = 3
    for _ in range(3):
        A, B = _rand_matrix(rng, m), _rand_matrix(rng, m)
        RA, RB = rho_star(spec, A, m), rho_star(spec, B, m)
        assert rho_star(spec, _comm(A, B), m) == RA * RB - RB * RA


def test_shift_delta():
    for m in (2, 3):
        assert shift_delta(density(QQ(2)), density(QQ(-3, 7)), m) == QQ(17, 7)
        v = RepSpec("ext", 1, QQ(1, 3))
        assert shift_delta(v, v, m) == 0
    # Sym^1 has rho_*(Id) = Id, so a1 = 1 and the shift against a weightless density is 1/m
    assert shift_delta(RepSpec("sym", 1, 0), density(0), 2) == QQ(1, 2)
    v2 = with_shift(density(2), density(0), QQ(5, 3), 2)
    assert shift_delta(density(2), v2, 2) == QQ(5, 3)


def test_fiber_dimensions():
    for m in (2, 3):
        for k in range(4):
            for v1, v2 in [(density(0), density(1)), (RepSpec("sym", 1, 0), RepSpec("ext", 2, 0))]:
                assert FiberSpace(m, k, v1, v2).dim == expected_dim(m, k, v1, v2)
    assert len(multi_indices(3, 2)) == 6


def test_casimir_k0_densities_is_zero():
    f = FiberSpace(2, 0, density(1), density(2))
    assert sl_casimir_matrix(f).is_zero_matrix


def test_casimir_commutes_with_sl_action(rng):
    f = FiberSpace(2, 2, RepSpec("sym", 1, 0), RepSpec("ext", 1, 0))
    C = sl_casimir_matrix(f)
    for _ in range(20):
        A = _rand_matrix(rng, 2)
        tr = A[0][0] + A[1][1]
        A[0][0] -= tr / 2
        A[1][1] -= tr / 2
        R = f.rho(A)
        assert (C * R - R * C).is_zero_matrix


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_densities_have_one_block(k):
    dec = casimir_blocks(FiberSpace(2, k, density(1), density(0)))
    assert len(dec.blocks) == 1
    assert dec.blocks[0].dim == k + 1


def test_block_projectors_ext1_m3():
    f = FiberSpace(3, 1, RepSpec("ext", 1, QQ(1, 2)), RepSpec("ext", 1, QQ(-1, 3)))
    dec = casimir_blocks(f)
    C = sl_casimir_matrix(f)
    eigenvalues = {b.cprime for b in dec.blocks}
    assert len(eigenvalues) == len(dec.blocks) > 1
    total = None
    for b in dec.blocks:
        P = b.projector
        assert P * P == P
        assert C * P == P * b.cprime
        total = P if total is None else total + P
        for b2 in dec.blocks:
            if b2.index != b.index:
                assert (P * b2.projector).is_zero_matrix
    assert total == identity(f.dim)


def test_alpha_eigenvalue_examples():
    for m in (2, 3):
        for d in (QQ(1, 3), QQ(-2), QQ(5, 7)):
            assert alpha_eigenvalue(0, 0, d, m) == QQ(m, 2) * d * (d - 1)
    assert alpha_eigenvalue(0, 0, 0, 2) == 0


def test_alpha_matches_direct_casimir_densities_k1():
    m = 2
    v1 = density(QQ(2))
    v2 = with_shift(v1, density(0), QQ(1, 3), m)
    f = FiberSpace(m, 1, v1, v2)
    (block,) = casimir_blocks(f).blocks
    T = PolySymbol.from_coeffs(m, v1, v2, {((1, 0), 0, 0): monomial(m, (1, 2)), ((0, 1), 0, 0): 3})
    assert casimir_direct(T) == T.scale(block.alpha)
    assert block.alpha == alpha_eigenvalue(1, block.cprime, QQ(1, 3), m)


def test_repspec_validation():
    with pytest.raises(ValueError):
        RepSpec("tensor", 1, 0)
    with pytest.raises(ValueError):
        RepSpec("ext", 3, 0).dim(2)
    assert RepSpec.from_json(RepSpec("sym", 2, QQ(1, 3)).to_json()) == RepSpec("sym", 2, QQ(1, 3))
    assert len(sl_basis(3)) == 8
