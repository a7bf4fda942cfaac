import pytest

from projquant._rational import QQ
from projquant.casimir import criticality
from projquant.fields import poly_ring
from projquant.flatcalc import PolySymbol, principal_symbol, q_aff
from projquant.liecore import build_dual_bases
from projquant.quantflat import (
    CriticalPairError,
    apply_table,
    brute_force_failure_set,
    brute_force_quantization,
    check_symbol_preservation,
    flat_table,
    full_table,
    lift,
    lift_symbol,
    quantize_flat,
    verify_equivariance,
)
from projquant.repspace import FiberSpace, alpha_eigenvalue, casimir_blocks, density, with_shift
from projquant.suites import random_symbol

from conftest import MIXED_PAIRS

M = 2


def _pair(delta):
    v1 = density(QQ(2))
    return v1, with_shift(v1, density(0), delta, M)


def test_lift_trivial_cases(densities):
    v1, v2 = densities
    T0 = PolySymbol.from_coeffs(M, v1, v2, {((0, 0), 0, 0): 3})
    assert lift(T0).hat == T0
    T1 = PolySymbol.from_coeffs(M, v1, v2, {((1, 0), 0, 0): 1})
    assert lift(T1).hat == T1


def test_lift_degree_one_correction(densities):
    v1, v2 = densities
    R, g = poly_ring(M)
    T = PolySymbol.from_coeffs(M, v1, v2, {((1, 0), 0, 0): g[0]})
    res = lift(T)
    a1 = casimir_blocks(FiberSpace(M, 1, v1, v2)).blocks[0].alpha
    a0 = casimir_blocks(FiberSpace(M, 0, v1, v2)).blocks[0].alpha
    # (C - alpha_1) T_0 = -N(T) = lambda
    expected = PolySymbol.from_coeffs(M, v1, v2, {((0, 0), 0, 0): v1.weight / (a0 - a1)})
    assert res.hat == T + expected
    assert res.check()


@pytest.mark.parametrize("pair", MIXED_PAIRS)
def test_lift_check_mixed(pair, rng):
    v1, v2 = pair
    for k in range(3):
        f = FiberSpace(M, k, v1, v2)
        T = random_symbol(M, v1, v2, k, rng)
        for b in casimir_blocks(f).blocks:
            from projquant.casimir import block_projector

            piece = block_projector(f, b.index).apply(T)
            if not piece.is_zero():
                assert lift(piece, b.index).check()


def test_quantize_k0_is_multiplication(densities):
    v1, v2 = densities
    R, g = poly_ring(M)
    T = PolySymbol.from_coeffs(M, v1, v2, {((0, 0), 0, 0): g[0] * g[1] + 1})
    assert quantize_flat(T) == q_aff(T)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_brute_force_agrees_with_tables(k):
    v1, v2 = _pair(QQ(1, 7))
    bf = brute_force_quantization(k, v1, v2, M)
    assert bf.unique and bf.certificate() is None
    assert full_table(bf) == flat_table(M, k, v1, v2)


def test_tables_reproduce_quantization(rng):
    v1, v2 = _pair(QQ(-2, 5))
    for k in range(3):
        T = random_symbol(M, v1, v2, k, rng)
        assert apply_table(flat_table(M, k, v1, v2), T) == quantize_flat(T)


def test_brute_force_certificate_at_critical_shift():
    v1, v2 = _pair(QQ(4, 3))
    assert criticality(v1, v2, M, 2).critical
    bf = brute_force_quantization(2, v1, v2, M)
    assert not bf.unique
    assert bf.certificate()["kind"] in ("inconsistent", "rank-deficient")


def test_quantize_rejects_critical_pair():
    v1, v2 = _pair(QQ(1))
    T = PolySymbol.from_coeffs(M, v1, v2, {((1, 0), 0, 0): poly_ring(M)[1][0]})
    with pytest.raises(CriticalPairError) as info:
        quantize_flat(T)
    assert info.value.report.critical


@pytest.mark.parametrize("k", [1, 2])
def test_failure_set_matches_symbolic(k):
    fs = brute_force_failure_set(k, density(QQ(2)), density(0), M)
    rep = criticality(density(QQ(2)), density(0), M, k, symbolic=True)
    symbolic = sorted({d for v in rep.verdicts if v.k == k for d in v.critical_deltas})
    assert list(fs.shifts) == symbolic
    assert fs.generic_unique


def test_verify_equivariance_positive_and_negative():
    v1, v2 = _pair(QQ(3, 11))
    assert verify_equivariance(quantize_flat, M, 2, v1, v2, coeff_degree=2).passed
    bad = verify_equivariance(q_aff, M, 1, v1, v2, coeff_degree=2)
    assert not bad.passed and bad.counterexample["defect"]
    fam = build_dual_bases(M)
    affine = [*fam.e, *fam.h, fam.euler]
    assert verify_equivariance(q_aff, M, 2, v1, v2, coeff_degree=2, generators=affine).passed


def test_symbol_preservation_and_uniqueness(rng):
    for v1, v2 in MIXED_PAIRS:
        for k in range(3):
            T = random_symbol(M, v1, v2, k, rng)
            D = quantize_flat(T)
            assert check_symbol_preservation(T, D)
            assert principal_symbol(D, k) == T
    v1, v2 = MIXED_PAIRS[1]
    T = random_symbol(M, v1, v2, 2, rng) + random_symbol(M, v1, v2, 1, rng)
    assert lift_symbol(T) == lift_symbol(T.xi_degree_part(2)) + lift_symbol(T.xi_degree_part(1))


def test_alpha_of_lift_matches_formula(densities, rng):
    v1, v2 = densities
    res = lift(random_symbol(M, v1, v2, 2, rng))
    block = casimir_blocks(FiberSpace(M, 2, v1, v2)).blocks[0]
    assert res.alpha == alpha_eigenvalue(2, block.cprime, QQ(17, 7), M)
