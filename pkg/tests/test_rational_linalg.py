from fractions import Fraction

import pytest

from projquant._linalg import SparseEchelon, dmatrix, eigen_blocks, rank
from projquant._rational import QQ, as_rational, format_rational, parse_rational


def test_parse_and_format_round_trip():
    for s in ["0", "3", "-7/4", "22/6"]:
        q = parse_rational(s)
        assert parse_rational(format_rational(q)) == q
    assert format_rational(QQ(22, 6)) == "11/3"


def test_zero_denominator_rejected():
    with pytest.raises(ValueError):
        parse_rational("1/0")


@pytest.mark.parametrize("bad", [0.5, True, "abc", None])
def test_as_rational_rejects_inexact(bad):
    with pytest.raises((TypeError, ValueError)):
        as_rational(bad)


def test_as_rational_accepts_exact_types():
    assert as_rational(Fraction(1, 3)) == QQ(1, 3)
    assert as_rational("2/4") == QQ(1, 2)
    assert as_rational(5) == QQ(5)


def test_rank_and_eigen_blocks():
    M = dmatrix([[2, 1, 0], [0, 2, 0], [0, 0, 3]])
    assert rank(M) == 3
    S = dmatrix([[1, 1], [0, 3]])
    blocks = eigen_blocks(S)
    assert sorted(b.eigenvalue for b in blocks) == [QQ(1), QQ(3)]


def test_sparse_echelon_solves_and_detects_inconsistency():
    E = SparseEchelon(2)
    E.add({0: QQ(1), 1: QQ(1)}, QQ(3))
    E.add({0: QQ(1), 1: QQ(-1)}, QQ(1))
    assert E.rank == 2
    assert E.solve() == [QQ(2), QQ(1)]
    E.add({0: QQ(2)}, QQ(5))
    assert E.inconsistent
