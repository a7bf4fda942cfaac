import random

from hypothesis import given, settings
from hypothesis import strategies as st

from projquant._rational import QQ
from projquant.liecore import (
    GradedElement,
    bracket,
    build_dual_bases,
    e_vec,
    eps_raw,
    euler,
    killing,
    random_element,
)


def _matmul(X, Y):
    n = len(X)
    return [[sum((X[i][t] * Y[t][j] for t in range(n)), QQ(0)) for j in range(n)] for i in range(n)]


def _commutator(X, Y):
    P, Q = _matmul(X, Y), _matmul(Y, X)
    return [[P[i][j] - Q[i][j] for j in range(len(X))] for i in range(len(X))]


def _trace_killing(X, Y, m):
    P = _matmul(X.to_matrix(), Y.to_matrix())
    return 2 * (m + 1) * sum((P[i][i] for i in range(m + 1)), QQ(0))


def test_bracket_matrix_unit_example():
    m = 2
    b = bracket(e_vec(m, 0), eps_raw(m, 0))
    assert b.v == (0, 0) or list(b.v) == [0, 0]
    assert list(b.xi) == [0, 0]
    assert [list(r) for r in b.A] == [[2, 0], [0, 1]]  # E_11 + Id_2


def test_bracket_with_itself_vanishes(rng):
    for m in (2, 3):
        X = random_element(m, rng)
        assert bracket(X, X).is_zero()


def test_killing_examples():
    m = 2
    assert killing(e_vec(m, 0), eps_raw(m, 0)) == 6
    for i in range(m):
        for j in range(m):
            assert killing(e_vec(m, i), e_vec(m, j)) == 0
    E = euler(m)
    assert killing(E, E) == _trace_killing(E, E, m)


def test_killing_matches_trace_oracle(rng):
    for m in (2, 3, 4):
        for _ in range(10):
            X, Y = random_element(m, rng), random_element(m, rng)
            assert killing(X, Y) == _trace_killing(X, Y, m)


def test_dual_bases_gram_and_eps_scaling():
    fam = build_dual_bases(2)
    basis, dual = fam.basis(), fam.dual()
    assert len(basis) == 8
    for i, u in enumerate(basis):
        for j, w in enumerate(dual):
            assert killing(u, w) == (1 if i == j else 0)
    assert fam.eps[0] == eps_raw(2, 0).scale(QQ(1, 6))


def test_crochet_m3():
    fam = build_dual_bases(3)
    acc = GradedElement.zero(3)
    for e, eps in zip(fam.e, fam.eps):
        acc = acc + bracket(e, eps)
    assert acc == fam.euler.scale(QQ(-1, 2))


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=4).map(lambda f: QQ(f.numerator, f.denominator))


@st.composite
def elements(draw, m):
    v = draw(st.lists(rationals, min_size=m, max_size=m))
    A = [draw(st.lists(rationals, min_size=m, max_size=m)) for _ in range(m)]
    xi = draw(st.lists(rationals, min_size=m, max_size=m))
    return GradedElement(m, v, A, xi)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_bracket_matches_matrix_commutator(data):
    m = data.draw(st.integers(2, 4))
    X, Y = data.draw(elements(m)), data.draw(elements(m))
    expected = GradedElement.from_matrix(_commutator(X.to_matrix(), Y.to_matrix()))
    assert bracket(X, Y) == expected


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_jacobi_property(data):
    m = data.draw(st.integers(2, 5))
    a, b, c = (data.draw(elements(m)) for _ in range(3))
    jac = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b))
    assert jac.is_zero()


def test_json_round_trip():
    X = random_element(3, random.Random(3))
    assert GradedElement.from_json(X.to_json()) == X
