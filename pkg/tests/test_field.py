import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codedpir.errors import ParameterError
from codedpir.field import (
    GF,
    FieldElem,
    FieldMatrix,
    InconsistentSystem,
    UnderdeterminedSystem,
    check_prime,
    fe_arith,
    inverse,
    null_space,
    rank,
    reduced_column_echelon,
    solve,
    solve_unique,
)

SMALL_PRIMES = [2, 3, 5, 7, 11, 13]


def matrices(q_choices=(2, 3, 5), max_dim=4):
    @st.composite
    def build(draw):
        q = draw(st.sampled_from(q_choices))
        rows = draw(st.integers(1, max_dim))
        cols = draw(st.integers(1, max_dim))
        data = draw(
            st.lists(
                st.lists(st.integers(0, q - 1), min_size=cols, max_size=cols),
                min_size=rows,
                max_size=rows,
            )
        )
        return FieldMatrix(data, q, cols)

    return build()


def span_size(m: FieldMatrix) -> int:
    """Number of distinct vectors in the column span, by enumeration."""
    vecs = set()
    for coeffs in itertools.product(range(m.q), repeat=m.cols):
        vecs.add(m.dot_vector(coeffs))
    return len(vecs)


@pytest.mark.parametrize("q", SMALL_PRIMES)
def test_field_axioms_exhaustive(q):
    F = GF(q)
    elems = list(F)
    zero, one = F(0), F(1)
    for a in elems:
        assert a + zero == a and a * one == a
        assert a + (-a) == zero
        if a != zero:
            assert a * a.inverse() == one
            assert a / a == one
    for a, b in itertools.product(elems, repeat=2):
        assert a + b == b + a and a * b == b * a
        assert fe_arith(a, b, "sub") + b == a
    for a, b, c in itertools.product(elems, repeat=3):
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c


def test_division_by_zero():
    F = GF(7)
    with pytest.raises(ZeroDivisionError):
        F(3) / F(0)
    with pytest.raises(ZeroDivisionError):
        F(0).inverse()


def test_mixed_moduli_rejected():
    with pytest.raises(ValueError):
        FieldElem(1, 5) + FieldElem(1, 7)


@pytest.mark.parametrize("q", [0, 1, 4, 9, 65535, 2**31])
def test_check_prime_rejects_composites(q):
    with pytest.raises(ParameterError):
        check_prime(q)


def test_large_prime_arithmetic_is_exact():
    q = 2**31 - 1
    F = GF(q)
    a, b = F(q - 1), F(q - 2)
    assert (a * b).value == ((q - 1) * (q - 2)) % q
    assert (a / b) * b == a
    m = FieldMatrix([[q - 1, 5], [7, q - 3]], q)
    assert inverse(m) @ m == FieldMatrix.identity(2, q)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rank_matches_span_enumeration(m):
    assert m.q ** rank(m) == span_size(m)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_null_space_matches_enumeration(m):
    ns = null_space(m)
    kernel = [
        x for x in itertools.product(range(m.q), repeat=m.cols) if not any(m.dot_vector(x))
    ]
    assert len(kernel) == m.q ** ns.cols
    for j in range(ns.cols):
        assert not any(m.dot_vector(ns.col(j)))
    assert rank(ns) == ns.cols
    assert rank(m) + ns.cols == m.cols


@settings(max_examples=60, deadline=None)
@given(matrices(), st.data())
def test_solve_finds_a_solution(m, data):
    x0 = data.draw(st.lists(st.integers(0, m.q - 1), min_size=m.cols, max_size=m.cols))
    b = m.dot_vector(x0)
    x = solve(m, b)
    assert m.dot_vector(x) == b
    if rank(m) == m.cols:
        assert solve_unique(m, b) == tuple(x0)
    else:
        with pytest.raises(UnderdeterminedSystem):
            solve_unique(m, b)


def test_solve_inconsistent():
    m = FieldMatrix([[1, 1], [2, 2]], 5)
    with pytest.raises(InconsistentSystem):
        solve(m, [1, 3])
    with pytest.raises(ValueError):
        solve(m, [1])


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_column_echelon(m):
    E, C = reduced_column_echelon(m)
    assert m @ C == E
    assert rank(C) == m.cols
    nonzero = [j for j in range(E.cols) if any(E.col(j))]
    assert nonzero == list(range(rank(m)))
    for a in nonzero:
        t = next(i for i in range(E.rows) if E[i, a])
        assert E[t, a] == 1
        assert all(E[t, b] == 0 for b in range(E.cols) if b != a)


@settings(max_examples=40, deadline=None)
@given(matrices(max_dim=3))
def test_inverse(m):
    if m.rows != m.cols:
        with pytest.raises(ValueError):
            inverse(m)
    elif rank(m) < m.rows:
        with pytest.raises(ZeroDivisionError):
            inverse(m)
    else:
        assert m @ inverse(m) == FieldMatrix.identity(m.rows, m.q)


def test_matrix_basics():
    q = 5
    a = FieldMatrix([[1, 2], [3, 4]], q)
    assert a.shape == (2, 2)
    assert a.T.tolist() == [[1, 3], [2, 4]]
    assert (a + a).tolist() == [[2, 4], [1, 3]]
    assert (a - a).is_zero()
    assert (-a + a).is_zero()
    assert a.scale(2) == a + a
    assert FieldMatrix.hstack([a, a]).shape == (2, 4)
    assert FieldMatrix.vstack([a, a]).shape == (4, 2)
    assert FieldMatrix([[7]], q)[0, 0] == 2
    assert hash(a) == hash(FieldMatrix([[6, 7], [8, 9]], q))
