import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permforce.linalg import (
    Inertia,
    LinalgError,
    RatMatrix,
    congruence_diagonalize,
    dot,
    float_eigenvalues,
    format_rational,
    inertia,
    kernel_basis,
    rank,
    restricted_congruence,
    restricted_inertia,
    to_fraction,
)

small = st.integers(-6, 6)


@st.composite
def symmetric(draw, max_n=7):
    n = draw(st.integers(1, max_n))
    M = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            M[i][j] = M[j][i] = Fraction(draw(small), draw(st.integers(1, 3)))
    return RatMatrix(M)


@st.composite
def matrices(draw, max_n=6):
    r = draw(st.integers(1, max_n))
    c = draw(st.integers(1, max_n))
    return RatMatrix([[draw(small) for _ in range(c)] for _ in range(r)])


def test_format_and_coercion():
    assert format_rational(Fraction(6, 3)) == "2"
    assert format_rational(Fraction(-3, 6)) == "-1/2"
    assert to_fraction("7/4") == Fraction(7, 4)
    with pytest.raises(TypeError):
        to_fraction(0.5)


def test_shape_errors():
    with pytest.raises(LinalgError):
        RatMatrix([[1, 2], [3]])
    with pytest.raises(LinalgError):
        RatMatrix([[1, 2]]) @ RatMatrix([[1, 2]])


@given(matrices())
def test_rank_nullity(M):
    ker = kernel_basis(M)
    assert rank(M) + len(ker) == M.cols
    for v in ker:
        assert all(x == 0 for x in M.apply(v))


@given(symmetric())
@settings(max_examples=150)
def test_congruence_is_exact(S):
    c = congruence_diagonalize(S)
    T = RatMatrix(c.transform)
    assert T @ S @ T.T == RatMatrix.diag(c.diagonal)
    assert rank(T) == S.rows


@given(symmetric())
@settings(max_examples=150)
def test_inertia_matches_float_spectrum(S):
    ev = np.linalg.eigvalsh(S.to_float())
    tol = 1e-9 * max(1.0, np.abs(ev).max())
    expected = (int((ev > tol).sum()), int((abs(ev) <= tol).sum()), int((ev < -tol).sum()))
    assert inertia(S).as_tuple() == expected


@given(symmetric(), st.integers(0, 10**6))
@settings(max_examples=60)
def test_sylvester_invariance(S, seed):
    r = random.Random(seed)
    n = S.rows
    while True:
        T = RatMatrix([[r.randint(-3, 3) for _ in range(n)] for _ in range(n)])
        if rank(T) == n:
            break
    assert inertia(T @ S @ T.T) == inertia(S)


def test_zero_diagonal_hyperbolic_block():
    S = RatMatrix([[0, 1], [1, 0]])
    assert inertia(S) == Inertia(1, 0, 1)
    S = RatMatrix([[0, 0, 2], [0, 0, 0], [2, 0, 0]])
    assert inertia(S) == Inertia(1, 1, 1)


def test_non_symmetric_rejected():
    with pytest.raises(LinalgError):
        congruence_diagonalize(RatMatrix([[1, 2], [0, 1]]))


def test_restricted_inertia_and_witnesses():
    S = RatMatrix.diag([1, -1, 2])
    V = [[1, 0, 0], [0, 1, 0]]
    assert restricted_inertia(S, V) == Inertia(1, 0, 1)
    cong, ambient = restricted_congruence(S, V)
    for w, d in zip(ambient, cong.diagonal):
        assert S.quadratic_form(w) == d
    with pytest.raises(LinalgError):
        restricted_inertia(S, [[1, 0, 0], [2, 0, 0]])


def test_float_eigenvalues_sorted():
    ev = float_eigenvalues(RatMatrix([[2, 1], [1, 2]]))
    assert ev == pytest.approx([1.0, 3.0])


def test_dot_and_json():
    assert dot([1, 2], ["1/2", 3]) == Fraction(13, 2)
    M = RatMatrix([["1/3", 2], [2, "-5/7"]])
    assert RatMatrix.from_json(M.to_json()) == M
