from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from permforce.polys import (
    Poly,
    count_real_roots,
    cubic_discriminant,
    quadratic_discriminant,
    sign_on_interval,
    univariate,
)

V = ("x", "y")
coef = st.integers(-5, 5)


@st.composite
def polys(draw):
    terms = {(draw(st.integers(0, 3)), draw(st.integers(0, 3))): draw(coef) for _ in range(draw(st.integers(0, 5)))}
    return Poly(V, terms)


point = st.tuples(st.fractions(-3, 3, max_denominator=5), st.fractions(-3, 3, max_denominator=5))


@given(polys(), polys(), point)
def test_ring_operations_evaluate_pointwise(p, q, pt):
    assert (p + q)(*pt) == p(*pt) + q(*pt)
    assert (p * q)(*pt) == p(*pt) * q(*pt)
    assert (p - q)(*pt) == p(*pt) - q(*pt)
    assert (p**2)(*pt) == p(*pt) ** 2


@given(polys(), point)
def test_substitution(p, pt):
    s, t = Poly.gens(("s", "t"))
    q = p.subs(("s", "t"), {"x": s * t, "y": 1 - s})
    a, b = pt
    assert q(a, b) == p(a * b, 1 - a)


def test_diff_and_degree():
    x, y = Poly.gens(V)
    p = 3 * x**2 * y + y - 2
    assert p.diff("x") == 6 * x * y
    assert p.degree() == 3 and p.degree_in("y") == 1
    assert p.partial_eval("y", 2) == 6 * x**2


def test_json_roundtrip_and_repr():
    x, y = Poly.gens(V)
    p = Fraction(1, 3) * x * y - 4
    assert Poly.from_json(p.to_json()) == p
    assert "x*y" in repr(p)


def test_variable_mismatch():
    with pytest.raises(ValueError):
        Poly(("x",), {}) + Poly(("y",), {})


def test_discriminants():
    # (t-1)(t-2)(t-3) has positive discriminant, t^3 + t has negative
    assert cubic_discriminant(1, -6, 11, -6) == 4
    assert cubic_discriminant(1, 0, 1, 0) < 0
    assert quadratic_discriminant(1, 0, -1) == 4


def test_sturm_counts():
    p = univariate([1, -6, 11, -6])
    assert count_real_roots(p, 0, 10) == 3
    assert count_real_roots(p, Fraction(3, 2), Fraction(5, 2)) == 1
    assert sign_on_interval(p, Fraction(11, 10), Fraction(19, 10)) == 1
    assert sign_on_interval(p, 0, 2) == 0
    assert sign_on_interval(univariate([1, 0, 1]), -5, 5) == 1
