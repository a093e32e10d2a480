import random
from fractions import Fraction

import pytest

from permforce.linalg import RatMatrix, inertia
from permforce.permuton import density_in_step_permuton
from permforce.perms import enumerate_Sk, parse_permutation, permutation_matrix
from permforce.perturbation import (
    PerturbationPoint,
    b_matrix,
    basis_index,
    basis_pair,
    grad_poly_dependence,
    gradient_polynomial,
    h_derivatives_at_zero,
    h_value,
    hessian_combination,
    paper_layout,
    perturbed_permuton,
    quadratic_form_matrix,
    z_basis,
)

from conftest import fd_ratios


def random_point(r: random.Random, k: int) -> PerturbationPoint:
    return PerturbationPoint(k, [Fraction(r.randint(-12, 12), 48) for _ in range((k - 1) ** 2)])


def test_basis_indexing_roundtrip():
    for k in (2, 3, 5):
        for t in range(1, (k - 1) ** 2 + 1):
            assert basis_index(k, *basis_pair(k, t)) == t


def test_z_basis_preserves_margins():
    Z = z_basis(4, 2, 3)
    assert all(sum(Z.row(i)) == 0 for i in range(4))
    assert all(sum(Z[i, j] for i in range(4)) == 0 for j in range(4))


def test_b_matrix_margins_and_admissibility():
    r = random.Random(1)
    p = random_point(r, 4)
    assert p.is_admissible()
    B = b_matrix(p)
    assert all(sum(B.row(i)) == 4 for i in range(4))
    assert perturbed_permuton(p).k == 4
    assert not PerturbationPoint(3, [1, 0, 0, 0]).is_admissible()
    with pytest.raises(ValueError):
        PerturbationPoint(3, [0, 0])


def test_h_vanishes_at_zero():
    for s in enumerate_Sk(3):
        assert h_value(s, PerturbationPoint.zero(3)) == 0
        assert h_derivatives_at_zero(s, 3)[0] == 0


def test_h_versus_density_identity():
    # h^k_sigma(x) = k^(2m) * (d(sigma, mu[B(x)/k]) - 1/m!)
    r = random.Random(2024)
    perms = enumerate_Sk(3) + enumerate_Sk(4)
    for _ in range(100):
        sigma = r.choice(perms)
        k = r.randint(2, 4)
        p = random_point(r, k)
        d = density_in_step_permuton(sigma, perturbed_permuton(p))
        m = sigma.size
        assert h_value(sigma, p) == k ** (2 * m) * (d - Fraction(1, len(enumerate_Sk(m))))


@pytest.mark.parametrize("k", [2, 3, 4])
def test_finite_differences_converge_at_order_two(k):
    r = random.Random(k)
    seen = 0
    for sigma in r.sample(enumerate_Sk(4), 6):
        v = [Fraction(r.randint(-5, 5), 5) for _ in range((k - 1) ** 2)]
        for ratios in fd_ratios(sigma, k, v):
            for q in ratios:
                if q is not None:
                    seen += 1
                    assert 3.5 <= q <= 4.5
    assert seen >= 6


def test_gradient_sums_to_zero_over_all_patterns():
    # sum over S_m of densities is constant, so gradients and Hessians cancel
    for k in (3, 4):
        tot = [Fraction(0)] * (k - 1) ** 2
        for s in enumerate_Sk(3):
            tot = [a + b for a, b in zip(tot, h_derivatives_at_zero(s, k)[1])]
        assert not any(tot)
        H = hessian_combination(enumerate_Sk(3), [1] * 6, k)
        assert H == RatMatrix.zeros((k - 1) ** 2, (k - 1) ** 2)


def test_quadratic_form_is_half_the_hessian():
    perms = ["1234", "2143", "3412", "4321"]
    Q = quadratic_form_matrix(perms, [1, 1, 1, 1], 4)
    H = hessian_combination(perms, [1, 1, 1, 1], 4)
    assert Q.scale(2) == H
    assert inertia(Q) == inertia(H)


def test_quadratic_form_is_second_order_taylor():
    r = random.Random(5)
    perms, coeffs, k = ["1234", "2143", "3412", "4321"], [1, 1, 1, 1], 3
    Q = quadratic_form_matrix(perms, coeffs, k)
    v = [Fraction(r.randint(-4, 4), 4) for _ in range(4)]
    d = Fraction(1, 1000)
    grad = [sum(c * g for c, g in zip(coeffs, col)) for col in zip(*(h_derivatives_at_zero(p, k)[1] for p in perms))]
    f = sum(c * h_value(p, PerturbationPoint(k, [d * a for a in v])) for p, c in zip(perms, coeffs))
    linear = d * sum(a * b for a, b in zip(grad, v))
    assert abs((f - linear) / d**2 - Q.quadratic_form(v)) < Fraction(1, 10)


def test_paper_layout():
    assert paper_layout([Fraction(6790, 3), Fraction(-1, 2), Fraction(4)]) == "6790/3 -1/2 4"


def test_gradient_polynomial_integrates_to_gradient_direction():
    # P_pi vanishes identically only for |pi| = 1; for 12 and 21 it is +-1
    assert gradient_polynomial("12") == -gradient_polynomial("21")
    with pytest.raises(ValueError):
        gradient_polynomial("1")


def test_grad_poly_dependence_on_latin_square():
    dep = grad_poly_dependence(["1234", "2143", "3412", "4321"])
    assert not dep.independent
    assert dep.combination_is_constant


def test_grad_poly_dependence_independent_sample():
    # the gradient polynomials of random quadruples of S_4 are generically independent
    r = random.Random(9)
    S4 = enumerate_Sk(4)
    independent = 0
    for _ in range(20):
        q = r.sample(S4, 4)
        dep = grad_poly_dependence(q)
        if dep.independent:
            independent += 1
        else:
            # a dependency forces a matrix combination with constant entries
            assert dep.combination_is_constant
    assert independent >= 15
