"""Checkerboard perturbations of the uniform step permuton.

``B(x) = J + sum_t x_t Z^(t)`` where ``J`` is the all-one ``k x k`` matrix and
``Z^(t) = Z^{j,j'}`` with ``t = (j-1)(k-1) + j'`` (1-indexed, row-major).
``h^k_sigma(x)`` is the rescaled deviation of ``d(sigma, mu[B(x)/k])`` from
``1/|sigma|!``::

    d(sigma, mu[B(x)/k]) = 1/m! + h^k_sigma(x) / k^(2m)

Derivatives at the origin are exact: every entry of ``B`` is ``1 + l(x)``
for a linear form ``l``, so the degree-two truncation of each product
``prod_i (1 + l_i)`` gives the gradient and Hessian directly.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Sequence

import numpy as np

from .linalg import RatMatrix, kernel_basis, to_fraction
from .permuton import StepPermuton, _multinomial_weight
from .perms import Permutation, as_permutation, permutation_matrix
from .polys import Poly


@dataclass(frozen=True)
class PerturbationPoint:
    """Coordinates ``x`` of a perturbation in the ``(k-1)^2``-dimensional Z-basis."""

    k: int
    x: tuple[Fraction, ...]

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        x = tuple(to_fraction(v) for v in self.x)
        if len(x) != (self.k - 1) ** 2:
            raise ValueError(f"expected {(self.k - 1) ** 2} coordinates, got {len(x)}")
        object.__setattr__(self, "x", x)

    @classmethod
    def zero(cls, k: int) -> "PerturbationPoint":
        return cls(k, (Fraction(0),) * (k - 1) ** 2)

    @classmethod
    def unit(cls, k: int, t: int, scale=1) -> "PerturbationPoint":
        """``scale * e_t`` with ``t`` 1-indexed."""
        x = [Fraction(0)] * (k - 1) ** 2
        x[t - 1] = to_fraction(scale)
        return cls(k, tuple(x))

    def is_zero(self) -> bool:
        return not any(self.x)

    def is_admissible(self) -> bool:
        """All coordinates in ``[-1/4, 1/4]``, so ``B(x)/k`` is doubly stochastic."""
        return all(abs(v) <= Fraction(1, 4) for v in self.x)


def basis_index(k: int, j: int, jp: int) -> int:
    """1-indexed position ``t`` of ``Z^{j,j'}`` in the coordinate vector."""
    return (j - 1) * (k - 1) + jp


def basis_pair(k: int, t: int) -> tuple[int, int]:
    j, jp = divmod(t - 1, k - 1)
    return j + 1, jp + 1


def z_basis(k: int, j: int, jp: int) -> RatMatrix:
    """``Z^{j,j'}``: +1 at ``(j,j')``, ``(j+1,j'+1)``; -1 at ``(j+1,j')``, ``(j,j'+1)``."""
    if not (1 <= j <= k - 1 and 1 <= jp <= k - 1):
        raise ValueError(f"indices ({j}, {jp}) out of range for k={k}")
    Z = [[0] * k for _ in range(k)]
    Z[j - 1][jp - 1] = 1
    Z[j][jp] = 1
    Z[j][jp - 1] = -1
    Z[j - 1][jp] = -1
    return RatMatrix(Z)


@lru_cache(maxsize=None)
def _entry_forms(k: int) -> tuple[tuple[tuple[tuple[int, int], ...], ...], ...]:
    """``forms[a][b]`` = sparse linear form ``((t0, coeff), ...)`` of ``B[a][b] - 1`` (``t0`` 0-indexed)."""
    forms = [[[] for _ in range(k)] for _ in range(k)]
    for j in range(1, k):
        for jp in range(1, k):
            t0 = basis_index(k, j, jp) - 1
            forms[j - 1][jp - 1].append((t0, 1))
            forms[j][jp].append((t0, 1))
            forms[j][jp - 1].append((t0, -1))
            forms[j - 1][jp].append((t0, -1))
    return tuple(tuple(tuple(f) for f in row) for row in forms)


def b_matrix(p: PerturbationPoint) -> RatMatrix:
    """``B(x)``; rows and columns sum to ``k``."""
    k = p.k
    forms = _entry_forms(k)
    return RatMatrix(
        [[1 + sum((c * p.x[t] for t, c in forms[a][b]), Fraction(0)) for b in range(k)] for a in range(k)]
    )


def perturbed_permuton(p: PerturbationPoint) -> StepPermuton:
    """``mu[B(x)/k]``; raises if some entry is negative."""
    return StepPermuton(b_matrix(p).scale(Fraction(1, p.k)))


@lru_cache(maxsize=None)
def _monotone_maps(m: int, k: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    return tuple(
        (f, _multinomial_weight(f)) for f in itertools.combinations_with_replacement(range(k), m)
    )


def h_value(sigma, p: PerturbationPoint) -> Fraction:
    """``h^k_sigma(x)`` from its defining sum over pairs of monotone maps."""
    sigma = as_permutation(sigma)
    k, m = p.k, sigma.size
    B = b_matrix(p)
    Bl = B.tolist()
    maps = _monotone_maps(m, k)
    total = Fraction(0)
    for f, wf in maps:
        for g, wg in maps:
            prod = Fraction(wf * wg)
            for i in range(m):
                prod *= Bl[f[i]][g[sigma.image[i] - 1]]
            total += prod
    return (total - k ** (2 * m)) / factorial(m)


@lru_cache(maxsize=None)
def _cell_moments(sigma: Permutation, k: int) -> tuple[int, np.ndarray, np.ndarray]:
    """Weighted counts over all ``(f, g)`` pairs of single cells and ordered pairs of cells.

    Returns ``(total, first, second)`` with ``first[a]`` the weighted number
    of factors sitting in cell ``a`` and ``second[a, b]`` the weighted number
    of ordered pairs of distinct factors in cells ``(a, b)``; cells are
    flattened as ``row * k + col``.
    """
    m = sigma.size
    maps = _monotone_maps(m, k)
    first = np.zeros(k * k, dtype=object)
    second = np.zeros((k * k, k * k), dtype=object)
    first[:] = 0
    second[:, :] = 0
    total = 0
    # Accumulate in plain dicts; object arrays are slow to index.
    f1: dict[int, int] = {}
    f2: dict[tuple[int, int], int] = {}
    for f, wf in maps:
        for g, wg in maps:
            w = wf * wg
            total += w
            cells = [f[i] * k + g[sigma.image[i] - 1] for i in range(m)]
            for a in cells:
                f1[a] = f1.get(a, 0) + w
            for i, a in enumerate(cells):
                for j, b in enumerate(cells):
                    if i != j:
                        f2[(a, b)] = f2.get((a, b), 0) + w
    for a, v in f1.items():
        first[a] = v
    for (a, b), v in f2.items():
        second[a, b] = v
    return total, first, second


def _form_matrix(k: int) -> np.ndarray:
    """``L[a, t]`` = coefficient of ``x_t`` in ``B[a] - 1`` (flattened cells)."""
    n = (k - 1) ** 2
    L = np.zeros((k * k, n), dtype=object)
    L[:, :] = 0
    for a, row in enumerate(_entry_forms(k)):
        for b, form in enumerate(row):
            for t, c in form:
                L[a * k + b, t] = c
    return L


def h_derivatives_at_zero(sigma, k: int) -> tuple[Fraction, list[Fraction], RatMatrix]:
    """``(h(0), grad h(0), Hess h(0))`` for ``h = h^k_sigma``, all exact."""
    sigma = as_permutation(sigma)
    if k < 2:
        raise ValueError("k must be at least 2")
    m = sigma.size
    total, first, second = _cell_moments(sigma, k)
    L = _form_matrix(k)
    mf = factorial(m)
    value = Fraction(total - k ** (2 * m), mf)
    grad = [Fraction(int(v), mf) for v in first.dot(L)]
    H = L.T.dot(second).dot(L)
    hess = RatMatrix([[Fraction(int(v), mf) for v in row] for row in H])
    return value, grad, hess


def h_gradient_at_zero(sigma, k: int) -> list[Fraction]:
    return h_derivatives_at_zero(sigma, k)[1]


def h_hessian_at_zero(sigma, k: int) -> RatMatrix:
    return h_derivatives_at_zero(sigma, k)[2]


def hessian_combination(perms: Sequence, coeffs: Sequence, k: int) -> RatMatrix:
    """``sum_i coeffs[i] * H^k_{perms[i]}(0)``."""
    out = None
    for p, c in zip(perms, coeffs):
        term = h_hessian_at_zero(p, k).scale(c)
        out = term if out is None else out + term
    return out


def paper_layout(vector: Sequence[Fraction]) -> str:
    """Space-separated ``p/q`` entries in coordinate order ``t = 1..(k-1)^2``."""
    from .linalg import format_rational

    return " ".join(format_rational(v) for v in vector)


# -- gradient polynomials -------------------------------------------------------


def _bernstein_derivative_factor(var: str, k: int, m: int) -> Poly:
    """``((k-m)/(1-a) - (m-1)/a) * a^(m-1) (1-a)^(k-m)`` as a polynomial in ``a``."""
    (a,) = Poly.gens((var,))
    one = Poly.constant((var,), 1)
    out = Poly((var,))
    if k - m > 0:
        out = out + (k - m) * a ** (m - 1) * (one - a) ** (k - m - 1)
    if m - 1 > 0:
        out = out - (m - 1) * a ** (m - 2) * (one - a) ** (k - m)
    return out


def _widen(p: Poly, variables: tuple[str, ...]) -> Poly:
    idx = variables.index(p.vars[0])
    out = {}
    for (e,), c in p.as_dict().items():
        ex = [0] * len(variables)
        ex[idx] = e
        out[tuple(ex)] = c
    return Poly(variables, out)


def gradient_polynomial(pi) -> Poly:
    """First-order density response ``P_pi(alpha, beta)`` to an infinitesimal checkerboard bump."""
    pi = as_permutation(pi)
    k = pi.size
    if k < 2:
        raise ValueError("gradient polynomial needs |pi| >= 2")
    variables = ("alpha", "beta")
    total = Poly(variables)
    for m in range(1, k + 1):
        v = pi(m)
        fa = _widen(_bernstein_derivative_factor("alpha", k, m), variables)
        fb = _widen(_bernstein_derivative_factor("beta", k, v), variables)
        denom = factorial(m - 1) * factorial(k - m) * factorial(v - 1) * factorial(k - v)
        total = total + fa * fb * Fraction(factorial(k), denom)
    return total


@dataclass(frozen=True)
class GradPolyDependence:
    independent: bool
    coefficients: tuple[Fraction, ...] | None = None
    combination: RatMatrix | None = None
    combination_is_constant: bool | None = None


def _primitive(v: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Scale to coprime integers with the first non-zero entry positive."""
    from math import gcd, lcm

    den = 1
    for x in v:
        den = lcm(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    lead = next(x for x in ints if x)
    sign = 1 if lead > 0 else -1
    return tuple(Fraction(sign * x // g) for x in ints)


def grad_poly_dependence(perms: Sequence) -> GradPolyDependence:
    """Exact linear (in)dependence of the gradient polynomials of equal-size permutations."""
    perms = [as_permutation(p) for p in perms]
    if len({p.size for p in perms}) != 1:
        raise ValueError("mixed permutation sizes")
    polys = [gradient_polynomial(p) for p in perms]
    monomials = sorted({e for P in polys for e in P.as_dict()})
    # columns = permutations, rows = monomials; a kernel vector is a vanishing combination
    M = RatMatrix([[P.coeff(e) for P in polys] for e in monomials])
    ker = kernel_basis(M)
    if not ker:
        return GradPolyDependence(independent=True)
    t = _primitive(ker[0])
    k = perms[0].size
    comb = RatMatrix.zeros(k, k)
    for c, p in zip(t, perms):
        comb = comb + RatMatrix(permutation_matrix(p)).scale(c)
    first = comb[0, 0]
    constant = all(comb[i, j] == first for i in range(k) for j in range(k))
    return GradPolyDependence(False, t, comb, constant)


def quadratic_form_matrix(perms: Sequence, coeffs: Sequence, k: int) -> RatMatrix:
    """Second-order Taylor matrix ``Q = (1/2) sum_i coeffs[i] H_i`` of the combination.

    ``sum_i coeffs[i] h_i(x) = g.x + x^T Q x + O(|x|^3)``.  Inertia is that of the
    Hessian combination; this scaling is the one in which the tabulated
    combination matrices are written.
    """
    return hessian_combination(perms, coeffs, k).scale(Fraction(1, 2))
