import itertools
import random
from fractions import Fraction
from math import factorial

import pytest
from hypothesis import strategies as st

from permforce.permuton import StepPermuton, mixture_of_permutation_matrices
from permforce.perms import Permutation, enumerate_Sk, pattern_of


@st.composite
def permutations(draw, min_size=1, max_size=7):
    k = draw(st.integers(min_size, max_size))
    return Permutation(tuple(draw(st.permutations(range(1, k + 1)))))


@st.composite
def step_permutons(draw, min_k=1, max_k=4, max_terms=3):
    """Random rational mixtures of permutation matrices."""
    k = draw(st.integers(min_k, max_k))
    n = draw(st.integers(1, max_terms))
    perms = [Permutation(tuple(draw(st.permutations(range(1, k + 1))))) for _ in range(n)]
    raw = [draw(st.integers(1, 9)) for _ in range(n)]
    total = sum(raw)
    return mixture_of_permutation_matrices(perms, [Fraction(r, total) for r in raw])


def brute_density(sigma: Permutation, P: StepPermuton) -> Fraction:
    """Density from first principles: ordered cell tuples times tie-break orderings.

    Points sharing a row band (or column band) are uniformly ordered among
    themselves, so each tuple of cells contributes the fraction of tie-break
    orders that produce ``sigma``.
    """
    k, m = P.k, sigma.size
    cells = [(i, j) for i in range(k) for j in range(k) if P.A[i, j]]
    total = Fraction(0)
    for tup in itertools.product(cells, repeat=m):
        w = Fraction(1)
        for i, j in tup:
            w *= P.A[i, j] / k
        hits = 0
        count = 0
        for xs in itertools.permutations(range(m)):
            for ys in itertools.permutations(range(m)):
                # tie-break ranks: a point's coordinate is (band, tie rank)
                x = [(tup[a][0], xs[a]) for a in range(m)]
                y = [(tup[a][1], ys[a]) for a in range(m)]
                order = sorted(range(m), key=x.__getitem__)
                count += 1
                if pattern_of([y[a] for a in order]) == sigma:
                    hits += 1
        total += w * Fraction(hits, count)
    return total


@pytest.fixture
def rng():
    return random.Random(20240601)


def fd_ratios(sigma, k, v, deltas=(Fraction(1, 64), Fraction(1, 128), Fraction(1, 256))):
    """Halving ratios of the central-difference errors for the gradient and Hessian along ``v``.

    Returns two lists; an entry is ``None`` when both errors are exactly zero,
    which happens when ``h`` has too low a degree along ``v``.
    """
    from permforce.linalg import dot
    from permforce.perturbation import PerturbationPoint, h_derivatives_at_zero, h_value

    h0, g, H = h_derivatives_at_zero(sigma, k)

    def hv(d):
        return h_value(sigma, PerturbationPoint(k, [d * a for a in v]))

    ge, he = [], []
    for d in deltas:
        plus, minus = hv(d), hv(-d)
        ge.append(abs((plus - minus) / (2 * d) - dot(g, v)))
        he.append(abs((plus - 2 * h0 + minus) / d**2 - H.quadratic_form(v)))

    def ratios(err):
        return [None if err[i] == err[i + 1] == 0 else (err[i] / err[i + 1] if err[i + 1] else float("inf"))
                for i in range(len(err) - 1)]

    return ratios(ge), ratios(he)
