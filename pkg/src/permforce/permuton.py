"""Step permutons ``mu[A]``: exact pattern densities and random sampling.

For a doubly stochastic ``k x k`` matrix ``A`` the density of a pattern
``sigma`` of size ``m`` is::

    d(sigma, mu[A]) = m!/k^m * sum_{f, g : [m] -> [k] non-decreasing}
                      prod_i A[f(i), g(sigma(i))] / prod_r |f^-1(r)|! |g^-1(r)|!

Each pair ``(f, g)`` is the same thing as a sequence of cells
``(f(i), g(sigma(i)))`` whose rows are non-decreasing and whose columns
are ordered like ``sigma``.  The sparse path enumerates those cell
sequences directly over the non-zero entries of ``A``; the dense path
enumerates ``f`` and ``g`` separately and is kept as a cross-check.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial, lcm
from typing import Iterator, Sequence

import numpy as np

from .linalg import LinalgError, RatMatrix, to_fraction
from .perms import Permutation, as_permutation, permutation_matrix
from .polys import Poly


class PermutonError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class StepPermuton:
    """The permuton ``mu[A]`` of a doubly stochastic rational matrix ``A``."""

    A: RatMatrix

    def __post_init__(self):
        A = self.A
        if A.rows != A.cols:
            raise PermutonError("step permuton matrix must be square")
        k = A.rows
        if any(A[i, j] < 0 for i in range(k) for j in range(k)):
            raise PermutonError("negative entry in step permuton matrix")
        for i in range(k):
            if sum(A.row(i)) != 1:
                raise PermutonError(f"row {i + 1} does not sum to 1")
        for j in range(k):
            if sum(A[i, j] for i in range(k)) != 1:
                raise PermutonError(f"column {j + 1} does not sum to 1")

    @property
    def k(self) -> int:
        return self.A.rows

    def __eq__(self, other) -> bool:
        return isinstance(other, StepPermuton) and self.A == other.A

    @classmethod
    def uniform(cls, k: int = 1) -> "StepPermuton":
        return cls(RatMatrix([[Fraction(1, k)] * k for _ in range(k)]))

    def is_uniform(self) -> bool:
        c = Fraction(1, self.k)
        return all(self.A[i, j] == c for i in range(self.k) for j in range(self.k))

    def nonzero_columns(self) -> list[list[int]]:
        return [[j for j in range(self.k) if self.A[i, j] != 0] for i in range(self.k)]

    def to_json(self) -> dict:
        return {"k": self.k, "A": self.A.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "StepPermuton":
        P = cls(RatMatrix(data["A"]))
        if "k" in data and data["k"] != P.k:
            raise PermutonError("declared k does not match matrix size")
        return P


def mixture_of_permutation_matrices(perms: Sequence, weights: Sequence) -> StepPermuton:
    """``mu[sum_l w_l A_{pi_l}]`` for non-negative weights summing to one."""
    perms = [as_permutation(p) for p in perms]
    weights = [to_fraction(w) for w in weights]
    if len(perms) != len(weights) or not perms:
        raise PermutonError("need one weight per permutation")
    if len({p.size for p in perms}) != 1:
        raise PermutonError("mixed permutation sizes")
    if any(w < 0 for w in weights):
        raise PermutonError("negative mixture weight")
    if sum(weights) != 1:
        raise PermutonError(f"weights sum to {sum(weights)}, not 1")
    k = perms[0].size
    A = [[Fraction(0)] * k for _ in range(k)]
    for p, w in zip(perms, weights):
        for i in range(k):
            A[i][p.image[i] - 1] += w
    return StepPermuton(RatMatrix(A))


def _column_constraints(sigma: Permutation) -> list[tuple[list[int], list[int]]]:
    """For each position ``i``: earlier positions that must have columns <= / >= ours."""
    out = []
    s = sigma.image
    for i in range(len(s)):
        below = [j for j in range(i) if s[j] < s[i]]
        above = [j for j in range(i) if s[j] > s[i]]
        out.append((below, above))
    return out


def _multinomial_weight(values: Sequence[int]) -> int:
    """``m! / prod_v mult(v)!`` for a sequence of length ``m``."""
    w = factorial(len(values))
    counts: dict[int, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    for c in counts.values():
        w //= factorial(c)
    return w


def cell_sequences(sigma: Permutation, support: Sequence[Sequence[int]]) -> Iterator[tuple[tuple[tuple[int, int], ...], int]]:
    """Yield ``(cells, weight)`` for every ``(f, g)`` pair with all cells in ``support``.

    ``support[r]`` lists the allowed columns of row ``r`` (0-indexed).
    ``weight`` is the integer ``(m!)^2 / prod |f^-1|! |g^-1|!``.
    """
    m = sigma.size
    cells = [(r, c) for r in range(len(support)) for c in sorted(support[r])]
    row_start = {}
    for idx, (r, _) in enumerate(cells):
        row_start.setdefault(r, idx)
    first_at_or_after = []
    nxt = len(cells)
    for r in reversed(range(len(support))):
        nxt = row_start.get(r, nxt)
        first_at_or_after.append(nxt)
    first_at_or_after.reverse()
    constraints = _column_constraints(sigma)
    chosen: list[tuple[int, int]] = []

    def rec(i: int, start: int):
        if i == m:
            rows = [r for r, _ in chosen]
            cols = [c for _, c in chosen]
            yield tuple(chosen), _multinomial_weight(rows) * _multinomial_weight(cols)
            return
        below, above = constraints[i]
        lo = max((chosen[j][1] for j in below), default=-1)
        hi = min((chosen[j][1] for j in above), default=len(support))
        for idx in range(start, len(cells)):
            r, c = cells[idx]
            if c < lo or c > hi:
                continue
            chosen.append((r, c))
            yield from rec(i + 1, first_at_or_after[r])
            chosen.pop()

    yield from rec(0, 0)


def _integer_matrix(A: RatMatrix) -> tuple[list[list[int]], int]:
    den = 1
    for i in range(A.rows):
        for j in range(A.cols):
            den = lcm(den, A[i, j].denominator)
    return [[int(A[i, j] * den) for j in range(A.cols)] for i in range(A.rows)], den


def _density_sparse(sigma: Permutation, P: StepPermuton) -> Fraction:
    M, den = _integer_matrix(P.A)
    total = 0
    for cells, w in cell_sequences(sigma, P.nonzero_columns()):
        prod = w
        for r, c in cells:
            prod *= M[r][c]
        total += prod
    m = sigma.size
    return Fraction(total, factorial(m) * P.k**m * den**m)


def _density_dense(sigma: Permutation, P: StepPermuton) -> Fraction:
    k, m = P.k, sigma.size
    A = P.A
    total = Fraction(0)
    monotone = list(itertools.combinations_with_replacement(range(k), m))
    weights = {f: _multinomial_weight(f) for f in monotone}
    for f in monotone:
        for g in monotone:
            prod = Fraction(weights[f] * weights[g])
            for i in range(m):
                a = A[f[i], g[sigma.image[i] - 1]]
                if not a:
                    break
                prod *= a
            else:
                total += prod
    return total / (factorial(m) * k**m)


def density_in_step_permuton(sigma, P: StepPermuton, method: str = "sparse") -> Fraction:
    """Exact ``d(sigma, mu[A])``; ``method`` is ``"sparse"`` or ``"dense"``."""
    sigma = as_permutation(sigma)
    if method == "sparse":
        return _density_sparse(sigma, P)
    if method == "dense":
        return _density_dense(sigma, P)
    raise ValueError(f"unknown method {method!r}")


def mixture_density_polynomial(sigma, perms: Sequence, variables: Sequence[str] = ("x", "y", "z")) -> Poly:
    """Density of ``sigma`` in ``mu[sum_l v_l A_{pi_l}]`` as a polynomial in the weights ``v_l``.

    The result is homogeneous of degree ``|sigma|``; it agrees with the
    density only where the weights are non-negative and sum to one.
    """
    sigma = as_permutation(sigma)
    perms = [as_permutation(p) for p in perms]
    if len(perms) != len(variables):
        raise PermutonError("need one variable per permutation")
    k = perms[0].size
    if any(p.size != k for p in perms):
        raise PermutonError("mixed permutation sizes")
    # entry (r, c) as a list of variable indices with coefficient 1 each
    entry: dict[tuple[int, int], list[int]] = {}
    for l, p in enumerate(perms):
        for r in range(k):
            entry.setdefault((r, p.image[r] - 1), []).append(l)
    support = [[c for (rr, c) in entry if rr == r] for r in range(k)]
    nvars = len(variables)
    acc: dict[tuple[int, ...], int] = {}
    for cells, w in cell_sequences(sigma, support):
        for choice in itertools.product(*(entry[c] for c in cells)):
            e = [0] * nvars
            for l in choice:
                e[l] += 1
            e = tuple(e)
            acc[e] = acc.get(e, 0) + w
    m = sigma.size
    scale = Fraction(1, factorial(m) * k**m)
    return Poly(variables, {e: scale * v for e, v in acc.items()})


# -- sampling -----------------------------------------------------------------


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator seeded through ``SeedSequence(seed)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def _cell_probabilities(P: StepPermuton) -> np.ndarray:
    k = P.k
    p = np.array([float(P.A[i, j]) for i in range(k) for j in range(k)]) / k
    return p / p.sum()


def sample_points(P: StepPermuton, m: int, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """``n`` independent draws of ``m`` points from ``mu[A]``; arrays of shape ``(n, m)``."""
    k = P.k
    cells = rng.choice(k * k, size=(n, m), p=_cell_probabilities(P))
    rows, cols = np.divmod(cells, k)
    x = (rows + rng.random((n, m))) / k
    y = (cols + rng.random((n, m))) / k
    return x, y


def _has_tie(v: np.ndarray) -> np.ndarray:
    s = np.sort(v, axis=1)
    return (np.diff(s, axis=1) == 0).any(axis=1)


def sample_pattern_codes(P: StepPermuton, m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Random patterns encoded as integers ``sum_i (pattern[i]-1) * m^(m-1-i)``."""
    x, y = sample_points(P, m, n, rng)
    bad = _has_tie(x) | _has_tie(y)
    while bad.any():
        idx = np.flatnonzero(bad)
        x[idx], y[idx] = sample_points(P, m, len(idx), rng)
        bad = np.zeros(n, dtype=bool)
        bad[idx] = _has_tie(x[idx]) | _has_tie(y[idx])
    order = np.argsort(x, axis=1)
    ys = np.take_along_axis(y, order, axis=1)
    ranks = np.argsort(np.argsort(ys, axis=1), axis=1)
    powers = m ** np.arange(m - 1, -1, -1)
    return ranks @ powers


def encode_pattern(sigma: Permutation) -> int:
    m = sigma.size
    return sum((v - 1) * m ** (m - 1 - i) for i, v in enumerate(sigma.image))


def decode_pattern(code: int, m: int) -> Permutation:
    digits = []
    for _ in range(m):
        code, d = divmod(int(code), m)
        digits.append(d + 1)
    return Permutation(tuple(reversed(digits)))


def sample_random_permutation(P: StepPermuton, m: int, seed: int) -> Permutation:
    """One ``mu[A]``-random permutation of size ``m``; deterministic in ``seed``."""
    if m < 1:
        raise PermutonError("m must be positive")
    code = sample_pattern_codes(P, m, 1, make_rng(seed))[0]
    return decode_pattern(int(code), m)


def pattern_frequencies(P: StepPermuton, m: int, trials: int, seed: int, chunk: int = 1_000_000) -> dict[Permutation, int]:
    """Counts of each size-``m`` pattern over ``trials`` independent samples."""
    rng = make_rng(seed)
    counts = np.zeros(m**m, dtype=np.int64)
    remaining = trials
    while remaining:
        n = min(chunk, remaining)
        counts += np.bincount(sample_pattern_codes(P, m, n, rng), minlength=m**m)
        remaining -= n
    out = {}
    for code in np.flatnonzero(counts):
        out[decode_pattern(int(code), m)] = int(counts[code])
    return out


def mc_density_estimate(sigma, P: StepPermuton, trials: int, seed: int) -> tuple[float, float]:
    """Monte Carlo density estimate and its binomial standard error."""
    sigma = as_permutation(sigma)
    if trials < 1:
        raise PermutonError("trials must be positive")
    hits = pattern_frequencies(P, sigma.size, trials, seed).get(sigma, 0)
    p = hits / trials
    return p, float(np.sqrt(p * (1 - p) / trials))
