"""Permutations in one-line notation, patterns and the symmetries of the square."""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Callable, Iterable, Sequence


class PermutationError(ValueError):
    """Raised for malformed permutation input."""


@dataclass(frozen=True, order=True)
class Permutation:
    """A bijection of ``[k]`` stored by its images ``(pi(1), ..., pi(k))``.

    Ordering is lexicographic on the image tuple, so sorting a list of
    equal-size permutations gives the usual lexicographic order.
    """

    image: tuple[int, ...]

    def __post_init__(self):
        image = tuple(int(v) for v in self.image)
        object.__setattr__(self, "image", image)
        if not image:
            raise PermutationError("empty permutation")
        if sorted(image) != list(range(1, len(image) + 1)):
            raise PermutationError(f"{image} is not a permutation of 1..{len(image)}")

    @classmethod
    def parse(cls, text: str) -> "Permutation":
        return parse_permutation(text)

    @property
    def size(self) -> int:
        return len(self.image)

    def __len__(self) -> int:
        return len(self.image)

    def __call__(self, i: int) -> int:
        """Image of ``i`` (1-indexed)."""
        return self.image[i - 1]

    def __str__(self) -> str:
        if self.size <= 9:
            return "".join(map(str, self.image))
        return ",".join(map(str, self.image))

    def __repr__(self) -> str:
        return f"Permutation('{self}')"

    def inverse(self) -> "Permutation":
        inv = [0] * self.size
        for i, v in enumerate(self.image, 1):
            inv[v - 1] = i
        return Permutation(tuple(inv))

    def reverse(self) -> "Permutation":
        return Permutation(self.image[::-1])

    def complement(self) -> "Permutation":
        k = self.size
        return Permutation(tuple(k + 1 - v for v in self.image))

    def to_json(self) -> list[int]:
        return list(self.image)

    @classmethod
    def from_json(cls, data: Sequence[int]) -> "Permutation":
        return cls(tuple(data))


def parse_permutation(text: str) -> Permutation:
    """Parse ``"2143"`` or ``"31,1,29,..."`` into a :class:`Permutation`.

    Concatenated digits are only accepted for sizes up to 9; anything
    larger has to be comma-separated.
    """
    text = text.strip()
    if not text:
        raise PermutationError("empty input")
    if "," in text:
        tokens = [t.strip() for t in text.split(",")]
    else:
        tokens = list(text)
    values = []
    for tok in tokens:
        if not re.fullmatch(r"\d+", tok):
            raise PermutationError(f"invalid token {tok!r}")
        values.append(int(tok))
    k = len(values)
    seen = set()
    for tok, v in zip(tokens, values):
        if not 1 <= v <= k:
            raise PermutationError(f"value {tok!r} out of range 1..{k}")
        if v in seen:
            raise PermutationError(f"duplicate value {tok!r}")
        seen.add(v)
    return Permutation(tuple(values))


def as_permutation(p: Permutation | str | Sequence[int]) -> Permutation:
    if isinstance(p, Permutation):
        return p
    if isinstance(p, str):
        return parse_permutation(p)
    return Permutation(tuple(p))


def pattern_of(values: Sequence) -> Permutation:
    """Order-isomorphism class of a sequence of distinct comparable values."""
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0] * len(values)
    for r, idx in enumerate(order, 1):
        ranks[idx] = r
    return Permutation(tuple(ranks))


def subpermutation(pi: Permutation, indices: Iterable[int]) -> Permutation:
    """Pattern induced by the (1-indexed) positions ``indices`` of ``pi``."""
    idx = sorted(set(indices))
    if not idx:
        raise PermutationError("empty index set")
    if idx[0] < 1 or idx[-1] > pi.size:
        raise PermutationError(f"index set {idx} not contained in 1..{pi.size}")
    return pattern_of([pi(i) for i in idx])


def pattern_count(sigma: Permutation, pi: Permutation) -> int:
    m = sigma.size
    if m > pi.size:
        return 0
    return sum(
        1
        for positions in itertools.combinations(range(pi.size), m)
        if pattern_of([pi.image[i] for i in positions]) == sigma
    )


def pattern_density_perm(sigma: Permutation, pi: Permutation) -> Fraction:
    """Probability that a uniform ``|sigma|``-subset of positions of ``pi`` induces ``sigma``."""
    if sigma.size > pi.size:
        return Fraction(0)
    return Fraction(pattern_count(sigma, pi), comb(pi.size, sigma.size))


def permutation_matrix(pi: Permutation) -> tuple[tuple[int, ...], ...]:
    """0/1 matrix with a one in row ``i`` and column ``pi(i)``."""
    k = pi.size
    return tuple(
        tuple(1 if pi(i) == j else 0 for j in range(1, k + 1)) for i in range(1, k + 1)
    )


def enumerate_Sk(k: int) -> list[Permutation]:
    """All ``k!`` permutations of size ``k`` in lexicographic order (``1 <= k <= 8``)."""
    if not 1 <= k <= 8:
        raise ValueError(f"k must be in 1..8, got {k}")
    return [Permutation(p) for p in itertools.permutations(range(1, k + 1))]


def _compose(*fs: Callable[[Permutation], Permutation]) -> Callable[[Permutation], Permutation]:
    def g(p: Permutation) -> Permutation:
        for f in reversed(fs):
            p = f(p)
        return p

    return g


def _identity(p: Permutation) -> Permutation:
    return p


_R = Permutation.reverse
_C = Permutation.complement
_I = Permutation.inverse

# The eight symmetries of the square acting on permutation diagrams.
SYMMETRIES: dict[str, Callable[[Permutation], Permutation]] = {
    "identity": _identity,
    "reverse": _R,
    "complement": _C,
    "rotate180": _compose(_R, _C),
    "inverse": _I,
    "rotate90": _compose(_R, _I),
    "rotate270": _compose(_I, _R),
    "antitranspose": _compose(_R, _C, _I),
}


def dihedral_images(pis: Iterable[Permutation]) -> list[frozenset[Permutation]]:
    """Images of a set of permutations under each of the eight symmetries, in ``SYMMETRIES`` order."""
    pis = frozenset(pis)
    sizes = {p.size for p in pis}
    if len(sizes) > 1:
        raise PermutationError(f"mixed permutation sizes {sorted(sizes)}")
    return [frozenset(g(p) for p in pis) for g in SYMMETRIES.values()]


def dihedral_orbit(pis: Iterable[Permutation]) -> set[frozenset[Permutation]]:
    """Distinct images of the set ``pis`` under the symmetries of the square."""
    return set(dihedral_images(pis))


def canonical_set(pis: Iterable[Permutation]) -> tuple[Permutation, ...]:
    """Lexicographically least sorted tuple in the dihedral orbit of ``pis``."""
    return min(tuple(sorted(img)) for img in dihedral_orbit(pis))
