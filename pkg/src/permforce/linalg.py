"""Exact dense linear algebra over the rationals.

Scalars are :class:`fractions.Fraction`.  Matrices are small (at most a few
dozen rows), so everything is plain Gaussian elimination on lists.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Vector = list  # list[Fraction]


class LinalgError(ValueError):
    pass


def to_fraction(v) -> Fraction:
    """Coerce ints, "p/q" strings, decimal strings and Fractions to Fraction."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        raise TypeError("refusing to convert a float to an exact rational")
    return Fraction(v)


def format_rational(q: Fraction) -> str:
    """``"p/q"``, or ``"p"`` when the denominator is one."""
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class RatMatrix:
    """Dense matrix of Fractions, stored row-major.

    Instances are treated as immutable; the arithmetic helpers always
    return new matrices.
    """

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, data: Iterable[Iterable]):
        rows = [[to_fraction(x) for x in row] for row in data]
        if not rows or not rows[0]:
            raise LinalgError("matrix must have at least one row and one column")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise LinalgError("ragged matrix rows")
        self.rows = len(rows)
        self.cols = width
        self._data = rows

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls([[0] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def diag(cls, values: Sequence) -> "RatMatrix":
        n = len(values)
        return cls([[values[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence]) -> "RatMatrix":
        return cls([list(r) for r in zip(*columns)])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self._data[i][j]

    def row(self, i: int) -> list[Fraction]:
        return list(self._data[i])

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self._data]

    def transpose(self) -> "RatMatrix":
        return RatMatrix(zip(*self._data))

    T = property(transpose)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatMatrix):
            return NotImplemented
        return self._data == other._data

    def __hash__(self):
        return hash(tuple(map(tuple, self._data)))

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        _same_shape(self, other)
        return RatMatrix(
            [a + b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)
        )

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        _same_shape(self, other)
        return RatMatrix(
            [a - b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)
        )

    def __neg__(self) -> "RatMatrix":
        return RatMatrix([-a for a in r] for r in self._data)

    def scale(self, c) -> "RatMatrix":
        c = to_fraction(c)
        return RatMatrix([c * a for a in r] for r in self._data)

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise LinalgError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = list(zip(*other._data))
        return RatMatrix(
            [sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in cols] for r in self._data
        )

    def apply(self, v: Sequence) -> list[Fraction]:
        """Matrix-vector product."""
        if len(v) != self.cols:
            raise LinalgError("vector length does not match column count")
        return [sum((a * to_fraction(b) for a, b in zip(r, v)), Fraction(0)) for r in self._data]

    def quadratic_form(self, v: Sequence) -> Fraction:
        v = [to_fraction(x) for x in v]
        return sum((a * b for a, b in zip(v, self.apply(v))), Fraction(0))

    def is_symmetric(self) -> bool:
        return self.rows == self.cols and all(
            self._data[i][j] == self._data[j][i]
            for i in range(self.rows)
            for j in range(i + 1, self.cols)
        )

    def to_float(self) -> np.ndarray:
        return np.array([[float(a) for a in r] for r in self._data])

    def to_json(self) -> list[list[str]]:
        return [[format_rational(a) for a in r] for r in self._data]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[str]]) -> "RatMatrix":
        return cls(data)

    def __repr__(self) -> str:
        return f"RatMatrix({self.to_json()})"


def _same_shape(a: RatMatrix, b: RatMatrix) -> None:
    if a.shape != b.shape:
        raise LinalgError(f"shape mismatch {a.shape} vs {b.shape}")


def dot(u: Sequence, v: Sequence) -> Fraction:
    return sum((to_fraction(a) * to_fraction(b) for a, b in zip(u, v)), Fraction(0))


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns (rows are copied)."""
    m = [list(r) for r in rows]
    n_rows = len(m)
    n_cols = len(m[0]) if m else 0
    pivots = []
    r = 0
    for c in range(n_cols):
        p = next((i for i in range(r, n_rows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [a * inv for a in m[r]]
        for i in range(n_rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    return m, pivots


def rank(M: RatMatrix) -> int:
    return len(_rref(M.tolist())[1])


def kernel_basis(M: RatMatrix) -> list[list[Fraction]]:
    """Basis of ``{v : M v = 0}``; one vector per free column of the RREF."""
    reduced, pivots = _rref(M.tolist())
    free = [c for c in range(M.cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * M.cols
        v[f] = Fraction(1)
        for row, pc in zip(reduced, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def orth_complement_basis(rows: RatMatrix) -> list[list[Fraction]]:
    """Basis of the vectors orthogonal to every row of ``rows``."""
    return kernel_basis(rows)


@dataclass(frozen=True)
class Inertia:
    n_pos: int
    n_zero: int
    n_neg: int

    @property
    def dim(self) -> int:
        return self.n_pos + self.n_zero + self.n_neg

    def as_tuple(self) -> tuple[int, int, int]:
        return self.n_pos, self.n_zero, self.n_neg

    def to_json(self) -> dict:
        return {"n_pos": self.n_pos, "n_zero": self.n_zero, "n_neg": self.n_neg}


@dataclass(frozen=True)
class Congruence:
    """``T S T^T = diag(d)`` with ``T`` invertible.

    Row ``i`` of ``T`` is a vector ``w`` with ``w^T S w = d[i]``, and distinct
    rows are ``S``-orthogonal.
    """

    transform: list[list[Fraction]]
    diagonal: list[Fraction]

    @property
    def inertia(self) -> Inertia:
        pos = sum(1 for d in self.diagonal if d > 0)
        neg = sum(1 for d in self.diagonal if d < 0)
        return Inertia(pos, len(self.diagonal) - pos - neg, neg)

    def vector_with_sign(self, sign: int) -> list[Fraction] | None:
        """A vector whose quadratic value has the requested sign, if any."""
        for w, d in zip(self.transform, self.diagonal):
            if (d > 0 and sign > 0) or (d < 0 and sign < 0):
                return list(w)
        return None


def congruence_diagonalize(S: RatMatrix) -> Congruence:
    """Diagonalize a symmetric matrix by simultaneous row/column operations.

    The pivot is the non-zero diagonal entry of largest absolute value.
    When the remaining diagonal is all zero but some off-diagonal entry
    ``b`` is not, adding row/column ``j`` to row/column ``i`` makes the
    ``(i, i)`` entry ``2b``; the pair then contributes one positive and one
    negative square, as a hyperbolic 2x2 block would.
    """
    if not S.is_symmetric():
        raise LinalgError("matrix is not symmetric")
    n = S.rows
    A = S.tolist()
    T = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    active = list(range(n))
    diagonal: list[Fraction] = []
    order: list[int] = []
    while active:
        piv = max(active, key=lambda i: abs(A[i][i]))
        if A[piv][piv] == 0:
            pair = next(
                ((i, j) for i in active for j in active if i != j and A[i][j] != 0), None
            )
            if pair is None:
                for i in active:
                    diagonal.append(Fraction(0))
                    order.append(i)
                break
            i, j = pair
            # row/col i += row/col j
            for c in range(n):
                A[i][c] += A[j][c]
            for r in range(n):
                A[r][i] += A[r][j]
            T[i] = [a + b for a, b in zip(T[i], T[j])]
            piv = i
        p = A[piv][piv]
        active.remove(piv)
        for r in active:
            f = A[r][piv] / p
            if f == 0:
                continue
            row_p = A[piv]
            A[r] = [a - f * b for a, b in zip(A[r], row_p)]
            T[r] = [a - f * b for a, b in zip(T[r], T[piv])]
        # The matching column operations would only clear row ``piv``; the
        # active block already holds the Schur complement.
        diagonal.append(p)
        order.append(piv)
    return Congruence([T[i] for i in order], diagonal)


def inertia(S: RatMatrix) -> Inertia:
    """Exact ``(n_pos, n_zero, n_neg)`` of a symmetric rational matrix."""
    return congruence_diagonalize(S).inertia


def _restrict(S: RatMatrix, V: Sequence[Sequence]) -> RatMatrix:
    if not V:
        raise LinalgError("empty subspace basis")
    basis = RatMatrix.from_columns(V)
    if rank(basis) != len(V):
        raise LinalgError("subspace basis vectors are linearly dependent")
    return basis.T @ S @ basis


def restricted_inertia(S: RatMatrix, V: Sequence[Sequence]) -> Inertia:
    """Inertia of ``V^T S V`` for a linearly independent list of vectors ``V``."""
    return inertia(_restrict(S, V))


def restricted_congruence(S: RatMatrix, V: Sequence[Sequence]) -> tuple[Congruence, list[list[Fraction]]]:
    """Congruence of ``V^T S V`` together with its rows mapped back to ambient coordinates."""
    cong = congruence_diagonalize(_restrict(S, V))
    ambient = [
        [sum((c * to_fraction(v[i]) for c, v in zip(w, V)), Fraction(0)) for i in range(len(V[0]))]
        for w in cong.transform
    ]
    return cong, ambient


def float_eigenvalues(S: RatMatrix) -> list[float]:
    """Ascending double-precision spectrum (LAPACK ``syevd`` through numpy)."""
    if not S.is_symmetric():
        raise LinalgError("matrix is not symmetric")
    return [float(x) for x in np.linalg.eigvalsh(S.to_float())]
