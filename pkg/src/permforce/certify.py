"""Quadruples of 4-point permutations with dependent density gradients.

Four permutation matrices either sum to the all-one matrix, admit a signed
combination ``A1 + A2 - A3 - A4 = 0``, or neither.  In the first two cases the
gradients of ``h^n_pi`` at the uniform permuton are linearly dependent and
non-forcing is certified from second-order information: the quadratic form
``Q = (1/2) sum_i alpha_i H_i`` either has at least four positive and four
negative squares, or is indefinite on the common kernel of the gradients.
"""
from __future__ import annotations

import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from math import lcm
from typing import Sequence

from .linalg import (
    Inertia,
    RatMatrix,
    dot,
    float_eigenvalues,
    format_rational,
    inertia,
    kernel_basis,
    orth_complement_basis,
    rank,
    restricted_congruence,
    to_fraction,
)
from .permuton import StepPermuton
from .perms import (
    SYMMETRIES,
    Permutation,
    as_permutation,
    canonical_set,
    enumerate_Sk,
    permutation_matrix,
)
from .perturbation import (
    PerturbationPoint,
    _primitive,
    h_gradient_at_zero,
    h_value,
    perturbed_permuton,
    quadratic_form_matrix,
)
from .report import Section

ALL_ONE = "AllOne"
ZERO_COMBO = "ZeroCombo"
INDEPENDENT = "Independent"

COROLLARY = "CorollaryApplies"
KERNEL_RESTRICTED = "KernelRestrictedApplies"
INCONCLUSIVE = "Inconclusive"

SIGN_PATTERNS = {"++++": (1, 1, 1, 1), "++--": (1, 1, -1, -1)}


class CertificateError(ValueError):
    pass


class WitnessError(ValueError):
    """Raised when a proposed perturbation is not a zero of every ``h``."""

    def __init__(self, message: str, index: int | None = None, value: Fraction | None = None):
        super().__init__(message)
        self.index = index
        self.value = value


def workers() -> int:
    """Worker count for fan-out stages, from ``PERMFORCE_WORKERS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("PERMFORCE_WORKERS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    items = list(items)
    n = workers()
    if n <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# -- data files -------------------------------------------------------------------


def load_data(name: str) -> dict:
    with resources.files("permforce.data").joinpath(name).open() as fh:
        return json.load(fh)


@lru_cache(maxsize=None)
def _classes() -> dict:
    return load_data("classes.json")


def listed_allone_quadruples() -> list[tuple[Permutation, ...]]:
    return [tuple(map(as_permutation, q)) for q in _classes()["all_one"]]


def listed_zerocombo_quadruples() -> list[tuple[Permutation, ...]]:
    return [tuple(map(as_permutation, q)) for q in _classes()["zero_combination"]]


def default_grid_size(q: Sequence) -> int | None:
    """Grid size used for a listed quadruple, or ``None`` if it is handled differently.

    Two all-one classes are the exceptional ones with positive semidefinite
    or one-positive-direction forms; they get ``None``.  Unlisted quadruples
    fall back to 5.
    """
    target = frozenset(map(as_permutation, q))
    data = _classes()
    for group in ("all_one", "zero_combination"):
        for quad, n in zip(data[group], data["grid_size"][group]):
            if frozenset(map(as_permutation, quad)) == target:
                return n
    return 5


# -- classification -----------------------------------------------------------------


@dataclass(frozen=True)
class QuadrupleClass:
    tag: str
    plus: tuple[Permutation, ...] = ()
    minus: tuple[Permutation, ...] = ()

    @property
    def witness(self) -> tuple[int, int, int, int] | None:
        return (1, 1, -1, -1) if self.tag == ZERO_COMBO else None

    def to_json(self) -> dict:
        out = {"tag": self.tag}
        if self.tag == ZERO_COMBO:
            out["plus"] = [str(p) for p in self.plus]
            out["minus"] = [str(p) for p in self.minus]
        return out


def _check_quadruple(q: Sequence) -> tuple[Permutation, ...]:
    perms = tuple(as_permutation(p) for p in q)
    if len(perms) != 4:
        raise ValueError(f"expected 4 permutations, got {len(perms)}")
    bad = [str(p) for p in perms if p.size != 4]
    if bad:
        raise ValueError(f"permutations must have size 4: {', '.join(bad)}")
    if len(set(perms)) != 4:
        raise ValueError("permutations must be distinct")
    return perms


def _matrix_sum(perms: Sequence[Permutation], coeffs: Sequence[int]) -> list[list[int]]:
    out = [[0] * 4 for _ in range(4)]
    for p, c in zip(perms, coeffs):
        for i, row in enumerate(permutation_matrix(p)):
            for j, v in enumerate(row):
                out[i][j] += c * v
    return out


def classify_quadruple(q: Sequence) -> QuadrupleClass:
    """AllOne, ZeroCombo (with its pairing) or Independent, by exact matrix sums."""
    perms = _check_quadruple(q)
    if all(v == 1 for row in _matrix_sum(perms, (1, 1, 1, 1)) for v in row):
        return QuadrupleClass(ALL_ONE)
    for a, b in ((0, 1), (0, 2), (0, 3)):
        rest = [i for i in range(4) if i not in (a, b)]
        coeffs = [0] * 4
        for i in (a, b):
            coeffs[i] = 1
        for i in rest:
            coeffs[i] = -1
        if all(v == 0 for row in _matrix_sum(perms, coeffs) for v in row):
            plus = tuple(sorted((perms[a], perms[b])))
            minus = tuple(sorted(perms[i] for i in rest))
            if minus < plus:
                plus, minus = minus, plus
            return QuadrupleClass(ZERO_COMBO, plus, minus)
    return QuadrupleClass(INDEPENDENT)


# -- enumeration ------------------------------------------------------------------------


def latin_squares(order: int = 4) -> list[tuple[tuple[int, ...], ...]]:
    """All Latin squares with symbols ``1..order``, rows built as permutations."""
    rows = list(itertools.permutations(range(1, order + 1)))
    out = []

    def extend(square):
        if len(square) == order:
            out.append(tuple(square))
            return
        for r in rows:
            if all(r[c] != s[c] for s in square for c in range(order)):
                extend(square + [r])

    extend([])
    return out


def _decomposition(square) -> frozenset[Permutation]:
    """Permutations ``pi_s`` with ``pi_s(i)`` = column of symbol ``s`` in row ``i``."""
    n = len(square)
    return frozenset(
        Permutation(tuple(row.index(s) + 1 for row in square)) for s in range(1, n + 1)
    )


@dataclass(frozen=True)
class AllOneEnumeration:
    latin_squares: int
    quadruples: int
    classes: tuple[tuple[Permutation, ...], ...]

    def to_json(self) -> dict:
        return {
            "latin_squares": self.latin_squares,
            "quadruples": self.quadruples,
            "classes": [[str(p) for p in q] for q in self.classes],
        }


def enumerate_allone_quadruples() -> AllOneEnumeration:
    squares = latin_squares(4)
    quads = {_decomposition(s) for s in squares}
    classes = sorted({canonical_set(q) for q in quads})
    return AllOneEnumeration(len(squares), len(quads), tuple(classes))


def _zero_key(plus: Sequence[Permutation], minus: Sequence[Permutation]) -> tuple[Permutation, ...]:
    a, b = tuple(sorted(plus)), tuple(sorted(minus))
    return min(a + b, b + a)


def canonical_zero_combo(plus: Sequence, minus: Sequence) -> tuple[Permutation, ...]:
    """Least ``(plus pair, minus pair)`` over the dihedral orbit and the global sign flip."""
    plus = [as_permutation(p) for p in plus]
    minus = [as_permutation(p) for p in minus]
    return min(
        _zero_key([g(p) for p in plus], [g(p) for p in minus]) for g in SYMMETRIES.values()
    )


def enumerate_zerocombo_quadruples() -> tuple[tuple[Permutation, ...], ...]:
    """Canonical ``(p1, p2, m1, m2)`` with ``A_p1 + A_p2 = A_m1 + A_m2``, one per class."""
    S4 = enumerate_Sk(4)
    sums: dict[tuple, list[tuple[Permutation, Permutation]]] = {}
    for a, b in itertools.combinations(S4, 2):
        key = tuple(map(tuple, _matrix_sum((a, b), (1, 1))))
        sums.setdefault(key, []).append((a, b))
    classes = set()
    for pairs in sums.values():
        for (p, q) in itertools.combinations(pairs, 2):
            if set(p) & set(q):
                continue
            classes.add(canonical_zero_combo(p, q))
    return tuple(sorted(classes))


def trichotomy_scan() -> dict[str, int]:
    """Class tag counts over all ``C(24, 4)`` sets of distinct 4-point permutations."""
    counts = {ALL_ONE: 0, ZERO_COMBO: 0, INDEPENDENT: 0}
    for q in itertools.combinations(enumerate_Sk(4), 4):
        counts[classify_quadruple(q).tag] += 1
    return counts


# -- certificates ---------------------------------------------------------------------


def _integral(v: Sequence[Fraction]) -> list[Fraction]:
    if not any(v):
        return list(v)
    return list(_primitive(list(v)))


@dataclass(frozen=True)
class WitnessVector:
    vector: tuple[Fraction, ...]
    value: Fraction

    def to_json(self) -> dict:
        return {"vector": [format_rational(x) for x in self.vector], "value": format_rational(self.value)}


@dataclass(frozen=True)
class NonForcingEvidence:
    """Exact second-order certificate for a quadruple with dependent gradients.

    ``ordering`` lists the quadruple indices so that the first three
    gradients in that order are linearly independent.
    """

    quadruple: tuple[Permutation, ...]
    n: int
    gradients: tuple[tuple[Fraction, ...], ...]
    rank3_ok: bool
    ordering: tuple[int, ...]
    alpha: tuple[Fraction, ...]
    hessian_combo: RatMatrix
    full_inertia: Inertia
    restricted_inertia: Inertia | None
    verdict: str
    w_plus: WitnessVector | None = None
    w_minus: WitnessVector | None = None

    def to_json(self) -> dict:
        return {
            "quadruple": [str(p) for p in self.quadruple],
            "n": self.n,
            "gradients": [[format_rational(x) for x in g] for g in self.gradients],
            "rank3_ok": self.rank3_ok,
            "ordering": list(self.ordering),
            "alpha": [format_rational(a) for a in self.alpha],
            "hessian_combo": self.hessian_combo.to_json(),
            "full_inertia": self.full_inertia.to_json(),
            "restricted_inertia": None if self.restricted_inertia is None else self.restricted_inertia.to_json(),
            "verdict": self.verdict,
            "w_plus": None if self.w_plus is None else self.w_plus.to_json(),
            "w_minus": None if self.w_minus is None else self.w_minus.to_json(),
        }

    def summary(self) -> str:
        quad = ",".join(str(p) for p in self.quadruple)
        alpha = ",".join(format_rational(a) for a in self.alpha)
        fi = self.full_inertia.as_tuple()
        line = f"{quad} n={self.n} alpha=({alpha}) full inertia {fi}"
        if self.restricted_inertia is not None:
            line += f" restricted {self.restricted_inertia.as_tuple()}"
        return f"{line} -> {self.verdict}"


def _independent_triple(grads: Sequence[Sequence[Fraction]]) -> tuple[int, ...] | None:
    for trip in itertools.combinations(range(4), 3):
        if rank(RatMatrix([grads[i] for i in trip])) == 3:
            rest = [i for i in range(4) if i not in trip]
            return trip + tuple(rest)
    return None


def certify_non_forcing(q: Sequence, n: int | None = None, signs=None) -> NonForcingEvidence:
    """Second-order non-forcing certificate on the ``n x n`` grid.

    Parameters
    ----------
    q : sequence of 4 permutations
    n : int, optional
        Grid size; defaults to the tabulated size for listed quadruples.
    signs : {"++++", "++--"} or sequence of 4 rationals, optional
        Kernel coefficients ``alpha``.  When omitted, ``alpha`` is the
        primitive integer vector spanning the left kernel of the gradients.

    Raises
    ------
    CertificateError
        If the gradients are independent, ``alpha`` is not in their kernel,
        or ``(n-1)^2 < 6``.
    """
    perms = _check_quadruple(q)
    if n is None:
        n = default_grid_size(perms) or 5
    if (n - 1) ** 2 < 6:
        raise CertificateError(f"grid size n={n} too small: need (n-1)^2 >= 6")
    grads = [tuple(h_gradient_at_zero(p, n)) for p in perms]
    G = RatMatrix(grads)
    if rank(G) == 4:
        raise CertificateError("gradients independent; use the gradient-polynomial route instead")
    ordering = _independent_triple(grads)
    if ordering is None:
        raise CertificateError("no three of the gradients are linearly independent")
    rank3_ok = ordering[:3] == (0, 1, 2)

    if signs is None:
        alpha = tuple(_primitive(kernel_basis(G.T)[0]))
    else:
        if isinstance(signs, str):
            if signs not in SIGN_PATTERNS:
                raise CertificateError(f"unknown sign pattern {signs!r}")
            signs = SIGN_PATTERNS[signs]
        alpha = tuple(to_fraction(a) for a in signs)
        if len(alpha) != 4 or not any(alpha):
            raise CertificateError("alpha must be 4 coefficients, not all zero")
    residual = [sum((a * g[t] for a, g in zip(alpha, grads)), Fraction(0)) for t in range(len(grads[0]))]
    if any(residual):
        raise CertificateError("sum of alpha_i * gradient_i is not zero")

    Q = quadratic_form_matrix(perms, alpha, n)
    full = inertia(Q)
    restricted = None
    w_plus = w_minus = None
    if full.n_pos >= 4 and full.n_neg >= 4:
        verdict = COROLLARY
    else:
        basis = orth_complement_basis(RatMatrix([grads[i] for i in ordering[:3]]))
        cong, ambient = restricted_congruence(Q, basis)
        restricted = cong.inertia
        if restricted.n_pos and restricted.n_neg:
            verdict = KERNEL_RESTRICTED
            for w, d in zip(ambient, cong.diagonal):
                if d > 0 and w_plus is None:
                    v = _integral(w)
                    w_plus = WitnessVector(tuple(v), Q.quadratic_form(v))
                elif d < 0 and w_minus is None:
                    v = _integral(w)
                    w_minus = WitnessVector(tuple(v), Q.quadratic_form(v))
        else:
            verdict = INCONCLUSIVE
    evidence = NonForcingEvidence(
        perms, n, tuple(grads), rank3_ok, ordering, alpha, Q, full, restricted, verdict, w_plus, w_minus
    )
    problems = check_evidence(evidence.to_json(), recompute_inertia=False)
    if problems:
        raise CertificateError("internal evidence check failed: " + "; ".join(problems))
    return evidence


def auto_certify(q: Sequence, signs=None, sizes: Sequence[int] = (4, 5, 6, 7)) -> NonForcingEvidence:
    """First non-Inconclusive certificate over the given grid sizes (last one otherwise)."""
    ev = None
    for n in sizes:
        ev = certify_non_forcing(q, n, signs)
        if ev.verdict != INCONCLUSIVE:
            return ev
    return ev


# -- independent evidence checker ---------------------------------------------------


def _charpoly_integer(M: list[list[int]]) -> list[int]:
    """Characteristic polynomial coefficients ``[1, c1, ..., cn]`` (Faddeev-LeVerrier)."""
    n = len(M)
    coeffs = [1]
    Mk = [[0] * n for _ in range(n)]
    c = 1
    for k in range(1, n + 1):
        # Mk = M * M_{k-1} + c_{k-1} I
        for i in range(n):
            Mk[i][i] += c
        AM = [[sum(M[i][l] * Mk[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        tr = sum(AM[i][i] for i in range(n))
        c, r = divmod(-tr, k)
        assert r == 0
        coeffs.append(c)
        Mk = AM
    return coeffs


def inertia_by_charpoly(S: RatMatrix) -> Inertia:
    """Inertia via Descartes' rule on the characteristic polynomial.

    All roots of a symmetric matrix's characteristic polynomial are real,
    so sign changes count positive roots exactly.  This shares no code with
    the congruence route.
    """
    den = 1
    for row in S.tolist():
        for v in row:
            den = lcm(den, v.denominator)
    M = [[int(v * den) for v in row] for row in S.tolist()]
    p = _charpoly_integer(M)  # p[i] multiplies x^(n-i)
    n = len(M)
    zero = 0
    while zero < n and p[n - zero] == 0:
        zero += 1

    def changes(seq):
        seq = [s for s in seq if s]
        return sum(1 for a, b in zip(seq, seq[1:]) if (a > 0) != (b > 0))

    pos = changes(p)
    neg = changes([c * (-1) ** (n - i) for i, c in enumerate(p)])
    return Inertia(pos, zero, neg)


def check_evidence(data: dict, recompute_inertia: bool = True) -> list[str]:
    """Re-check serialized evidence from its own exact values; returns problems found."""
    problems = []
    grads = [[Fraction(x) for x in g] for g in data["gradients"]]
    alpha = [Fraction(a) for a in data["alpha"]]
    Q = RatMatrix(data["hessian_combo"])
    if not any(alpha):
        problems.append("alpha is zero")
    for t in range(len(grads[0])):
        if sum(a * g[t] for a, g in zip(alpha, grads)) != 0:
            problems.append(f"alpha combination of gradients nonzero at coordinate {t + 1}")
            break
    if not Q.is_symmetric():
        problems.append("quadratic form matrix is not symmetric")
    first3 = [grads[i] for i in data["ordering"][:3]]
    fi = data["full_inertia"]
    if recompute_inertia:
        got = inertia_by_charpoly(Q).to_json()
        if got != fi:
            problems.append(f"full inertia {fi} does not match recomputed {got}")
    verdict = data["verdict"]
    if verdict == COROLLARY and not (fi["n_pos"] >= 4 and fi["n_neg"] >= 4):
        problems.append("CorollaryApplies without four positive and four negative squares")
    if verdict == KERNEL_RESTRICTED:
        for key, sign in (("w_plus", 1), ("w_minus", -1)):
            w = data.get(key)
            if w is None:
                problems.append(f"{key} missing")
                continue
            v = [Fraction(x) for x in w["vector"]]
            val = Q.quadratic_form(v)
            if val != Fraction(w["value"]):
                problems.append(f"{key} value {w['value']} but recomputed {format_rational(val)}")
            if val * sign <= 0:
                problems.append(f"{key} has the wrong sign")
            if any(dot(g, v) for g in first3):
                problems.append(f"{key} not orthogonal to the first three gradients")
        ri = data.get("restricted_inertia")
        if not ri or not (ri["n_pos"] >= 1 and ri["n_neg"] >= 1):
            problems.append("KernelRestrictedApplies without an indefinite restricted form")
    return problems


def check_witness_vector(q: Sequence, n: int, alpha: Sequence, w: Sequence) -> tuple[Fraction, bool]:
    """``(w^T Q w, w orthogonal to all four gradients)`` for a proposed vector."""
    perms = _check_quadruple(q)
    w = [to_fraction(x) for x in w]
    Q = quadratic_form_matrix(perms, [to_fraction(a) for a in alpha], n)
    orth = all(dot(h_gradient_at_zero(p, n), w) == 0 for p in perms)
    return Q.quadratic_form(w), orth


# -- appendix verification ----------------------------------------------------------


def appendix_blocks() -> list[dict]:
    return load_data("appendix.json")["blocks"]


def _verify_block(block: dict, tolerance: float = 0.01) -> list:
    perms = [as_permutation(p) for p in block["quadruple"]]
    n = block["n"]
    tag = f"{block['position']['group']}#{block['position']['block']}"
    sec = Section(tag)
    for g in block["gradients"]:
        got = h_gradient_at_zero(g["sigma"], n)
        expected = [Fraction(x) for x in g["entries"]]
        sec.check_equal(f"{tag}/gradient/{g['sigma']}", [format_rational(x) for x in got],
                        [format_rational(x) for x in expected])
    Q = quadratic_form_matrix(perms, block["signs"], n)
    fixture = RatMatrix(block["hessian_combination"])
    sec.check_equal(f"{tag}/matrix", Q.to_json(), fixture.to_json())
    listed = sorted(float(e) for e in block["eigenvalues"])
    spectrum = float_eigenvalues(Q)
    worst = max(abs(a - b) for a, b in zip(spectrum, listed)) if len(spectrum) == len(listed) else float("inf")
    sec.add(f"{tag}/eigenvalues", worst <= tolerance, [round(x, 4) for x in spectrum], block["eigenvalues"],
            note=f"max deviation {worst:.4g}")
    exact = inertia(Q)
    listed_signs = (sum(x > 0 for x in listed), sum(x == 0 for x in listed), sum(x < 0 for x in listed))
    sec.check_equal(f"{tag}/inertia", exact.as_tuple(), listed_signs)
    return sec.items


def verify_appendix(tolerance: float = 0.01) -> Section:
    """Recompute every tabulated gradient, matrix, spectrum and sign count."""
    sec = Section("appendix")
    for items in _pmap(_verify_block, appendix_blocks()):
        sec.items.extend(items)
    return sec


# -- witnesses from exact zeros -----------------------------------------------------------


@dataclass(frozen=True)
class WitnessRecord:
    permuton: StepPermuton
    point: PerturbationPoint
    nonuniform_index: int
    densities: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "permuton": self.permuton.to_json(),
            "x": [format_rational(v) for v in self.point.x],
            "nonuniform_index": self.nonuniform_index,
            "densities": {str(k): format_rational(v) for k, v in self.densities.items()},
        }


def witness_from_zero(q: Sequence, p: PerturbationPoint) -> WitnessRecord:
    """Check ``h^k_pi(x) = 0`` exactly for every ``pi`` and return ``mu[B(x)/k]``.

    The permuton is non-uniform because ``B(x)`` differs from the all-one
    matrix at the first cell touched by the lowest index ``t`` with ``x_t != 0``.
    """
    perms = [as_permutation(s) for s in q]
    if p.is_zero():
        raise WitnessError("x = 0 gives the uniform permuton")
    if not p.is_admissible():
        raise WitnessError("coordinates must satisfy |x_t| <= 1/4")
    from math import factorial

    for i, s in enumerate(perms):
        v = h_value(s, p)
        if v != 0:
            raise WitnessError(f"h for {s} (index {i}) is {format_rational(v)}, not 0", i, v)
    t = next(i + 1 for i, v in enumerate(p.x) if v != 0)
    return WitnessRecord(
        perturbed_permuton(p), p, t, {s: Fraction(1, factorial(s.size)) for s in perms}
    )
