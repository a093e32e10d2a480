"""Sparse multivariate polynomials with exact rational coefficients."""
from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from .linalg import format_rational, to_fraction


class Poly:
    """Polynomial in a fixed tuple of named variables.

    Terms are stored as ``{exponent_tuple: Fraction}`` with no zero
    coefficients.  Iteration order of :meth:`terms` is graded
    lexicographic (total degree first, then exponents descending).
    """

    __slots__ = ("vars", "_c")

    def __init__(self, variables: Sequence[str], coeffs: Mapping[tuple[int, ...], object] | None = None):
        self.vars = tuple(variables)
        c: dict[tuple[int, ...], Fraction] = {}
        for e, v in (coeffs or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != len(self.vars):
                raise ValueError(f"exponent {e} does not match variables {self.vars}")
            v = to_fraction(v)
            if v:
                c[e] = c.get(e, Fraction(0)) + v
                if not c[e]:
                    del c[e]
        self._c = c

    # construction helpers
    @classmethod
    def constant(cls, variables: Sequence[str], value) -> "Poly":
        return cls(variables, {(0,) * len(variables): value})

    @classmethod
    def var(cls, variables: Sequence[str], name: str) -> "Poly":
        e = [0] * len(variables)
        e[list(variables).index(name)] = 1
        return cls(variables, {tuple(e): 1})

    @classmethod
    def gens(cls, variables: Sequence[str]) -> tuple["Poly", ...]:
        return tuple(cls.var(variables, v) for v in variables)

    # access
    def coeff(self, exps: Sequence[int]) -> Fraction:
        return self._c.get(tuple(exps), Fraction(0))

    def as_dict(self) -> dict[tuple[int, ...], Fraction]:
        return dict(self._c)

    def terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        return sorted(self._c.items(), key=lambda kv: (-sum(kv[0]), tuple(-x for x in kv[0])))

    def degree(self) -> int:
        return max((sum(e) for e in self._c), default=-1)

    def degree_in(self, name: str) -> int:
        i = self.vars.index(name)
        return max((e[i] for e in self._c), default=-1)

    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self) -> bool:
        return bool(self._c)

    # arithmetic
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.vars != self.vars:
                raise ValueError(f"variable mismatch {self.vars} vs {other.vars}")
            return other
        return Poly.constant(self.vars, other)

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        out = dict(self._c)
        for e, v in other._c.items():
            out[e] = out.get(e, Fraction(0)) + v
        return Poly(self.vars, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.vars, {e: -v for e, v in self._c.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = to_fraction(other)
            return Poly(self.vars, {e: c * v for e, v in self._c.items()})
        other = self._coerce(other)
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, v1 in self._c.items():
            for e2, v2 in other._c.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + v1 * v2
        return Poly(self.vars, out)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "Poly":
        return self * (1 / to_fraction(c))

    def __pow__(self, n: int) -> "Poly":
        result = Poly.constant(self.vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.vars == other.vars and self._c == other._c
        return self == self._coerce(other)

    def __hash__(self):
        return hash((self.vars, frozenset(self._c.items())))

    # calculus and evaluation
    def diff(self, name: str) -> "Poly":
        i = self.vars.index(name)
        out = {}
        for e, v in self._c.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = v * e[i]
        return Poly(self.vars, out)

    def __call__(self, *values, **named) -> Fraction:
        if named:
            values = tuple(named[v] for v in self.vars)
        if len(values) != len(self.vars):
            raise ValueError(f"expected {len(self.vars)} values")
        vals = [to_fraction(v) for v in values]
        total = Fraction(0)
        for e, c in self._c.items():
            term = c
            for x, k in zip(vals, e):
                if k:
                    term *= x**k
            total += term
        return total

    def subs(self, new_vars: Sequence[str], images: Mapping[str, object]) -> "Poly":
        """Substitute a polynomial in ``new_vars`` (or a constant) for every variable."""
        imgs = []
        for v in self.vars:
            img = images[v]
            imgs.append(img if isinstance(img, Poly) else Poly.constant(new_vars, img))
        out = Poly(new_vars)
        powers: dict[tuple[int, int], Poly] = {}
        for e, c in self._c.items():
            term = Poly.constant(new_vars, c)
            for i, k in enumerate(e):
                if k:
                    if (i, k) not in powers:
                        powers[(i, k)] = imgs[i] ** k
                    term = term * powers[(i, k)]
            out = out + term
        return out

    def partial_eval(self, name: str, value) -> "Poly":
        """Fix one variable; the result keeps the same variable tuple."""
        i = self.vars.index(name)
        value = to_fraction(value)
        out: dict[tuple[int, ...], Fraction] = {}
        for e, c in self._c.items():
            ne = list(e)
            ne[i] = 0
            ne = tuple(ne)
            out[ne] = out.get(ne, Fraction(0)) + c * value ** e[i]
        return Poly(self.vars, out)

    def abs_coeff_sum(self) -> Fraction:
        return sum((abs(c) for c in self._c.values()), Fraction(0))

    # serialization
    def to_json(self) -> dict:
        return {
            "vars": list(self.vars),
            "terms": [[list(e), format_rational(c)] for e, c in self.terms()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Poly":
        return cls(data["vars"], {tuple(e): c for e, c in data["terms"]})

    def __repr__(self) -> str:
        if not self._c:
            return "0"
        parts = []
        for e, c in self.terms():
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, e) if k
            )
            cs = format_rational(c)
            parts.append(cs if not mono else (mono if c == 1 else f"{cs}*{mono}"))
        return " + ".join(parts).replace("+ -", "- ")


def univariate(coeffs_high_to_low: Sequence, var: str = "t") -> Poly:
    """``univariate([a, b, c])`` is ``a*t^2 + b*t + c``."""
    n = len(coeffs_high_to_low) - 1
    return Poly((var,), {(n - i,): c for i, c in enumerate(coeffs_high_to_low)})


def cubic_discriminant(a, b, c, d) -> Fraction:
    """Discriminant of ``a t^3 + b t^2 + c t + d``."""
    a, b, c, d = map(to_fraction, (a, b, c, d))
    return 18 * a * b * c * d - 4 * b**3 * d + b**2 * c**2 - 4 * a * c**3 - 27 * a**2 * d**2


def quadratic_discriminant(a, b, c) -> Fraction:
    a, b, c = map(to_fraction, (a, b, c))
    return b * b - 4 * a * c


def _univariate_coeffs(p: Poly) -> list[Fraction]:
    """Coefficients low-to-high of a univariate polynomial."""
    if len(p.vars) != 1:
        raise ValueError("expected a univariate polynomial")
    d = max(p.degree(), 0)
    return [p.coeff((i,)) for i in range(d + 1)]


def _poly_rem(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a = list(a)
    while b and b[-1] == 0:
        b = b[:-1]
    while len(a) >= len(b) and any(a):
        if a[-1] == 0:
            a.pop()
            continue
        f = a[-1] / b[-1]
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[i + shift] -= f * c
        a.pop()
    while a and a[-1] == 0:
        a.pop()
    return a


def sturm_sequence(p: Poly) -> list[list[Fraction]]:
    c = _univariate_coeffs(p)
    d = [i * x for i, x in enumerate(c)][1:]
    seq = [c, d]
    while seq[-1] and any(seq[-1]):
        r = _poly_rem(seq[-2], seq[-1])
        if not r:
            break
        seq.append([-x for x in r])
    return seq


def _eval_low_to_high(c: list[Fraction], x: Fraction) -> Fraction:
    out = Fraction(0)
    for a in reversed(c):
        out = out * x + a
    return out


def count_real_roots(p: Poly, lo, hi) -> int:
    """Number of distinct real roots in the half-open interval ``(lo, hi]`` (Sturm)."""
    lo, hi = to_fraction(lo), to_fraction(hi)
    seq = sturm_sequence(p)

    def variations(x):
        vals = [v for v in (_eval_low_to_high(c, x) for c in seq) if v != 0]
        return sum(1 for a, b in zip(vals, vals[1:]) if (a > 0) != (b > 0))

    return variations(lo) - variations(hi)


def sign_on_interval(p: Poly, lo, hi) -> int:
    """``+1``/``-1`` if ``p`` has constant strict sign on ``[lo, hi]``, else ``0``."""
    lo, hi = to_fraction(lo), to_fraction(hi)
    v = p(lo)
    if v == 0 or count_real_roots(p, lo, hi):
        return 0
    return 1 if v > 0 else -1
