"""Sparse multivariate polynomials with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

# Degree of the zero polynomial. Kept distinct from any integer so that
# format arithmetic (max, +) never silently treats zero as degree -1.
NEG_INF = float("-inf")


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, float):
        return Fraction(c)  # exact binary value
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"cannot use {type(c).__name__} as an exact coefficient")


def graded_lex_exponents(nvars: int, max_degree: int) -> list[tuple[int, ...]]:
    """All exponent vectors of total degree <= max_degree, graded then lex-descending.

    For two variables this yields 1, x, y, x^2, xy, y^2, x^3, ...
    """
    out: list[tuple[int, ...]] = []

    def _fixed(n: int, deg: int):
        if n == 0:
            if deg == 0:
                yield ()
            return
        if n == 1:
            yield (deg,)
            return
        for a in range(deg, -1, -1):
            for rest in _fixed(n - 1, deg - a):
                yield (a,) + rest

    for deg in range(max_degree + 1):
        out.extend(_fixed(nvars, deg))
    return out


class MultiPoly:
    """Immutable sparse polynomial in ``nvars`` variables over Q.

    ``terms`` maps exponent tuples to nonzero :class:`~fractions.Fraction`
    coefficients.
    """

    __slots__ = ("_nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Sequence[int], object] | None = None):
        if nvars < 0:
            raise ValueError("nvars must be nonnegative")
        clean: dict[tuple[int, ...], Fraction] = {}
        for exp, c in (terms or {}).items():
            e = tuple(int(k) for k in exp)
            if len(e) != nvars:
                raise ValueError(f"exponent {e} has length {len(e)}, expected {nvars}")
            if any(k < 0 for k in e):
                raise ValueError(f"negative exponent in {e}")
            q = _as_fraction(c)
            if q:
                q = clean.get(e, 0) + q
                if q:
                    clean[e] = q
                else:
                    clean.pop(e, None)
        self._nvars = nvars
        self._terms = clean
        self._hash = None

    # -- construction -------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "MultiPoly":
        return cls(nvars)

    @classmethod
    def const(cls, nvars: int, c) -> "MultiPoly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, i: int) -> "MultiPoly":
        if not 0 <= i < nvars:
            raise IndexError(f"variable index {i} out of range for {nvars} variables")
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1})

    @classmethod
    def from_coeffs(cls, nvars: int, exps: Iterable[Sequence[int]], coeffs: Iterable) -> "MultiPoly":
        terms: dict = {}
        for e, c in zip(exps, coeffs):
            e = tuple(e)
            terms[e] = terms.get(e, 0) + _as_fraction(c)
        return cls(nvars, terms)

    # -- basic queries ------------------------------------------------
    @property
    def nvars(self) -> int:
        return self._nvars

    @property
    def terms(self) -> dict[tuple[int, ...], Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self):
        if not self._terms:
            return NEG_INF
        return max(sum(e) for e in self._terms)

    def degree_in(self, i: int):
        if not self._terms:
            return NEG_INF
        return max(e[i] for e in self._terms)

    def uses(self, i: int) -> bool:
        return any(e[i] for e in self._terms)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self._nvars, Fraction(0))

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other._nvars != self._nvars:
                raise ValueError(f"variable count mismatch: {self._nvars} vs {other._nvars}")
            return other
        return MultiPoly.const(self._nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self._terms)
        for e, c in other._terms.items():
            terms[e] = terms.get(e, 0) + c
        return MultiPoly(self._nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self._nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            q = _as_fraction(other)
            return MultiPoly(self._nvars, {e: c * q for e, c in self._terms.items()})
        other = self._coerce(other)
        terms: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return MultiPoly(self._nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        result = MultiPoly.const(self._nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self._nvars == other._nvars and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == MultiPoly.const(self._nvars, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._nvars, frozenset(self._terms.items())))
        return self._hash

    # -- calculus and substitution ------------------------------------
    def diff(self, i: int) -> "MultiPoly":
        if not 0 <= i < self._nvars:
            raise IndexError(f"variable index {i} out of range")
        terms = {}
        for e, c in self._terms.items():
            k = e[i]
            if k:
                e2 = list(e)
                e2[i] = k - 1
                terms[tuple(e2)] = c * k
        return MultiPoly(self._nvars, terms)

    def extend(self, nvars: int) -> "MultiPoly":
        """Same polynomial viewed in ``nvars >= self.nvars`` variables (new ones appended)."""
        if nvars < self._nvars:
            raise ValueError("cannot drop variables with extend()")
        pad = (0,) * (nvars - self._nvars)
        return MultiPoly(nvars, {e + pad: c for e, c in self._terms.items()})

    def remap(self, nvars: int, mapping: Sequence[int]) -> "MultiPoly":
        """Send variable ``i`` to variable ``mapping[i]`` of an ``nvars``-variable ring."""
        if len(mapping) != self._nvars:
            raise ValueError("mapping length must equal nvars")
        terms: dict = {}
        for e, c in self._terms.items():
            e2 = [0] * nvars
            for i, k in enumerate(e):
                e2[mapping[i]] += k
            e2 = tuple(e2)
            terms[e2] = terms.get(e2, 0) + c
        return MultiPoly(nvars, terms)

    def compose(self, subs: Sequence["MultiPoly"]) -> "MultiPoly":
        """Substitute ``subs[i]`` for variable ``i``; all substitutes share one ring."""
        if len(subs) != self._nvars:
            raise ValueError(f"need {self._nvars} substitutes, got {len(subs)}")
        if not subs:
            return MultiPoly(0, self._terms)
        m = subs[0].nvars
        if any(s.nvars != m for s in subs):
            raise ValueError("substitutes must share a variable count")
        cache: dict[tuple[int, int], MultiPoly] = {}

        def power(i: int, k: int) -> MultiPoly:
            key = (i, k)
            if key not in cache:
                cache[key] = MultiPoly.const(m, 1) if k == 0 else power(i, k - 1) * subs[i]
            return cache[key]

        out = MultiPoly.zero(m)
        for e, c in self._terms.items():
            term = MultiPoly.const(m, c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            out = out + term
        return out

    def partial(self, assign: Mapping[int, object]) -> "MultiPoly":
        """Fix some variables to exact rational values; the ring is unchanged."""
        vals = {i: _as_fraction(v) for i, v in assign.items()}
        terms: dict = {}
        for e, c in self._terms.items():
            e2 = list(e)
            for i, v in vals.items():
                if e2[i]:
                    c = c * v ** e2[i]
                    e2[i] = 0
            e2 = tuple(e2)
            terms[e2] = terms.get(e2, 0) + c
        return MultiPoly(self._nvars, terms)

    def __call__(self, *point):
        return self.evaluate(point)

    def evaluate(self, point: Sequence):
        """Evaluate at ``point``; exact when the point is rational."""
        if len(point) != self._nvars:
            raise ValueError(f"expected {self._nvars} coordinates, got {len(point)}")
        exact = all(isinstance(x, (int, Fraction)) for x in point)
        total = Fraction(0) if exact else 0.0
        for e, c in self._terms.items():
            term = c if exact else float(c)
            for x, k in zip(point, e):
                if k:
                    term = term * x**k
            total = total + term
        return total

    # -- misc ---------------------------------------------------------
    def sorted_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        return sorted(self._terms.items(), key=lambda ec: (-sum(ec[0]), tuple(-k for k in ec[0])))

    def to_json(self) -> dict:
        return {
            "nvars": self._nvars,
            "terms": [
                {"exp": list(e), "num": str(c.numerator), "den": str(c.denominator)}
                for e, c in self.sorted_terms()
            ],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "MultiPoly":
        n = int(obj["nvars"])
        terms: dict = {}
        for t in obj.get("terms", []):
            e = tuple(int(k) for k in t["exp"])
            terms[e] = terms.get(e, 0) + Fraction(int(t["num"]), int(t.get("den", 1)))
        return cls(n, terms)

    def __repr__(self):
        if not self._terms:
            return f"MultiPoly({self._nvars}, 0)"
        return f"MultiPoly({self._nvars}, {self.pretty()})"

    def pretty(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = [f"x{i + 1}" for i in range(self._nvars)]
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(f"{names[i]}^{k}" if k > 1 else names[i] for i, k in enumerate(e) if k)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def monomial_basis(nvars: int, max_degree: int) -> list[MultiPoly]:
    return [MultiPoly(nvars, {e: 1}) for e in graded_lex_exponents(nvars, max_degree)]


def random_poly(rng, nvars: int, degree: int, dense: bool = True, denominator: int = 16) -> MultiPoly:
    """Random polynomial with small rational coefficients; used by tests and generators."""
    terms = {}
    for e in graded_lex_exponents(nvars, degree):
        if not dense and rng.random() < 0.5:
            continue
        terms[e] = Fraction(int(rng.integers(-denominator, denominator + 1)), denominator)
    p = MultiPoly(nvars, terms)
    if p.is_zero():
        p = MultiPoly.const(nvars, 1)
    return p


__all__ = ["MultiPoly", "NEG_INF", "graded_lex_exponents", "monomial_basis", "random_poly"]
