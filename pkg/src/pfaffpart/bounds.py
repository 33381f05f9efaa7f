"""Closed-form evaluators for the counting and partitioning bounds.

Integer and rational results are exact. Rational powers are exact whenever
the root is exact and fall back to 60-digit mpmath floats otherwise; a
nonzero exponent slack ``eps`` always gives an mpmath float.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, fields
from fractions import Fraction
from math import comb, prod
from typing import Sequence

import mpmath

MP_DPS = 60
# comparisons of real-valued bounds against counts use this relative slack
REAL_TOL = 1e-12


class InvalidBoundQuery(ValueError):
    """The query violates a precondition of the requested bound."""


class TrivialGuaranteeWarning(UserWarning):
    """The partition guarantee is no better than the trivial |Gamma|."""


@dataclass(frozen=True)
class BoundQuery:
    n: int = 1
    k: int = 0
    r: int = 0
    alpha: int = 1
    xi: int | None = None  # defaults to n
    betas: tuple = ()
    D: int = 1
    m: int = 1
    s: int = 2
    t: int = 2
    eps: Fraction = Fraction(0)
    cardinalities: tuple = ()
    thetas: tuple = ()
    C: Fraction = Fraction(1)
    C1: Fraction = Fraction(1)
    C2: Fraction = Fraction(1)
    independent: bool | None = None

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "betas", tuple(int(b) for b in self.betas))
        set_(self, "cardinalities", tuple(int(c) for c in self.cardinalities))
        set_(self, "thetas", tuple(int(t) for t in self.thetas))
        for name in ("eps", "C", "C1", "C2"):
            set_(self, name, _to_fraction(getattr(self, name)))
        if self.n < 1:
            raise InvalidBoundQuery("n must be at least 1")
        if not 0 <= self.k <= self.n:
            raise InvalidBoundQuery("k must satisfy 0 <= k <= n")
        if self.r < 0:
            raise InvalidBoundQuery("r must be nonnegative")
        if self.D < 1:
            raise InvalidBoundQuery("D must be at least 1")
        if any(c < 0 for c in self.cardinalities):
            raise InvalidBoundQuery("cardinalities must be nonnegative")
        if self.eps < 0:
            raise InvalidBoundQuery("eps must be nonnegative")

    @property
    def xi_eff(self) -> int:
        return self.n if self.xi is None else self.xi

    def to_json(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, Fraction):
                v = str(v)
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "BoundQuery":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise InvalidBoundQuery(f"unknown query fields: {sorted(unknown)}")
        kw = dict(obj)
        for key in ("betas", "cardinalities", "thetas"):
            if key in kw:
                kw[key] = tuple(kw[key])
        return cls(**kw)


def _to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(str(v))
    return Fraction(v)


def _iroot(a: int, q: int) -> int | None:
    """Exact integer q-th root of a >= 0, or None."""
    if a < 2:
        return a
    x = 1 << ((a.bit_length() + q - 1) // q)
    while True:
        y = ((q - 1) * x + a // x ** (q - 1)) // q
        if y >= x:
            break
        x = y
    return x if x**q == a else None


def rpow(base, e: Fraction):
    """base ** e with exact results when possible."""
    base = _to_fraction(base)
    e = _to_fraction(e)
    if base < 0:
        raise InvalidBoundQuery("negative base in a real power")
    if base == 0:
        return Fraction(0) if e > 0 else Fraction(1)
    if e.denominator == 1:
        return base ** e.numerator
    p, q = e.numerator, e.denominator
    rn, rd = _iroot(base.numerator, q), _iroot(base.denominator, q)
    if rn is not None and rd is not None:
        return Fraction(rn, rd) ** p
    with mpmath.workdps(MP_DPS):
        return mpmath.power(mpmath.mpf(base.numerator) / base.denominator, mpmath.mpf(p) / q)


def _mul(*xs):
    if any(isinstance(x, (int, Fraction)) and x == 0 for x in xs):
        return Fraction(0)
    out = Fraction(1)
    for x in xs:
        if isinstance(out, Fraction) and isinstance(x, (int, Fraction)):
            out = out * x
        else:
            with mpmath.workdps(MP_DPS):
                out = mpmath.mpf(_as_mp(out)) * _as_mp(x)
    return out


def _add(*xs):
    out = Fraction(0)
    for x in xs:
        if isinstance(out, Fraction) and isinstance(x, (int, Fraction)):
            out = out + x
        else:
            with mpmath.workdps(MP_DPS):
                out = mpmath.mpf(_as_mp(out)) + _as_mp(x)
    return out


def _as_mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _min(a, b):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return min(a, b)
    with mpmath.workdps(MP_DPS):
        return a if _as_mp(a) <= _as_mp(b) else b


def _normalize(x):
    """Fractions with unit denominator become ints."""
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x)
    return x


# -- Bezout-type solution counts ----------------------------------------------

def _check_betas(q: BoundQuery) -> None:
    if len(q.betas) != q.n:
        raise InvalidBoundQuery(f"need {q.n} degrees, got {len(q.betas)}")
    if any(b < 1 for b in q.betas):
        raise InvalidBoundQuery("all degrees must be at least 1")


def _khovanskii(n: int, r: int, alpha: int, xi: int, betas: Sequence[int]) -> int:
    base = min(xi, r) * alpha + sum(betas) - n + 1
    if r > 0 and base < 0:
        raise InvalidBoundQuery(f"negative base {base} in the chain factor")
    return 2 ** comb(r, 2) * prod(betas) * base**r


def khovanskii_bound(q: BoundQuery) -> int:
    """Non-degenerate solutions of n Pfaffian equations in n unknowns:
    2^C(r,2) * prod(beta) * (min(xi, r) alpha + sum(beta) - n + 1)^r."""
    _check_betas(q)
    return _khovanskii(q.n, q.r, q.alpha, q.xi_eff, q.betas)


def khovanskii_degenerate_bound(q: BoundQuery, variant: str = "stated") -> int:
    """Bound allowing degenerate (but isolated) solutions.

    ``stated``: 2^(n + C(r+1,2)) prod(beta) (min(xi,r) alpha + sum(beta) - n + 1)^r.
    ``substituted``: the non-degenerate bound with every beta doubled.
    """
    _check_betas(q)
    if variant == "stated":
        base = min(q.xi_eff, q.r) * q.alpha + sum(q.betas) - q.n + 1
        if q.r > 0 and base < 0:
            raise InvalidBoundQuery(f"negative base {base} in the chain factor")
        return 2 ** (q.n + comb(q.r + 1, 2)) * prod(q.betas) * base**q.r
    if variant == "substituted":
        return _khovanskii(q.n, q.r, q.alpha, q.xi_eff, [2 * b for b in q.betas])
    raise InvalidBoundQuery(f"unknown variant {variant!r}")


def degenerate_bound_max(q: BoundQuery) -> int:
    return max(khovanskii_degenerate_bound(q, "stated"), khovanskii_degenerate_bound(q, "substituted"))


# -- topology and partitioning ------------------------------------------------

def component_bound(q: BoundQuery):
    """C * D^(k + r): components of a k-dimensional set off a degree-D zero set."""
    return _normalize(q.C * Fraction(q.D) ** (q.k + q.r))


def partition_exponent(q: BoundQuery, kind: str) -> int:
    """Power of D dividing |Gamma| in the partition guarantee."""
    if kind == "poly":
        return q.n - q.k - q.r if q.k > 0 else q.n
    if kind == "pfaffian":
        return q.n - q.k if q.k > 0 else q.n + q.r
    raise InvalidBoundQuery(f"unknown partition kind {kind!r}")


def partition_guarantee(q: BoundQuery, kind: str = "poly"):
    """Per-cell load guarantee C m |Gamma| / D^e for the chosen partition kind."""
    if kind == "pfaffian" and q.independent is not True:
        raise InvalidBoundQuery("the Pfaffian guarantee needs an algebraically independent chain")
    e = partition_exponent(q, kind)
    if kind == "poly" and e <= 0:
        warnings.warn("trivial guarantee: exponent n - k - r <= 0", TrivialGuaranteeWarning, stacklevel=2)
    size = q.cardinalities[0] if q.cardinalities else 0
    return _normalize(q.C * q.m * Fraction(size) / Fraction(q.D) ** e)


# -- incidence and joints -------------------------------------------------------

def _two_cards(q: BoundQuery) -> tuple[int, int]:
    if len(q.cardinalities) != 2:
        raise InvalidBoundQuery("need cardinalities (|P|, |Gamma|)")
    return q.cardinalities


def kst_bound(q: BoundQuery):
    """C min(|P||G|^((s-1)/s) + |G|, |P|^((t-1)/t)|G| + |P|)."""
    if q.s < 2 or q.t < 2:
        raise InvalidBoundQuery("s and t must be at least 2")
    P, G = _two_cards(q)
    a = _add(_mul(P, rpow(G, Fraction(q.s - 1, q.s))), G)
    b = _add(_mul(rpow(P, Fraction(q.t - 1, q.t)), G), P)
    return _normalize(_mul(q.C, _min(a, b)))


def st_exponents(q: BoundQuery, plane: bool) -> tuple[Fraction, Fraction]:
    """Point and curve exponents (without eps)."""
    n = 2 if plane else q.n
    s, r = q.s, q.r
    den = s * (n + r) - n + 1
    return Fraction(s * (r + 1), den), Fraction((s - 1) * (n + r), den)


def st_bound(q: BoundQuery, plane: bool = True):
    """Incidences between points and Pfaffian curves with no K_{s,t}."""
    if q.s < 2 or q.t < 2:
        raise InvalidBoundQuery("s and t must be at least 2")
    if plane and q.thetas:
        raise InvalidBoundQuery("the plane bound takes no theta list")
    if not plane and q.n < 3:
        raise InvalidBoundQuery("the space bound needs n >= 3")
    P, G = _two_cards(q)
    a, b = st_exponents(q, plane)
    if q.eps:
        a_eff = _as_mp(a) + _as_mp(q.eps)
        with mpmath.workdps(MP_DPS):
            p_term = mpmath.power(P, a_eff) if P else mpmath.mpf(0)
    else:
        p_term = rpow(P, a)
    main = _mul(q.C1, p_term, rpow(G, b))
    theta = 0 if plane else P * sum(q.thetas)
    return _normalize(_add(main, theta, _mul(q.C2, G + P)))


def joints_exponent(q: BoundQuery) -> Fraction:
    n, r = q.n, q.r
    return max(Fraction(n + r, n * (n - 1)), Fraction(2, n + 1))


def joints_bound(q: BoundQuery):
    """C min_j |G_j|^eps prod |G_i|^mu with mu = max((n+r)/(n(n-1)), 2/(n+1))."""
    if q.n < 3:
        raise InvalidBoundQuery("joints bound needs n >= 3")
    if len(q.cardinalities) != q.n:
        raise InvalidBoundQuery(f"need {q.n} family sizes")
    if min(q.cardinalities) == 0:
        return 0
    mu = joints_exponent(q)
    factors = [rpow(c, mu) for c in q.cardinalities]
    if q.eps:
        with mpmath.workdps(MP_DPS):
            factors.append(mpmath.power(min(q.cardinalities), _as_mp(q.eps)))
    return _normalize(_mul(q.C, *factors))


def irreducible_component_bound(q: BoundQuery):
    """C1 * beta^C2 with beta the largest degree in the query."""
    if not q.betas:
        raise InvalidBoundQuery("need a degree")
    return _normalize(_mul(q.C1, rpow(max(q.betas), q.C2)))


# -- uniform front end ------------------------------------------------------------

BOUND_NAMES = (
    "khovanskii", "khovanskii_degenerate_stated", "khovanskii_degenerate_substituted",
    "component", "partition_poly", "partition_pfaffian", "kst", "st_plane", "st_space",
    "joints", "irreducible_components",
)


def evaluate_bound(name: str, q: BoundQuery):
    """Value and the exact exponents that enter it, for reports."""
    exps: dict = {}
    if name == "khovanskii":
        v = khovanskii_bound(q)
    elif name == "khovanskii_degenerate_stated":
        v = khovanskii_degenerate_bound(q, "stated")
    elif name == "khovanskii_degenerate_substituted":
        v = khovanskii_degenerate_bound(q, "substituted")
    elif name == "component":
        v = component_bound(q)
        exps["D"] = Fraction(q.k + q.r)
    elif name in ("partition_poly", "partition_pfaffian"):
        kind = name.split("_")[1]
        v = partition_guarantee(q, kind)
        exps["D"] = Fraction(-partition_exponent(q, kind))
    elif name == "kst":
        v = kst_bound(q)
        exps["Gamma_branch1"] = Fraction(q.s - 1, q.s)
        exps["P_branch2"] = Fraction(q.t - 1, q.t)
    elif name in ("st_plane", "st_space"):
        plane = name == "st_plane"
        v = st_bound(q, plane)
        a, b = st_exponents(q, plane)
        exps["P"] = a + q.eps
        exps["Gamma"] = b
    elif name == "joints":
        v = joints_bound(q)
        exps["mu"] = joints_exponent(q)
    elif name == "irreducible_components":
        v = irreducible_component_bound(q)
        exps["beta"] = q.C2
    else:
        raise InvalidBoundQuery(f"unknown bound {name!r}; known: {', '.join(BOUND_NAMES)}")
    return v, exps


def to_float(x) -> float:
    return float(x)


def encode_number(x) -> str:
    """Exact string for ints/Fractions, 30 significant digits otherwise."""
    if isinstance(x, (int, Fraction)):
        return str(x)
    return mpmath.nstr(x, 30)
