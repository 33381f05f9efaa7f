"""Pfaffian chains: the builtin catalogue, derivative data and evaluators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .interval import IArray, hiprec, iabs, iexp, ilog, ipow_real, itan, iv
from .poly import MultiPoly

INF = math.inf


@dataclass(frozen=True)
class Format:
    """Format (alpha, beta, r) of a Pfaffian function, plus n and xi."""

    alpha: int
    beta: object  # int, or NEG_INF for the zero function
    r: int
    n: int
    xi: int

    def __post_init__(self):
        if self.alpha < 0 or self.r < 0 or self.n < 0 or self.xi < 0:
            raise ValueError("format fields must be nonnegative")


@dataclass(frozen=True)
class Domain:
    """Product of per-variable unions of open intervals."""

    pieces: tuple[tuple[tuple[float, float], ...], ...]

    @property
    def n(self) -> int:
        return len(self.pieces)

    @classmethod
    def everywhere(cls, n: int) -> "Domain":
        return cls(tuple(((-INF, INF),) for _ in range(n)))

    def contains(self, x: Sequence[float]) -> bool:
        return all(any(a < float(v) < b for a, b in self.pieces[i]) for i, v in enumerate(x))

    def contains_box(self, lo: Sequence[float], hi: Sequence[float]) -> bool:
        """Closed box inside the open domain (each side in one piece)."""
        return all(
            any(a < float(l) and float(h) < b for a, b in self.pieces[i])
            for i, (l, h) in enumerate(zip(lo, hi))
        )

    def to_json(self):
        def enc(v):
            return "inf" if v == INF else "-inf" if v == -INF else v

        return [[[enc(a), enc(b)] for a, b in p] for p in self.pieces]


# -- evaluation backends ----------------------------------------------------
# A chain's values are written once against this small vocabulary and run
# on floats, float intervals, or mpmath intervals.

class _FloatOps:
    exp = staticmethod(np.exp)
    tan = staticmethod(np.tan)

    @staticmethod
    def log_abs(x):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(x))

    @staticmethod
    def recip(x):
        with np.errstate(divide="ignore"):
            return 1.0 / x

    @staticmethod
    def powr(x, m):
        return np.power(x, float(m))

    @staticmethod
    def const(c, like):
        return float(c)

    @staticmethod
    def scale(c, x):
        return float(c) * x


class _IntervalOps:
    exp = staticmethod(iexp)
    tan = staticmethod(itan)

    @staticmethod
    def log_abs(x):
        return ilog(iabs(x))

    @staticmethod
    def recip(x):
        return x.recip()

    @staticmethod
    def powr(x, m):
        return ipow_real(x, m)

    @staticmethod
    def const(c, like):
        return IArray._lift(Fraction(c), like)

    @staticmethod
    def scale(c, x):
        return x * Fraction(c)


class _MpOps:
    """mpmath interval scalars; callers set the working precision."""

    @staticmethod
    def exp(x):
        return iv.exp(x)

    @staticmethod
    def tan(x):
        return iv.tan(x)

    @staticmethod
    def log_abs(x):
        if x.a > 0:
            return iv.log(x)
        if x.b < 0:
            return iv.log(-x)
        return iv.mpf(["-inf", "+inf"])

    @staticmethod
    def recip(x):
        return 1 / x

    @staticmethod
    def powr(x, m):
        m = Fraction(m)
        if m.denominator == 1 and m.numerator >= 0:
            return x ** int(m)
        return iv.exp((iv.mpf(m.numerator) / m.denominator) * iv.log(x))

    @staticmethod
    def const(c, like):
        c = Fraction(c)
        return iv.mpf(c.numerator) / c.denominator

    @staticmethod
    def scale(c, x):
        c = Fraction(c)
        return (iv.mpf(c.numerator) / c.denominator) * x


class NotExact(ArithmeticError):
    """A chain value at a rational point is not known to be rational."""


def _exact_root(q: Fraction, k: int):
    """The rational k-th root of q >= 0, or None."""
    out = []
    for v in (q.numerator, q.denominator):
        r = round(v ** (1.0 / k))
        hit = next((c for c in (r - 1, r, r + 1) if c >= 0 and c**k == v), None)
        if hit is None:
            return None
        out.append(hit)
    return Fraction(out[0], out[1])


class _ExactOps:
    """Rational arithmetic; only values that are provably rational succeed."""

    @staticmethod
    def exp(x):
        if x == 0:
            return Fraction(1)
        raise NotExact("e^q is irrational for rational q != 0")

    @staticmethod
    def tan(x):
        if x == 0:
            return Fraction(0)
        raise NotExact("tan q is irrational for rational q != 0")

    @staticmethod
    def log_abs(x):
        if abs(x) == 1:
            return Fraction(0)
        raise NotExact("ln|q| is irrational for rational |q| != 1")

    @staticmethod
    def recip(x):
        if x == 0:
            raise NotExact("reciprocal of zero")
        return 1 / Fraction(x)

    @staticmethod
    def powr(x, m):
        m = Fraction(m)
        x = Fraction(x)
        if x <= 0:
            raise NotExact("real power of a nonpositive number")
        root = _exact_root(x, m.denominator)
        if root is None:
            raise NotExact("power is not rational")
        return root ** m.numerator

    @staticmethod
    def const(c, like):
        return Fraction(c)

    @staticmethod
    def scale(c, x):
        return Fraction(c) * x


FLOAT_OPS = _FloatOps()
INTERVAL_OPS = _IntervalOps()
MP_OPS = _MpOps()
EXACT_OPS = _ExactOps()


@dataclass(frozen=True)
class PfaffianChain:
    """Chain q_1..q_r in n variables with triangular derivative data.

    ``derivs[i][j]`` is the polynomial P_{i+1,j+1} in the n + j + 1
    variables (X_1..X_n, Y_1..Y_{j+1}), so triangularity holds by
    construction.
    """

    name: str
    params: tuple
    n: int
    r: int
    alpha: int
    xi: int
    derivs: tuple
    domain: Domain
    independent: bool
    independence_note: str
    values: Callable = field(compare=False, repr=False)

    def __post_init__(self):
        if len(self.derivs) != self.n or any(len(row) != self.r for row in self.derivs):
            raise ValueError("derivs must be an n x r array")
        for row in self.derivs:
            for j, p in enumerate(row):
                if p.nvars != self.n + j + 1:
                    raise ValueError("derivative polynomial has the wrong variable count")
                if p.degree() > self.alpha:
                    raise ValueError("derivative degree exceeds the chain-degree")
        if self.domain.n != self.n:
            raise ValueError("domain dimension mismatch")

    @property
    def nvars(self) -> int:
        return self.n + self.r

    def deriv_lifted(self, i: int, j: int) -> MultiPoly:
        """P_{i,j} viewed in all n + r variables (0-based indices)."""
        return self.derivs[i][j].extend(self.n + self.r)

    # -- evaluation
    def eval_float(self, xs: Sequence[np.ndarray]) -> list:
        return list(self.values(list(xs), FLOAT_OPS))

    def eval_interval(self, xs: Sequence[IArray]) -> list:
        return list(self.values(list(xs), INTERVAL_OPS))

    def eval_mp(self, xs: Sequence) -> list:
        return list(self.values(list(xs), MP_OPS))

    def eval_exact(self, xs: Sequence[Fraction]) -> list | None:
        """Chain values at a rational point when they are provably rational."""
        try:
            return list(self.values([Fraction(x) for x in xs], EXACT_OPS))
        except NotExact:
            return None

    def lift_float(self, xs: Sequence[np.ndarray]) -> list:
        """Coordinates (x, q(x)) as float arrays."""
        return list(xs) + self.eval_float(xs)

    def lift_interval(self, xs: Sequence[IArray]) -> list:
        return list(xs) + self.eval_interval(xs)

    def to_json(self) -> dict:
        if self.name == "product":
            return {"name": "product", "factors": [c.to_json() for c in self.params], "n": self.n}
        return {"name": self.name, "params": [str(p) for p in self.params], "n": self.n}


# -- builtin catalogue --------------------------------------------------------

def _y(nvars: int, j: int) -> MultiPoly:
    return MultiPoly.var(nvars, j)


def _frac(v) -> Fraction:
    if isinstance(v, float):
        return Fraction(str(v))
    return Fraction(v)


def _empty(params, n, alpha=1):
    a = int(alpha) if alpha else 1
    if a < 1:
        raise ValueError("chain-degree must be at least 1")
    return PfaffianChain(
        "empty", tuple(_frac(p) for p in params), n, 0, a, 0, tuple(() for _ in range(n)),
        Domain.everywhere(n), True, "no chain functions; polynomials only",
        lambda xs, ops: [],
    )


def _exp(params, n):
    coeffs = [_frac(p) for p in params] or [Fraction(1)]
    if len(coeffs) == 1 and n > 1:
        coeffs = coeffs + [Fraction(0)] * (n - 1)
    if len(coeffs) != n:
        raise ValueError(f"exp needs 1 or n={n} coefficients, got {len(coeffs)}")
    if all(c == 0 for c in coeffs):
        raise ValueError("exp chain needs a nonzero exponent")
    derivs = tuple((MultiPoly.var(n + 1, n) * c,) for c in coeffs)

    def values(xs, ops):
        lin = None
        for c, x in zip(coeffs, xs):
            if c:
                t = ops.scale(c, x)
                lin = t if lin is None else lin + t
        return [ops.exp(lin)]

    return PfaffianChain(
        "exp", tuple(coeffs), n, 1, 1, sum(1 for c in coeffs if c), derivs,
        Domain.everywhere(n), True, "e^(a.x) with a != 0 is transcendental over polynomials",
        values,
    )


def _iterated_exp(params, n):
    if len(params) != 2:
        raise ValueError("iterated_exp takes params (a, r)")
    a, r = _frac(params[0]), int(params[1])
    if a == 0 or r < 1 or n != 1:
        raise ValueError("iterated_exp needs a != 0, r >= 1, n = 1")
    row = []
    for j in range(r):
        p = MultiPoly.const(j + 2, a)
        for k in range(j + 1):
            p = p * _y(j + 2, 1 + k)
        row.append(p)

    def values(xs, ops):
        out = []
        cur = ops.scale(a, xs[0])
        for _ in range(r):
            cur = ops.exp(cur)
            out.append(cur)
        return out

    return PfaffianChain(
        "iterated_exp", (a, Fraction(r)), 1, r, r, 1, (tuple(row),),
        Domain.everywhere(1), True, "towers of exponentials are algebraically independent",
        values,
    )


def _tan(params, n):
    k = int(params[0]) if params else 0
    if n != 1:
        raise ValueError("tan chain is univariate")
    half = math.pi / 2
    lo = k * math.pi - half
    hi = k * math.pi + half
    # shrink by a relative margin so float endpoints stay inside the true branch
    lo = lo + 1e-15 * max(1.0, abs(lo))
    hi = hi - 1e-15 * max(1.0, abs(hi))
    deriv = MultiPoly(2, {(0, 0): 1, (0, 2): 1})
    return PfaffianChain(
        "tan", (Fraction(k),), 1, 1, 2, 1, ((deriv,),),
        Domain((((lo, hi),),)), True, "tan is transcendental over polynomials",
        lambda xs, ops: [ops.tan(xs[0])],
    )


def _recip_log(params, n):
    if n != 1:
        raise ValueError("recip_log chain is univariate")
    d1 = MultiPoly(2, {(0, 2): -1})
    d2 = MultiPoly(3, {(0, 1, 0): 1})

    def values(xs, ops):
        return [ops.recip(xs[0]), ops.log_abs(xs[0])]

    return PfaffianChain(
        "recip_log", (), 1, 2, 2, 1, ((d1, d2),),
        Domain((((-INF, 0.0), (0.0, INF)),)), True,
        "1/x and ln|x| share no polynomial relation (ln is transcendental over Q(x))",
        values,
    )


def _recip_power(params, n):
    if len(params) != 1 or n != 1:
        raise ValueError("recip_power takes one exponent m and n = 1")
    m = _frac(params[0])
    d1 = MultiPoly(2, {(0, 2): -1})
    d2 = MultiPoly(3, {(0, 1, 1): m})

    def values(xs, ops):
        return [ops.recip(xs[0]), ops.powr(xs[0], m)]

    return PfaffianChain(
        "recip_power", (m,), 1, 2, 2, 1, ((d1, d2),),
        Domain((((0.0, INF),),)), False,
        "exponent is rational, so Y_2^q - Y_1^(-p) style relations vanish on the chain",
        values,
    )


def _fewnomial_monomial(params, n):
    if len(params) < 2:
        raise ValueError("fewnomial_monomial takes params (a, i_1, ..., i_n)")
    a = _frac(params[0])
    exps = [int(p) for p in params[1:]]
    if a == 0:
        raise ValueError("monomial coefficient must be nonzero")
    n = len(exps)
    r = n + 1
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            nv = n + j + 1
            row.append(MultiPoly(nv, {tuple(2 if k == n + j else 0 for k in range(nv)): -1}) if i == j else MultiPoly.zero(nv))
        nv = n + r
        e = [0] * nv
        e[n + i] += 1
        e[n + n] += 1
        row.append(MultiPoly(nv, {tuple(e): exps[i]}))
        rows.append(tuple(row))

    def values(xs, ops):
        recips = [ops.recip(x) for x in xs]
        mono = ops.const(a, xs[0])
        for x, k, rx in zip(xs, exps, recips):
            if k > 0:
                mono = mono * x**k
            elif k < 0:
                mono = mono * rx ** (-k)
        return recips + [mono]

    dom = Domain(tuple(((-INF, 0.0), (0.0, INF)) for _ in range(n)))
    return PfaffianChain(
        "fewnomial_monomial", (a,) + tuple(Fraction(k) for k in exps), n, r, 2, n, tuple(rows),
        dom, False, "the monomial is a polynomial in the reciprocals and x",
        values,
    )


_BUILDERS = {
    "empty": _empty,
    "exp": _exp,
    "iterated_exp": _iterated_exp,
    "tan": _tan,
    "recip_log": _recip_log,
    "recip_power": _recip_power,
    "fewnomial_monomial": _fewnomial_monomial,
}

BUILTIN_NAMES = tuple(_BUILDERS)


def chain_builtin(name: str, params: Sequence = (), n: int | None = None, **kw) -> PfaffianChain:
    """Build a chain from the catalogue.

    ``exp`` takes ``[a]`` (q = e^(a x_1)) or ``[a_1, ..., a_n]`` (q = e^(a.x));
    ``iterated_exp`` takes ``[a, r]``; ``tan`` takes an optional branch index;
    ``recip_power`` takes a rational ``[m]``; ``fewnomial_monomial`` takes
    ``[a, i_1, ..., i_n]``; ``empty`` accepts an optional ``alpha`` keyword.
    """
    if name not in _BUILDERS:
        raise ValueError(f"unknown chain {name!r}; known: {', '.join(_BUILDERS)}")
    params = list(params)
    if n is None:
        n = len(params) if name == "exp" and len(params) > 1 else 1
    if n < 1 and name != "empty":
        raise ValueError("n must be at least 1")
    return _BUILDERS[name](params, n, **kw)


def product_chain(c1: PfaffianChain, c2: PfaffianChain) -> PfaffianChain:
    """Chain in the concatenated variables (x, x') carrying the entries of both chains."""
    n1, n2, r1, r2 = c1.n, c2.n, c1.r, c2.r
    n, r = n1 + n2, r1 + r2
    rows = []
    for i in range(n):
        row = []
        for j in range(r):
            nv = n + j + 1
            if i < n1 and j < r1:
                src = c1.derivs[i][j]
                row.append(src.remap(nv, list(range(n1)) + [n + k for k in range(j + 1)]))
            elif i >= n1 and j >= r1:
                jj = j - r1
                src = c2.derivs[i - n1][jj]
                row.append(src.remap(nv, [n1 + k for k in range(n2)] + [n + r1 + k for k in range(jj + 1)]))
            else:
                row.append(MultiPoly.zero(nv))
        rows.append(tuple(row))

    def values(xs, ops):
        return c1.values(xs[:n1], ops) + c2.values(xs[n1:], ops)

    return PfaffianChain(
        "product", (c1, c2), n, r, max(c1.alpha, c2.alpha), min(n, c1.xi + c2.xi), tuple(rows),
        Domain(c1.domain.pieces + c2.domain.pieces), c1.independent and c2.independent,
        "entries of the two factors live in disjoint variables", values,
    )


def chain_from_json(obj: dict) -> PfaffianChain:
    if obj["name"] == "product":
        c1, c2 = (chain_from_json(c) for c in obj["factors"])
        return product_chain(c1, c2)
    params = obj.get("params", [])
    kw = {}
    if obj["name"] == "empty" and "alpha" in obj:
        kw["alpha"] = obj["alpha"]
    return chain_builtin(obj["name"], params, obj.get("n"), **kw)


def mp_lift(chain: PfaffianChain, point: Sequence[Fraction]):
    """High-precision enclosure of (x, q(x)) for one rational point."""
    with hiprec():
        xs = [iv.mpf(Fraction(v).numerator) / Fraction(v).denominator for v in point]
        return xs + chain.eval_mp(xs)
