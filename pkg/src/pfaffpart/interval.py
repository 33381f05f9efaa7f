"""Vectorized interval arithmetic with outward rounding.

Intervals are stored as pairs of float64 arrays ``lo <= hi``. Every
operation first computes a round-to-nearest result and then pushes the
endpoints outward by a few units in the last place, which is enough to
enclose the exact result for IEEE basic operations (error <= 0.5 ulp) and
for the libm transcendental functions used here (error <= 1-2 ulp in
practice, widened by ``_TRANSCENDENTAL_ULPS``). A scalar high-precision
backend built on ``mpmath.iv`` is used when double precision cannot decide
a sign.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

_TRANSCENDENTAL_ULPS = 4
_TINY = np.finfo(np.float64).tiny * 4


# -- global precision configuration ----------------------------------------

@dataclass
class PrecisionConfig:
    bits: int = 53          # working precision for the fast path (fixed at 53 for float64)
    escalation_bits: int = 200  # precision used by the mpmath fallback


PRECISION = PrecisionConfig()


def set_precision(bits: int) -> None:
    """Set the escalation precision; values at or below 53 keep the default fallback."""
    if bits < 16:
        raise ValueError("precision must be at least 16 bits")
    PRECISION.escalation_bits = max(bits, 64)


@contextmanager
def hiprec(bits: int | None = None):
    """Raise the working precision of both mpmath contexts (point and interval)."""
    bits = bits or PRECISION.escalation_bits
    old = mpmath.iv.prec
    mpmath.iv.prec = bits
    try:
        with mpmath.workprec(bits):
            yield
    finally:
        mpmath.iv.prec = old


# -- rounding helpers ------------------------------------------------------

def down(x):
    return np.nextafter(x, -np.inf)


def up(x):
    return np.nextafter(x, np.inf)


def _widen(lo, hi, ulps: int):
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    lo = lo - ulps * np.abs(np.spacing(lo)) - _TINY
    hi = hi + ulps * np.abs(np.spacing(hi)) + _TINY
    return lo, hi


def frac_down(q: Fraction) -> float:
    """Largest float not above q."""
    f = float(q)
    if Fraction(f) > q:
        f = math.nextafter(f, -math.inf)
    return f


def frac_up(q: Fraction) -> float:
    f = float(q)
    if Fraction(f) < q:
        f = math.nextafter(f, math.inf)
    return f


class IArray:
    """Array of closed intervals ``[lo, hi]`` with broadcasting arithmetic."""

    __slots__ = ("lo", "hi")
    __array_priority__ = 100

    def __init__(self, lo, hi=None):
        lo = np.asarray(lo, dtype=np.float64)
        hi = lo if hi is None else np.asarray(hi, dtype=np.float64)
        # nan endpoints mean "unknown": widen to the whole line
        self.lo = np.where(np.isnan(lo), -np.inf, lo)
        self.hi = np.where(np.isnan(hi), np.inf, hi)

    # -- construction
    @classmethod
    def point(cls, x):
        x = np.asarray(x, dtype=np.float64)
        return cls(x, x.copy())

    @classmethod
    def from_fractions(cls, lo: Sequence[Fraction], hi: Sequence[Fraction] | None = None):
        hi = lo if hi is None else hi
        return cls(np.array([frac_down(Fraction(q)) for q in lo]), np.array([frac_up(Fraction(q)) for q in hi]))

    @classmethod
    def const_like(cls, c, shape):
        if isinstance(c, Fraction):
            lo, hi = frac_down(c), frac_up(c)
        else:
            lo = hi = float(c)
        return cls(np.full(shape, lo), np.full(shape, hi))

    # -- queries
    @property
    def shape(self):
        return self.lo.shape

    def __len__(self):
        return len(self.lo)

    def __getitem__(self, idx):
        return IArray(self.lo[idx], self.hi[idx])

    def mid(self):
        m = 0.5 * self.lo + 0.5 * self.hi
        return np.where(np.isfinite(m), m, 0.0)

    def width(self):
        return self.hi - self.lo

    def mag(self):
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def contains_zero(self):
        return (self.lo <= 0.0) & (self.hi >= 0.0)

    def positive(self):
        return self.lo > 0.0

    def negative(self):
        return self.hi < 0.0

    def contains(self, x):
        return (self.lo <= x) & (x <= self.hi)

    def subset_of(self, other: "IArray"):
        return (self.lo >= other.lo) & (self.hi <= other.hi)

    def interior_of(self, other: "IArray"):
        return (self.lo > other.lo) & (self.hi < other.hi)

    # -- arithmetic
    @staticmethod
    def _lift(x, like: "IArray") -> "IArray":
        if isinstance(x, IArray):
            return x
        if isinstance(x, Fraction):
            return IArray(frac_down(x), frac_up(x))
        return IArray.point(x)

    def __add__(self, other):
        o = self._lift(other, self)
        return IArray(down(self.lo + o.lo), up(self.hi + o.hi))

    __radd__ = __add__

    def __neg__(self):
        return IArray(-self.hi, -self.lo)

    def __sub__(self, other):
        o = self._lift(other, self)
        return IArray(down(self.lo - o.hi), up(self.hi - o.lo))

    def __rsub__(self, other):
        return self._lift(other, self) - self

    def __mul__(self, other):
        o = self._lift(other, self)
        with np.errstate(invalid="ignore", over="ignore"):
            p = np.stack(np.broadcast_arrays(self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi))
        # 0 * inf: the true product set is bounded by the other candidates
        p_lo = np.where(np.isnan(p), np.inf, p).min(axis=0)
        p_hi = np.where(np.isnan(p), -np.inf, p).max(axis=0)
        nan_any = np.isnan(p).any(axis=0)
        p_lo = np.where(nan_any, np.minimum(p_lo, 0.0), p_lo)
        p_hi = np.where(nan_any, np.maximum(p_hi, 0.0), p_hi)
        return IArray(down(p_lo), up(p_hi))

    __rmul__ = __mul__

    def sqr(self) -> "IArray":
        a, b = self.lo * self.lo, self.hi * self.hi
        straddle = self.contains_zero()
        lo = np.where(straddle, 0.0, np.minimum(a, b))
        hi = np.maximum(a, b)
        return IArray(np.maximum(down(lo), 0.0), up(hi))

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError("only nonnegative integer powers are supported")
        if k == 0:
            return IArray.const_like(1.0, self.shape)
        if k == 1:
            return self
        if k % 2 == 0:
            return (self ** (k // 2)).sqr()
        return self * (self ** (k - 1))

    def recip(self) -> "IArray":
        straddle = self.contains_zero()
        with np.errstate(divide="ignore"):
            lo = np.where(straddle, -np.inf, 1.0 / self.hi)
            hi = np.where(straddle, np.inf, 1.0 / self.lo)
        return IArray(down(lo), up(hi))

    def __truediv__(self, other):
        return self * self._lift(other, self).recip()

    def hull(self, other: "IArray") -> "IArray":
        return IArray(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def intersect(self, other: "IArray") -> "IArray":
        return IArray(np.maximum(self.lo, other.lo), np.minimum(self.hi, other.hi))

    def __repr__(self):
        if self.lo.ndim == 0:
            return f"IArray([{self.lo!r}, {self.hi!r}])"
        return f"IArray(lo={self.lo!r}, hi={self.hi!r})"


# -- transcendental functions on IArray ------------------------------------

def iexp(x: IArray) -> IArray:
    with np.errstate(over="ignore"):
        lo, hi = _widen(np.exp(x.lo), np.exp(x.hi), _TRANSCENDENTAL_ULPS)
    return IArray(np.maximum(lo, 0.0), hi)


def ilog(x: IArray) -> IArray:
    """Natural log; requires positive input (nonpositive parts give -inf/nan)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        lo, hi = _widen(np.log(x.lo), np.log(x.hi), _TRANSCENDENTAL_ULPS)
    lo = np.where(x.lo <= 0.0, -np.inf, lo)
    hi = np.where(x.hi <= 0.0, np.nan, hi)
    return IArray(lo, hi)


def iabs(x: IArray) -> IArray:
    straddle = x.contains_zero()
    lo = np.where(straddle, 0.0, np.minimum(np.abs(x.lo), np.abs(x.hi)))
    return IArray(lo, x.mag())


def itan(x: IArray) -> IArray:
    """tan on intervals; boxes touching a pole give the whole line."""
    # branch index of each endpoint, computed with a safety margin
    k_lo = np.floor((x.lo + math.pi / 2) / math.pi)
    k_hi = np.floor((x.hi + math.pi / 2) / math.pi)
    pole_lo = (k_lo + 0.5) * math.pi  # first pole above x.lo
    near = np.abs(x.hi - pole_lo) < 1e-12 * np.maximum(1.0, np.abs(pole_lo))
    bad = (k_lo != k_hi) | near | ~np.isfinite(x.lo) | ~np.isfinite(x.hi)
    with np.errstate(invalid="ignore"):
        lo, hi = _widen(np.tan(x.lo), np.tan(x.hi), _TRANSCENDENTAL_ULPS)
    return IArray(np.where(bad, -np.inf, lo), np.where(bad, np.inf, hi))


def isqrt(x: IArray) -> IArray:
    with np.errstate(invalid="ignore"):
        lo, hi = _widen(np.sqrt(np.maximum(x.lo, 0.0)), np.sqrt(np.maximum(x.hi, 0.0)), 1)
    return IArray(np.maximum(lo, 0.0), hi)


def ipow_real(x: IArray, m: Fraction) -> IArray:
    """x**m for positive x and real exponent m, monotone on each side."""
    m = float(m)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        a = np.power(x.lo, m)
        b = np.power(x.hi, m)
    lo, hi = _widen(np.minimum(a, b), np.maximum(a, b), _TRANSCENDENTAL_ULPS)
    bad = x.lo <= 0.0
    return IArray(np.where(bad, -np.inf, np.maximum(lo, 0.0)), np.where(bad, np.inf, hi))


# -- compiled polynomial evaluation -----------------------------------------

class CompiledPoly:
    """A MultiPoly frozen into numpy arrays for fast vectorized evaluation.

    ``eval_interval`` returns a rigorous enclosure over boxes; ``eval_float``
    returns the float value and a rigorous bound on its rounding error.
    """

    def __init__(self, poly):
        self.nvars = poly.nvars
        items = poly.sorted_terms()
        self.nterms = len(items)
        self.exps = np.array([e for e, _ in items], dtype=np.int64).reshape(self.nterms, self.nvars)
        self.coeffs = [c for _, c in items]
        self.c_mid = np.array([float(c) for c in self.coeffs], dtype=np.float64)
        self.c_lo = np.array([frac_down(c) for c in self.coeffs], dtype=np.float64)
        self.c_hi = np.array([frac_up(c) for c in self.coeffs], dtype=np.float64)
        self.maxexp = self.exps.max(axis=0) if self.nterms else np.zeros(self.nvars, dtype=np.int64)
        u = 2.0**-53
        # each term picks up at most (nvars_deg + 1) roundings; the sum adds nterms - 1
        depth = int(self.exps.sum(axis=1).max()) + 1 if self.nterms else 1
        k = depth + max(self.nterms - 1, 0) + 2
        self._gamma = k * u / (1 - k * u)

    def _float_terms(self, xs: Sequence[np.ndarray]) -> np.ndarray:
        shape = np.broadcast(*xs).shape if xs else ()
        out = np.ones((self.nterms,) + shape)
        for v in range(self.nvars):
            if self.maxexp[v] == 0:
                continue
            x = np.asarray(xs[v], dtype=np.float64)
            powers = [np.ones_like(x)]
            for _ in range(int(self.maxexp[v])):
                powers.append(powers[-1] * x)
            table = np.stack(powers)
            out *= table[self.exps[:, v]]
        return out * self.c_mid.reshape((-1,) + (1,) * len(shape))

    def eval_float(self, xs: Sequence[np.ndarray]):
        """Value and rounding-error bound at points given coordinate-wise."""
        if self.nterms == 0:
            z = np.zeros(np.broadcast(*xs).shape if xs else ())
            return z, z
        terms = self._float_terms(xs)
        val = terms.sum(axis=0)
        err = self._gamma * np.abs(terms).sum(axis=0) + _TINY
        return val, err

    def __call__(self, *xs):
        return self.eval_float(xs)[0]

    def eval_interval(self, xs: Sequence[IArray]) -> IArray:
        shape = np.broadcast(*[x.lo for x in xs]).shape if xs else ()
        if self.nterms == 0:
            return IArray(np.zeros(shape), np.zeros(shape))
        acc_lo = np.ones((self.nterms,) + shape)
        acc_hi = np.ones((self.nterms,) + shape)
        acc = IArray(acc_lo, acc_hi)
        for v in range(self.nvars):
            if self.maxexp[v] == 0:
                continue
            x = xs[v]
            pw = [IArray(np.ones(shape), np.ones(shape))]
            for k in range(1, int(self.maxexp[v]) + 1):
                pw.append(pw[k // 2].sqr() if k % 2 == 0 else pw[k - 1] * x)
            pw_lo = [np.broadcast_to(p.lo, shape) for p in pw]
            pw_hi = [np.broadcast_to(p.hi, shape) for p in pw]
            tlo = np.stack(pw_lo)[self.exps[:, v]]
            thi = np.stack(pw_hi)[self.exps[:, v]]
            acc = acc * IArray(tlo, thi)
        cshape = (-1,) + (1,) * len(shape)
        acc = acc * IArray(self.c_lo.reshape(cshape), self.c_hi.reshape(cshape))
        return isum(acc)


def isum(x: IArray, axis: int = 0) -> IArray:
    """Rigorous sum of intervals along ``axis``."""
    n = x.lo.shape[axis]
    u = 2.0**-53
    g = (n + 1) * u / (1 - (n + 1) * u)
    with np.errstate(invalid="ignore"):
        slo = x.lo.sum(axis=axis)
        shi = x.hi.sum(axis=axis)
        elo = g * np.abs(x.lo).sum(axis=axis) + _TINY
        ehi = g * np.abs(x.hi).sum(axis=axis) + _TINY
    return IArray(down(slo - elo), up(shi + ehi))


# -- scalar high-precision backend ------------------------------------------

iv = mpmath.iv


def mp_interval(lo, hi=None):
    """mpmath interval from rationals or floats, rounded outward."""
    hi = lo if hi is None else hi
    with hiprec():
        a = iv.mpf(_mp_endpoint(lo))
        b = iv.mpf(_mp_endpoint(hi))
        return iv.mpf([a.a, b.b])


def _mp_endpoint(q):
    if isinstance(q, Fraction):
        return iv.mpf(q.numerator) / q.denominator
    return q


def mp_eval_poly(poly, xs):
    """Evaluate a MultiPoly on mpmath intervals (or mpf points)."""
    total = 0
    for e, c in poly.items():
        term = iv.mpf(c.numerator) / c.denominator
        for x, k in zip(xs, e):
            if k:
                term = term * x**k
        total = total + term
    return total


@dataclass(frozen=True)
class Interval:
    """Scalar closed interval with exact rational or float endpoints."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def sign(self) -> int | None:
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == self.hi == 0:
            return 0
        return None

    @classmethod
    def from_iarray(cls, x: IArray) -> "Interval":
        return cls(float(x.lo), float(x.hi))

    @classmethod
    def from_mp(cls, x) -> "Interval":
        return cls(frac_down(mpf_to_fraction(x.a)), frac_up(mpf_to_fraction(x.b)))


def mpf_to_fraction(x) -> Fraction:
    """Exact rational value of a finite mpmath number."""
    x = mpmath.mpf(x)
    if not mpmath.isfinite(x):
        raise ValueError(f"not a finite number: {x}")
    sign, man, exp, _ = x._mpf_
    man = -int(man) if sign else int(man)
    return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2**-exp)
