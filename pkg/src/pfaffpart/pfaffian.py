"""Pfaffian functions over a chain: evaluation, differentiation, algebra."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .chains import Format, PfaffianChain, chain_from_json
from .interval import CompiledPoly, IArray, Interval, PRECISION, hiprec, iv, mp_eval_poly
from .poly import MultiPoly


@dataclass(frozen=True)
class PfaffianFunction:
    """f(x) = Q(x, q_1(x), ..., q_r(x)) for a polynomial Q in n + r variables."""

    chain: PfaffianChain
    Q: MultiPoly

    def __post_init__(self):
        if self.Q.nvars != self.chain.n + self.chain.r:
            raise ValueError(
                f"Q has {self.Q.nvars} variables; chain needs n + r = {self.chain.n + self.chain.r}"
            )

    def format(self) -> Format:
        c = self.chain
        return Format(alpha=c.alpha, beta=self.Q.degree(), r=c.r, n=c.n, xi=c.xi)

    @property
    def n(self) -> int:
        return self.chain.n

    def is_zero(self) -> bool:
        return self.Q.is_zero()

    @cached_property
    def compiled(self) -> CompiledPoly:
        return CompiledPoly(self.Q)

    # -- vectorized evaluation
    def eval_float(self, xs: Sequence[np.ndarray]):
        """Float values and rounding-error bounds of Q at the lifted points.

        The bound covers only the polynomial stage, not the chain values.
        """
        lifted = self.chain.lift_float([np.asarray(x, dtype=np.float64) for x in xs])
        return self.compiled.eval_float(lifted)

    def eval_interval(self, xs: Sequence[IArray]) -> IArray:
        return self.compiled.eval_interval(self.chain.lift_interval(list(xs)))

    def eval_mp(self, xs: Sequence):
        return mp_eval_poly(self.Q, list(xs) + self.chain.eval_mp(xs))

    def __add__(self, other):
        return pf_add(self, other)

    def __mul__(self, other):
        return pf_mul(self, other)

    def to_json(self) -> dict:
        return {"chain": self.chain.to_json(), "Q": self.Q.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "PfaffianFunction":
        return cls(chain_from_json(obj["chain"]), MultiPoly.from_json(obj["Q"]))


def _is_box(x) -> bool:
    if isinstance(x, IArray):
        return True
    return len(x) > 0 and all(isinstance(v, (tuple, list, Interval, IArray)) for v in x)


def _box_arrays(x) -> list[IArray]:
    if isinstance(x, IArray):
        return [x[i] for i in range(len(x))]
    out = []
    for v in x:
        if isinstance(v, IArray):
            out.append(v)
        elif isinstance(v, Interval):
            out.append(IArray(v.lo, v.hi))
        else:
            lo, hi = v
            lo = Fraction(lo) if isinstance(lo, (int, Fraction)) else lo
            hi = Fraction(hi) if isinstance(hi, (int, Fraction)) else hi
            out.append(IArray._lift(lo, None).hull(IArray._lift(hi, None)))
    return out


def pf_eval(f: PfaffianFunction, x):
    """Evaluate at a point (float result) or over a box (certified Interval).

    A box is a sequence of ``(lo, hi)`` pairs, one per variable.
    """
    if len(x) != f.n:
        raise ValueError(f"expected {f.n} coordinates, got {len(x)}")
    if _is_box(x):
        box = _box_arrays(x)
        if not f.chain.domain.contains_box([b.lo for b in box], [b.hi for b in box]):
            raise ValueError("box is outside the chain domain")
        return Interval.from_iarray(f.eval_interval(box))
    if not f.chain.domain.contains(x):
        raise ValueError(f"point {list(x)} is outside the chain domain")
    val, _ = f.eval_float([np.float64(float(v)) for v in x])
    return float(val)


def pf_eval_mp(f: PfaffianFunction, x: Sequence, bits: int | None = None) -> Interval:
    """High-precision interval enclosure at a rational point."""
    bits = bits or PRECISION.escalation_bits
    with hiprec(bits):
        xs = []
        for v in x:
            q = Fraction(v)
            xs.append(iv.mpf(q.numerator) / q.denominator)
        val = mp_eval_poly(f.Q, xs + f.chain.eval_mp(xs))
        return Interval.from_mp(val)


def pf_derive(f: PfaffianFunction, i: int) -> PfaffianFunction:
    """Partial derivative in X_i (1-based) using the chain's differential data."""
    c = f.chain
    if not 1 <= i <= c.n:
        raise IndexError(f"variable index {i} not in 1..{c.n}")
    out = f.Q.diff(i - 1)
    for j in range(c.r):
        dq = f.Q.diff(c.n + j)
        if not dq.is_zero():
            out = out + dq * c.deriv_lifted(i - 1, j)
    return PfaffianFunction(c, out)


def _check_same_chain(f: PfaffianFunction, g: PfaffianFunction) -> None:
    if f.chain != g.chain:
        raise ValueError("Pfaffian functions are defined over different chains")


def pf_add(f: PfaffianFunction, g: PfaffianFunction) -> PfaffianFunction:
    _check_same_chain(f, g)
    return PfaffianFunction(f.chain, f.Q + g.Q)


def pf_mul(f: PfaffianFunction, g: PfaffianFunction) -> PfaffianFunction:
    _check_same_chain(f, g)
    return PfaffianFunction(f.chain, f.Q * g.Q)


@dataclass(frozen=True)
class ParametricCurve:
    """t -> (f_1(t), ..., f_n(t)) over a univariate chain on an open interval."""

    chain1d: PfaffianChain
    coords: tuple
    domain: tuple  # (a, b), endpoints Fraction or +-inf

    def __post_init__(self):
        if self.chain1d.n != 1:
            raise ValueError("curve chain must be univariate")
        if any(c.chain != self.chain1d for c in self.coords):
            raise ValueError("all coordinates must share the curve chain")
        a, b = self.domain
        if not a < b:
            raise ValueError("curve domain must satisfy a < b")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @classmethod
    def from_polys(cls, chain1d: PfaffianChain, polys: Sequence[MultiPoly], domain) -> "ParametricCurve":
        a, b = domain
        conv = lambda v: v if isinstance(v, float) and math.isinf(v) else Fraction(v)
        return cls(chain1d, tuple(PfaffianFunction(chain1d, p) for p in polys), (conv(a), conv(b)))

    def point_float(self, t: np.ndarray) -> list[np.ndarray]:
        return [c.eval_float([t])[0] for c in self.coords]

    def tangent(self) -> list[PfaffianFunction]:
        return [pf_derive(c, 1) for c in self.coords]

    def to_json(self) -> dict:
        enc = lambda v: str(v) if not (isinstance(v, float) and math.isinf(v)) else ("inf" if v > 0 else "-inf")
        return {
            "chain": self.chain1d.to_json(),
            "coords": [c.Q.to_json() for c in self.coords],
            "domain": [enc(self.domain[0]), enc(self.domain[1])],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ParametricCurve":
        chain = chain_from_json(obj["chain"])
        dec = lambda v: float(v) if v in ("inf", "-inf") else Fraction(v)
        a, b = (dec(v) for v in obj["domain"])
        return cls(chain, tuple(PfaffianFunction(chain, MultiPoly.from_json(q)) for q in obj["coords"]), (a, b))


def pf_compose_curve(P: MultiPoly, gamma: ParametricCurve) -> PfaffianFunction:
    """The restriction t -> P(gamma(t)) as a Pfaffian function of t."""
    if P.nvars != gamma.dim:
        raise ValueError(f"P has {P.nvars} variables but the curve lives in R^{gamma.dim}")
    return PfaffianFunction(gamma.chain1d, P.compose([c.Q for c in gamma.coords]))
