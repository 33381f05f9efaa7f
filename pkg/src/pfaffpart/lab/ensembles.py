"""Random polynomial ensembles restricted to the curve t -> (t, e^t).

A polynomial P(x, y) of degree D restricts to sum c_ab t^a e^(bt). Dense
Gaussian coefficients give few sign changes on a bounded window, so half of
each ensemble is planted: P is a product of low-degree factors, each
interpolating the curve through as many well-separated points as its
monomial count allows, which pushes the number of curve components toward
the top of its range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..poly import MultiPoly, graded_lex_exponents

WINDOW = (-3.0, 3.0)


@dataclass(frozen=True)
class EnsembleMember:
    poly: MultiPoly
    kind: str  # "dense" or "planted"
    parts: tuple  # factor degrees for planted members
    redraws: int


def _restricted_terms(exps, coeffs, t: np.ndarray):
    """Float terms c t^a e^(bt) of P(t, e^t), one row per monomial."""
    return np.array([c * t**a * np.exp(b * t) for (a, b), c in zip(exps, coeffs)])


def well_conditioned(poly: MultiPoly, window=WINDOW, grid: int = 20001, rel: float = 1e-12) -> bool:
    """Every zero-free run of P(t, e^t) on a fine grid reaches |P| >= rel * sum |terms|.

    Rejects instances whose sign pattern hinges on cancellation at the level of
    rounding, where any sampling-based count is unreliable.
    """
    t = np.linspace(window[0], window[1], grid)
    items = poly.sorted_terms()
    terms = _restricted_terms([e for e, _ in items], [float(c) for _, c in items], t)
    v, s = terms.sum(axis=0), np.abs(terms).sum(axis=0)
    sg = np.sign(v)
    if np.any(sg == 0):
        return False
    cuts = np.flatnonzero(sg[1:] != sg[:-1]) + 1
    amp = np.abs(v) / s
    return all(seg.max() >= rel and len(seg) >= 3 for seg in np.split(amp, cuts))


def _partition_degree(D: int, rng: np.random.Generator, max_part: int = 4) -> tuple:
    parts, rem = [], D
    while rem:
        p = int(rng.integers(1, min(max_part, rem) + 1))
        parts.append(p)
        rem -= p
    return tuple(sorted(parts, reverse=True))


def _interpolating_factor(d: int, pts: np.ndarray) -> MultiPoly:
    """Degree-d P with P(p, e^p) = 0 at the given points (null vector of the
    column-scaled interpolation matrix)."""
    exps = graded_lex_exponents(2, d)
    M = np.array([[p**a * math.exp(b * p) for a, b in exps] for p in pts])
    scale = np.abs(M).max(axis=0)
    scale[scale == 0] = 1.0
    _, _, vt = np.linalg.svd(M / scale)
    c = vt[-1] / scale
    c = c / np.abs(c).max()
    return MultiPoly(2, {e: Fraction(float(v)) for e, v in zip(exps, c)})


def dense_member(D: int, rng: np.random.Generator) -> MultiPoly:
    exps = graded_lex_exponents(2, D)
    g = rng.standard_normal(len(exps))
    return MultiPoly(2, {e: Fraction(float(v)) for e, v in zip(exps, g)})


def planted_member(D: int, rng: np.random.Generator, window=WINDOW):
    parts = _partition_degree(D, rng)
    sizes = [math.comb(d + 2, 2) - 1 for d in parts]
    total = sum(sizes)
    # jittered Chebyshev nodes: interpolants oscillate more evenly than with uniform nodes
    half = (window[1] - window[0]) / 2 - 0.05
    mid = (window[1] + window[0]) / 2
    pts = mid - half * np.cos(np.pi * (np.arange(total) + 0.25 + 0.5 * rng.random(total)) / total)
    rng.shuffle(pts)
    poly = MultiPoly.const(2, 1)
    k = 0
    for d, m in zip(parts, sizes):
        poly = poly * _interpolating_factor(d, np.sort(pts[k:k + m]))
        k += m
    return poly, parts


def curve_ensemble(D: int, count: int = 500, seed: int = 0xC0FFEE, max_redraws: int = 50) -> list[EnsembleMember]:
    """``count`` polynomials of degree D: first half dense Gaussian, second half planted."""
    rng = np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), D]))
    out = []
    for i in range(count):
        kind = "dense" if i < count // 2 else "planted"
        for redraw in range(max_redraws + 1):
            if kind == "dense":
                poly, parts = dense_member(D, rng), ()
            else:
                poly, parts = planted_member(D, rng)
            if poly.degree() == D and well_conditioned(poly):
                break
        out.append(EnsembleMember(poly, kind, parts, redraw))
    return out


def fit_loglog(xs, ys) -> float:
    """Least-squares slope of log y against log x."""
    x = np.log(np.asarray(xs, dtype=float))
    y = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(x, y, 1)[0])
