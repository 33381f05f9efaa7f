"""Incidence instances, certified incidence counting and K_{s,t} checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..chains import chain_builtin
from ..interval import CompiledPoly, IArray, frac_down, frac_up
from ..pfaffian import ParametricCurve, PfaffianFunction
from ..poly import MultiPoly
from ..topology import SolveConfig, _Univariate, isolate_roots_1d, simplest_rational

INF = float("inf")


@dataclass
class IncidenceInstance:
    points: list  # tuples of Fractions
    curves: list  # MultiPoly (implicit, zero set in R^2) or ParametricCurve
    ground_truth: list | None = None  # planted (point index, curve index) pairs
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.points[0]) if self.points else 2

    def to_json(self) -> dict:
        return {
            "points": [[str(v) for v in p] for p in self.points],
            "curves": [_curve_to_json(c) for c in self.curves],
            "ground_truth": None if self.ground_truth is None else [list(e) for e in self.ground_truth],
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "IncidenceInstance":
        gt = obj.get("ground_truth")
        return cls(
            [tuple(Fraction(v) for v in p) for p in obj["points"]],
            [_curve_from_json(c) for c in obj["curves"]],
            None if gt is None else [tuple(e) for e in gt],
            dict(obj.get("meta", {})),
        )


def _curve_to_json(c) -> dict:
    if isinstance(c, MultiPoly):
        return {"kind": "implicit", "poly": c.to_json()}
    return {"kind": "parametric", **c.to_json()}


def _curve_from_json(obj: dict):
    if obj["kind"] == "implicit":
        return MultiPoly.from_json(obj["poly"])
    return ParametricCurve.from_json(obj)


@dataclass
class IncidenceGraph:
    n_points: int
    n_curves: int
    edges: list  # sorted (point, curve) pairs with certified membership
    uncertain: list = field(default_factory=list)

    def neighbors_of_points(self) -> list[set]:
        adj = [set() for _ in range(self.n_points)]
        for p, c in self.edges:
            adj[p].add(c)
        return adj

    def to_json(self) -> dict:
        return {
            "n_points": self.n_points,
            "n_curves": self.n_curves,
            "edges": [list(e) for e in self.edges],
            "uncertain": [list(e) for e in self.uncertain],
        }


# -- generators -------------------------------------------------------------------------

def _line(m, b) -> MultiPoly:
    x, y = MultiPoly.var(2, 0), MultiPoly.var(2, 1)
    return y - x * m - b


def _circle(cx, cy, rad) -> MultiPoly:
    x, y = MultiPoly.var(2, 0), MultiPoly.var(2, 1)
    return (x - cx) ** 2 + (y - cy) ** 2 - Fraction(rad) ** 2


def _unit_circle_point(u: Fraction) -> tuple:
    """Rational point on the unit circle from the stereographic parameter u."""
    d = 1 + u * u
    return ((1 - u * u) / d, 2 * u / d)


def _exp_curve(a, b, c, window) -> ParametricCurve:
    """(t, a e^(b t) + c) for t in (-window, window)."""
    chain = chain_builtin("exp", [b])
    t, y = MultiPoly.var(2, 0), MultiPoly.var(2, 1)
    return ParametricCurve.from_polys(chain, [t, y * a + c], (-window, window))


def gen_incidence(kind: str, params: dict | None = None, seed: int = 0xC0FFEE) -> IncidenceInstance:
    """Generate an incidence instance.

    line_grid(k): points [1..k] x [1..2k^2] and lines y = m x + b with
        m in [1..k], b in [1..k^2]; every line holds k grid points.
    circles: unit circles with rational centers and rational points planted
        on them (or explicit ``centers``/``radii``/``points``).
    exp_curves: y = a e^(b x) + c with rational data; with rational a, b, c
        such a curve holds exactly one rational point, at x = 0, which is planted.
    planted: N rational points on the Pfaffian curve
        (t, c + a e^(b t) (t - t_1)...(t - t_N)).
    """
    params = dict(params or {})
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    meta = {"generator": kind, "seed": seed, "params": _jsonable(params)}
    if kind == "line_grid":
        k = int(params.get("k", 2))
        points = [(Fraction(x), Fraction(y)) for x in range(1, k + 1) for y in range(1, 2 * k * k + 1)]
        index = {p: i for i, p in enumerate(points)}
        curves, truth = [], []
        for m in range(1, k + 1):
            for b in range(1, k * k + 1):
                ci = len(curves)
                curves.append(_line(m, b))
                truth.extend((index[(Fraction(x), Fraction(m * x + b))], ci) for x in range(1, k + 1))
        meta["kst"] = [2, 2]
        meta["theta_note"] = "lines are irreducible and pairwise distinct"
        return IncidenceInstance(points, curves, sorted(truth), meta)
    if kind == "circles":
        if "centers" in params:
            centers = [tuple(Fraction(v) for v in c) for c in params["centers"]]
            radii = [Fraction(r) for r in params.get("radii", [1] * len(centers))]
            points = [tuple(Fraction(v) for v in p) for p in params.get("points", [])]
            curves = [_circle(cx, cy, r) for (cx, cy), r in zip(centers, radii)]
            meta["kst"] = [2, 3]
            return IncidenceInstance(points, curves, None, meta)
        count = int(params.get("count", 8))
        per = int(params.get("points_per_circle", 4))
        grid = int(params.get("grid", 4))
        centers = set()
        while len(centers) < count:
            centers.add(tuple(Fraction(int(v), 2) for v in rng.integers(-2 * grid, 2 * grid + 1, size=2)))
        centers = sorted(centers)
        pts: dict = {}
        for cx, cy in centers:
            for _ in range(per):
                u = Fraction(int(rng.integers(-12, 13)), int(rng.integers(1, 7)))
                px, py = _unit_circle_point(u)
                pts.setdefault((cx + px, cy + py), None)
        points = sorted(pts)
        curves = [_circle(cx, cy, 1) for cx, cy in centers]
        meta["kst"] = [2, 3]
        meta["theta_note"] = "distinct unit circles share at most two points"
        truth = [(i, j) for i, p in enumerate(points) for j, c in enumerate(curves) if c.evaluate(p) == 0]
        return IncidenceInstance(points, curves, truth, meta)
    if kind == "exp_curves":
        count = int(params.get("count", 6))
        window = Fraction(params.get("window", 4))
        extra = int(params.get("extra_points", 6))
        seen, curves, points, data = set(), [], [], []
        while len(curves) < count:
            a = Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 4))) * (1 if rng.random() < 0.5 else -1)
            b = Fraction(int(rng.integers(1, 5)), int(rng.integers(1, 3))) * (1 if rng.random() < 0.5 else -1)
            c = Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 3)))
            if (a, b, c) in seen:
                continue
            seen.add((a, b, c))
            data.append((a, b, c))
            curves.append(_exp_curve(a, b, c, window))
            if (Fraction(0), a + c) not in points:
                points.append((Fraction(0), a + c))
        for _ in range(extra):
            p = (Fraction(int(rng.integers(-30, 31)), 8), Fraction(int(rng.integers(-40, 41)), 4))
            if p[0] != 0 and p not in points:
                points.append(p)
        # the only rational point of y = a e^(bx) + c is (0, a + c)
        truth = sorted((i, j) for j, (a, _, c) in enumerate(data) for i, p in enumerate(points)
                       if p == (0, a + c))
        meta["kst"] = [3, 2]
        meta["theta_note"] = "two distinct curves y = a e^(bx) + c meet at most twice"
        return IncidenceInstance(points, curves, truth, meta)
    if kind == "planted":
        N = int(params.get("N", 10))
        a = Fraction(params.get("a", 1))
        b = Fraction(params.get("b", 1))
        c = Fraction(params.get("c", 0))
        window = Fraction(params.get("window", 4))
        ts = sorted({Fraction(int(v), 4) for v in rng.choice(np.arange(-12, 13), size=N, replace=False)})
        t, y = MultiPoly.var(2, 0), MultiPoly.var(2, 1)
        vanish = MultiPoly.const(2, 1)
        for ti in ts:
            vanish = vanish * (t - ti)
        curve = ParametricCurve.from_polys(chain_builtin("exp", [b]), [t, y * vanish * a + c], (-window, window))
        points = [(ti, c) for ti in ts]
        meta["kst"] = [2, 2]
        return IncidenceInstance(points, [curve], [(i, 0) for i in range(len(points))], meta)
    raise ValueError(f"unknown generator {kind!r}")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


# -- membership ----------------------------------------------------------------------------

def _implicit_incidences(curve: MultiPoly, points: Sequence, floats: np.ndarray, exact_float: np.ndarray) -> list[int]:
    """Indices of points on the zero set, decided exactly."""
    cp = CompiledPoly(curve)
    val, err = cp.eval_float([floats[:, 0], floats[:, 1]])
    near = np.flatnonzero((np.abs(val) <= err) | ~exact_float)
    return [int(i) for i in near if curve.evaluate(points[i]) == 0]


def _float_exact_mask(points, floats) -> np.ndarray:
    """Points whose float coordinates are their exact values."""
    return np.array([all(Fraction(float(v)) == v for v in p) for p in points], dtype=bool)


def _is_identity_param(f: PfaffianFunction) -> bool:
    return f.Q == MultiPoly.var(f.Q.nvars, 0)


def curve_membership(point: Sequence[Fraction], curve: ParametricCurve, cfg: SolveConfig | None = None):
    """True / False when certified, None when undecided.

    One coordinate equation gamma_j(t) = p_j is solved with certified root
    isolation; each isolated root is then checked against the remaining
    coordinates, exactly at rational roots and with interval enclosures
    elsewhere.
    """
    cfg = cfg or SolveConfig()
    a, b = curve.domain
    diffs = [PfaffianFunction(c.chain, c.Q - p) for c, p in zip(curve.coords, point)]
    order = [j for j in range(len(diffs)) if not diffs[j].Q.is_constant()]
    for j, d in enumerate(diffs):
        if d.Q.is_constant() and d.Q.constant_term() != 0:
            return False
    if not order:
        return True  # constant curve sitting on the point
    j0 = order[0]
    rest = [diffs[j] for j in range(len(diffs)) if j != j0]
    if _is_identity_param(curve.coords[j0]):
        t0 = Fraction(point[j0])
        if not (a < t0 < b):
            return False
        return _check_rest_at_rational(rest, t0)
    res = isolate_roots_1d(diffs[j0], (a, b), cfg)
    undecided = bool(res.suspects)
    found = False
    for iv_ in res.intervals:
        verdict = _check_rest_on_interval(diffs[j0], rest, Fraction(iv_.lo), Fraction(iv_.hi))
        if verdict is True:
            found = True
        elif verdict is None:
            undecided = True
    for lo, hi in res.suspects:
        if _excluded(rest, Fraction(lo), Fraction(hi)) is not True:
            undecided = True
    if found:
        return True
    return None if undecided else False


def _check_rest_at_rational(rest, t0: Fraction):
    verdict = True
    for g in rest:
        sign, exact = _Univariate(g, orders=0).mp_sign(t0)
        if sign != 0:
            return False
        if not exact:
            verdict = None
    return verdict


def _excluded(rest, lo: Fraction, hi: Fraction):
    """True if some remaining coordinate is certified nonzero on [lo, hi]."""
    for g in rest:
        u = _Univariate(g, orders=0)
        (v,) = u.interval(np.array([frac_down(lo)]), np.array([frac_up(hi)]), orders=(0,))
        if v.lo[0] > 0 or v.hi[0] < 0:
            return True
    return None


def _check_rest_on_interval(f, rest, lo: Fraction, hi: Fraction):
    """Root of f isolated in [lo, hi]; decide whether the rest vanish there."""
    uf = _Univariate(f, orders=0)
    for _ in range(200):
        if _excluded(rest, lo, hi):
            return False
        c = simplest_rational(lo, hi)
        sign, exact = uf.mp_sign(c)
        if exact:
            return _check_rest_at_rational(rest, c)
        s_lo, _ = uf.mp_sign(lo)
        if s_lo == 0 or sign == 0:
            break
        if sign == s_lo:
            lo = c if c != lo else (lo + hi) / 2
        else:
            hi = c if c != hi else (lo + hi) / 2
        if hi - lo < Fraction(1, 2**120):
            break
    return False if _excluded(rest, lo, hi) else None


def count_incidences(inst: IncidenceInstance, cfg: SolveConfig | None = None):
    """Number of certified incidences and the incidence graph."""
    pts = inst.points
    floats = np.array([[float(v) for v in p] for p in pts], dtype=np.float64).reshape(len(pts), inst.n)
    exact_float = _float_exact_mask(pts, floats)
    edges, uncertain = [], []
    for ci, curve in enumerate(inst.curves):
        if isinstance(curve, MultiPoly):
            if curve.is_zero():
                raise ValueError("implicit curve is the zero polynomial")
            edges.extend((pi, ci) for pi in _implicit_incidences(curve, pts, floats, exact_float))
            continue
        pre = _parametric_prefilter(curve, floats)
        for pi in np.flatnonzero(pre):
            verdict = curve_membership(pts[pi], curve, cfg)
            if verdict is True:
                edges.append((int(pi), ci))
            elif verdict is None:
                uncertain.append((int(pi), ci))
    edges.sort()
    uncertain.sort()
    return len(edges), IncidenceGraph(len(pts), len(inst.curves), edges, uncertain)


def _parametric_prefilter(curve: ParametricCurve, floats: np.ndarray) -> np.ndarray:
    """Points that might lie on the curve; exclusion is certified by intervals."""
    keep = np.ones(len(floats), dtype=bool)
    if not len(floats):
        return keep
    a, b = curve.domain
    if not (math.isfinite(float(a)) and math.isfinite(float(b))):
        return keep
    T = IArray(np.array([frac_down(Fraction(a))]), np.array([frac_up(Fraction(b))]))
    for j, c in enumerate(curve.coords):
        box = c.eval_interval([T])
        if np.isfinite(box.lo[0]) and np.isfinite(box.hi[0]):
            keep &= (floats[:, j] >= box.lo[0]) & (floats[:, j] <= box.hi[0])
    return keep


# -- K_{s,t} ---------------------------------------------------------------------------------

def kst_free(g: IncidenceGraph, s: int, t: int, limit: int | None = None) -> bool:
    """True iff no s points and t curves are mutually incident."""
    if s < 1 or t < 1:
        raise ValueError("s and t must be at least 1")
    if limit is None:
        limit = 2000 if s <= 3 else 200
    adj = g.neighbors_of_points()
    cand = [i for i in range(g.n_points) if len(adj[i]) >= t]
    if len(cand) > limit:
        raise ValueError(f"{len(cand)} candidate points exceed the search limit {limit}")

    def extend(start: int, depth: int, common: set) -> bool:
        if depth == s:
            return len(common) >= t
        for k in range(start, len(cand)):
            nxt = common & adj[cand[k]] if depth else adj[cand[k]]
            if len(nxt) >= t and extend(k + 1, depth + 1, nxt):
                return True
        return False

    if s == 1:
        return not cand
    return not extend(0, 0, set())


__all__ = [
    "IncidenceInstance", "IncidenceGraph", "gen_incidence", "count_incidences", "kst_free",
    "curve_membership",
]
