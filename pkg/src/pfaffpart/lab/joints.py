"""Joints: points where one curve from each of n families meet with spanning tangents."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..chains import chain_builtin, product_chain
from ..interval import IArray, frac_down, frac_up
from ..pfaffian import ParametricCurve, PfaffianFunction
from ..poly import MultiPoly
from ..topology import SolveConfig, simplest_rational, solve_system_2d
from .incidence import curve_membership

INF = float("inf")


@dataclass
class JointsInstance:
    families: list  # n lists of ParametricCurve in R^n
    ground_truth: list | None = None  # planted joints as tuples of Fractions
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.families)

    def to_json(self) -> dict:
        return {
            "families": [[c.to_json() for c in fam] for fam in self.families],
            "ground_truth": None if self.ground_truth is None else [[str(v) for v in p] for p in self.ground_truth],
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "JointsInstance":
        gt = obj.get("ground_truth")
        return cls(
            [[ParametricCurve.from_json(c) for c in fam] for fam in obj["families"]],
            None if gt is None else [tuple(Fraction(v) for v in p) for p in gt],
            dict(obj.get("meta", {})),
        )


@dataclass
class Joint:
    point: tuple  # exact Fractions, or (lo, hi) float pairs when only enclosed
    exact: bool
    curves: tuple  # one (family, index) per family
    span: float  # |det| of the unit tangent rows (lower bound when enclosed)

    def to_json(self) -> dict:
        pt = [str(v) for v in self.point] if self.exact else [[repr(a), repr(b)] for a, b in self.point]
        return {"point": pt, "exact": self.exact, "curves": [list(c) for c in self.curves], "span": repr(self.span)}


@dataclass
class JointsResult:
    joints: list
    uncertain: list  # candidate descriptions that could not be decided

    @property
    def count(self) -> int:
        return len(self.joints)

    def points(self) -> set:
        return {j.point for j in self.joints if j.exact}

    def to_json(self) -> dict:
        return {"count": self.count, "joints": [j.to_json() for j in self.joints], "uncertain": self.uncertain}


# -- generators -----------------------------------------------------------------------------

def line_curve(point: Sequence, direction: Sequence) -> ParametricCurve:
    """The line t -> point + t direction over the whole real line."""
    chain = chain_builtin("empty", n=1)
    t = MultiPoly.var(1, 0)
    coords = [t * Fraction(d) + Fraction(p) for p, d in zip(point, direction)]
    return ParametricCurve.from_polys(chain, coords, (-INF, INF))


def gen_joints(kind: str, params: dict | None = None, seed: int = 0xC0FFEE) -> JointsInstance:
    """axis_grid(k): 3 families of k^2 axis-parallel lines through [1..k]^3.
    coordinate_axes: the three axes of R^3. coplanar: three concurrent lines
    in a plane. exp_planar(k): R^2 with horizontal lines y = c and graphs
    y = e^x + c meeting transversally.
    """
    params = dict(params or {})
    meta = {"generator": kind, "seed": seed, "params": {k: str(v) for k, v in params.items()}}
    if kind == "axis_grid":
        k = int(params.get("k", 2))
        fams = []
        for axis in range(3):
            fam = []
            others = [i for i in range(3) if i != axis]
            for u in range(1, k + 1):
                for v in range(1, k + 1):
                    p = [0, 0, 0]
                    p[others[0]], p[others[1]] = u, v
                    d = [0, 0, 0]
                    d[axis] = 1
                    fam.append(line_curve(p, d))
            fams.append(fam)
        truth = [tuple(Fraction(v) for v in p) for p in itertools.product(range(1, k + 1), repeat=3)]
        return JointsInstance(fams, truth, meta)
    if kind == "coordinate_axes":
        fams = [[line_curve((0, 0, 0), tuple(int(i == a) for i in range(3)))] for a in range(3)]
        return JointsInstance(fams, [(Fraction(0),) * 3], meta)
    if kind == "coplanar":
        dirs = [(1, 0, 0), (0, 1, 0), (1, 1, 0)]
        return JointsInstance([[line_curve((0, 0, 0), d)] for d in dirs], [], meta)
    if kind == "exp_planar":
        k = int(params.get("k", 2))
        window = Fraction(params.get("window", 3))
        chain = chain_builtin("exp", [1])
        t, y = MultiPoly.var(2, 0), MultiPoly.var(2, 1)
        graphs = [ParametricCurve.from_polys(chain, [t, y + c], (-window, window)) for c in range(k)]
        empty = chain_builtin("empty", n=1)
        s = MultiPoly.var(1, 0)
        lines = [ParametricCurve.from_polys(empty, [s, MultiPoly.const(1, c + 2)], (-window, window)) for c in range(k)]
        return JointsInstance([lines, graphs], None, meta)
    raise ValueError(f"unknown joints generator {kind!r}")


def rigid_motion(inst: JointsInstance, R: Sequence[Sequence], v: Sequence, perm: Sequence[int] | None = None) -> JointsInstance:
    """Apply x -> R x + v to every curve (exact for rational R, v) and optionally
    permute the families."""
    R = [[Fraction(a) for a in row] for row in R]
    v = [Fraction(a) for a in v]
    fams = []
    for fam in inst.families:
        out = []
        for c in fam:
            qs = [c.Q for c in c.coords]
            new = []
            for i in range(len(R)):
                acc = MultiPoly.const(qs[0].nvars, v[i])
                for j in range(len(R)):
                    if R[i][j]:
                        acc = acc + qs[j] * R[i][j]
                new.append(acc)
            out.append(ParametricCurve.from_polys(c.chain1d, new, c.domain))
        fams.append(out)
    if perm is not None:
        fams = [fams[p] for p in perm]
    truth = None
    if inst.ground_truth is not None:
        truth = [tuple(sum((R[i][j] * p[j] for j in range(len(p))), Fraction(0)) + v[i] for i in range(len(p)))
                 for p in inst.ground_truth]
    return JointsInstance(fams, truth, dict(inst.meta))


# -- detection ---------------------------------------------------------------------------------

def _as_line(c: ParametricCurve):
    """(point, direction) as Fractions if c is a nondegenerate line, else None."""
    if c.chain1d.r != 0 or any(q.Q.degree() > 1 for q in c.coords):
        return None
    a = [q.Q.partial({0: 0}).constant_term() for q in c.coords]
    b = [q.Q.partial({0: 1}).constant_term() - ai for q, ai in zip(c.coords, a)]
    if all(x == 0 for x in b):
        return None
    return a, b


def _det(M: list) -> Fraction:
    """Exact determinant by fraction-free elimination."""
    M = [row[:] for row in M]
    n = len(M)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            det = -det
        det *= M[col][col]
        for r in range(col + 1, n):
            f = M[r][col] / M[col][col]
            if f:
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return det


def _spans(dirs: list, tol: Fraction) -> tuple[bool, float]:
    """|det| of the unit-normalized rows >= tol, decided exactly via squares."""
    d = _det(dirs)
    norms2 = Fraction(1)
    for row in dirs:
        norms2 *= sum(x * x for x in row)
    return d * d >= tol * tol * norms2, math.sqrt(float(d * d / norms2))


def _intersect_lines(a1, b1, a2, b2):
    """Exact intersection point of two non-parallel lines, or None."""
    n = len(a1)
    for i, j in itertools.combinations(range(n), 2):
        det = b1[i] * (-b2[j]) - (-b2[i]) * b1[j]
        if det == 0:
            continue
        ri, rj = a2[i] - a1[i], a2[j] - a1[j]
        s = (ri * (-b2[j]) - (-b2[i]) * rj) / det
        t = (b1[i] * rj - ri * b1[j]) / det
        x = tuple(p + s * d for p, d in zip(a1, b1))
        if all(x[k] == a2[k] + t * b2[k] for k in range(n)):
            return x, s, t
        return None
    return None  # parallel


def _in_domain(c: ParametricCurve, t: Fraction) -> bool:
    a, b = c.domain
    return a < t < b


def _line_param(a, b, x):
    """Parameter t with a + t b = x, if x lies on the line."""
    k = next(i for i, v in enumerate(b) if v != 0)
    t = (x[k] - a[k]) / b[k]
    return t if all(x[i] == a[i] + t * b[i] for i in range(len(a))) else None


def _find_joints_lines(inst: JointsInstance, lines: list, tol: Fraction) -> JointsResult:
    n = inst.n
    arrays = []
    for fam in lines:
        A = np.array([[float(v) for v in a] for a, _ in fam]).reshape(len(fam), n)
        B = np.array([[float(v) for v in b] for _, b in fam]).reshape(len(fam), n)
        arrays.append((A, B / np.linalg.norm(B, axis=1, keepdims=True)))
    candidates: dict = {}
    A1, B1 = arrays[0]
    A2, B2 = arrays[1]
    for i, (a1, b1) in enumerate(lines[0]):
        # float prefilter on the distance between lines, exact check afterwards
        diff = A2 - A1[i]
        proj = diff - (diff @ B1[i])[:, None] * B1[i]
        para = 1.0 - np.abs(B2 @ B1[i]) < 1e-12
        coef = (B2 - (B2 @ B1[i])[:, None] * B1[i])
        with np.errstate(invalid="ignore", divide="ignore"):
            tpar = -np.einsum("ij,ij->i", proj, coef) / np.einsum("ij,ij->i", coef, coef)
            resid = np.linalg.norm(proj + tpar[:, None] * coef, axis=1)
        scale = 1.0 + np.abs(diff).sum(axis=1)
        for j in np.flatnonzero(~para & (resid <= 1e-7 * scale)):
            a2, b2 = lines[1][j]
            hit = _intersect_lines(a1, b1, a2, b2)
            if hit is None:
                continue
            x, s, t = hit
            if _in_domain(inst.families[0][i], s) and _in_domain(inst.families[1][j], t):
                candidates.setdefault(x, None)
    joints = []
    for x in sorted(candidates):
        xf = np.array([float(v) for v in x])
        through = []
        for f, (fam, (A, B)) in enumerate(zip(lines, arrays)):
            diff = xf - A
            resid = np.linalg.norm(diff - np.einsum("ij,ij->i", diff, B)[:, None] * B, axis=1)
            scale = 1.0 + np.abs(diff).sum(axis=1)
            hits = []
            for k in np.flatnonzero(resid <= 1e-7 * scale):
                t = _line_param(*fam[k], x)
                if t is not None and _in_domain(inst.families[f][k], t):
                    hits.append(int(k))
            through.append(hits)
        if any(not h for h in through):
            continue
        for combo in itertools.islice(itertools.product(*through), 256):
            ok, span = _spans([lines[f][k][1] for f, k in enumerate(combo)], tol)
            if ok:
                joints.append(Joint(x, True, tuple((f, k) for f, k in enumerate(combo)), span))
                break
    return JointsResult(joints, [])


def _box_of(c: ParametricCurve) -> tuple:
    a, b = c.domain
    if not (math.isfinite(float(a)) and math.isfinite(float(b))):
        raise ValueError("non-line curves need a bounded parameter domain")
    return (Fraction(a), Fraction(b))


def _iv(lo: Fraction, hi: Fraction) -> IArray:
    return IArray(np.array([frac_down(lo)]), np.array([frac_up(hi)]))


def _interval_tangent(c: ParametricCurve, lo: Fraction, hi: Fraction):
    return [d.eval_interval([_iv(lo, hi)]) for d in c.tangent()]


def _interval_point(c: ParametricCurve, lo: Fraction, hi: Fraction):
    return [q.eval_interval([_iv(lo, hi)]) for q in c.coords]


def _span_bounds_2d(t1, t2):
    """Enclosure of |det| / (|t1| |t2|) for planar interval tangents."""
    det = t1[0] * t2[1] - t1[1] * t2[0]
    n1 = t1[0].sqr() + t1[1].sqr()
    n2 = t2[0].sqr() + t2[1].sqr()
    prod = n1 * n2
    dmag = np.maximum(np.abs(det.lo), np.abs(det.hi))[0]
    dmig = 0.0 if det.contains_zero()[0] else min(abs(det.lo[0]), abs(det.hi[0]))
    lo = dmig / math.sqrt(prod.hi[0]) if prod.hi[0] > 0 else 0.0
    hi = dmag / math.sqrt(prod.lo[0]) if prod.lo[0] > 0 else INF
    return lo * (1 - 1e-12), hi * (1 + 1e-12)


def _pair_system(c1: ParametricCurve, c2: ParametricCurve):
    """gamma_1(s) - gamma_2(t), coordinate-wise, over the product chain."""
    ch = product_chain(c1.chain1d, c2.chain1d)
    r1, r2 = c1.chain1d.r, c2.chain1d.r
    nv = 2 + r1 + r2
    m1 = [0] + [2 + k for k in range(r1)]
    m2 = [1] + [2 + r1 + k for k in range(r2)]
    return [PfaffianFunction(ch, q1.Q.remap(nv, m1) - q2.Q.remap(nv, m2)) for q1, q2 in zip(c1.coords, c2.coords)]


def _find_joints_general(inst: JointsInstance, tol: float, cfg: SolveConfig) -> JointsResult:
    n = inst.n
    joints, uncertain = [], []
    for (i, c1), (j, c2) in itertools.product(enumerate(inst.families[0]), enumerate(inst.families[1])):
        eqs = _pair_system(c1, c2)
        box = [_box_of(c1), _box_of(c2)]
        res = solve_system_2d(eqs[0], eqs[1], box, cfg)
        for ub in res.unresolved:
            uncertain.append({"curves": [[0, i], [1, j]], "box": [[str(v) for v in ub[0]], [str(v) for v in ub[1]]],
                              "reason": "unresolved intersection"})
        for sb in res.boxes:
            s_lo, s_hi = Fraction(sb.x[0]), Fraction(sb.x[1])
            t_lo, t_hi = Fraction(sb.y[0]), Fraction(sb.y[1])
            desc = {"curves": [[0, i], [1, j]], "s": [str(s_lo), str(s_hi)], "t": [str(t_lo), str(t_hi)]}
            if n == 2:
                lo, hi = _span_bounds_2d(_interval_tangent(c1, s_lo, s_hi), _interval_tangent(c2, t_lo, t_hi))
                if lo >= tol:
                    pt = tuple((float(p.lo[0]), float(p.hi[0])) for p in _interval_point(c1, s_lo, s_hi))
                    joints.append(Joint(pt, False, ((0, i), (1, j)), lo))
                elif hi >= tol:
                    uncertain.append({**desc, "reason": "near-tangent intersection"})
                continue
            verdict = _higher_dim_candidate(inst, c1, c2, eqs, (s_lo, s_hi), (t_lo, t_hi), tol)
            if isinstance(verdict, Joint):
                joints.append(Joint(verdict.point, True, ((0, i), (1, j)) + verdict.curves, verdict.span))
            elif verdict is None:
                uncertain.append({**desc, "reason": "cannot certify the remaining coordinates"})
    return JointsResult(joints, uncertain)


def _higher_dim_candidate(inst, c1, c2, eqs, sr, tr, tol):
    """n >= 3: exact rational intersections only; other families via membership."""
    s, t = simplest_rational(*sr), simplest_rational(*tr)
    box = [_iv(*sr), _iv(*tr)]
    for g in eqs[2:]:
        v = g.eval_interval(box)
        if v.lo[0] > 0 or v.hi[0] < 0:
            return False
    exact = c1.chain1d.eval_exact([s])
    if exact is None:
        return None
    x = tuple(q.Q.evaluate([s] + exact) for q in c1.coords)
    ex2 = c2.chain1d.eval_exact([t])
    if ex2 is None or tuple(q.Q.evaluate([t] + ex2) for q in c2.coords) != x:
        return None
    dirs = [_exact_tangent(c1, s), _exact_tangent(c2, t)]
    if any(d is None for d in dirs):
        return None
    picks = []
    for f in range(2, inst.n):
        found = None
        for k, c in enumerate(inst.families[f]):
            line = _as_line(c)
            if line is not None:
                u = _line_param(*line, x)
                if u is not None and _in_domain(c, u):
                    found = (f, k, line[1])
                    break
            elif curve_membership(x, c) is not False:
                return None  # tangent of a transcendental curve at x is not available exactly
        if found is None:
            return False
        picks.append(found)
    ok, span = _spans(dirs + [p[2] for p in picks], Fraction(tol))
    if not ok:
        return False
    return Joint(x, True, tuple((f, k) for f, k, _ in picks), span)


def _exact_tangent(c: ParametricCurve, s: Fraction):
    ex = c.chain1d.eval_exact([s])
    if ex is None:
        return None
    return [d.Q.evaluate([s] + ex) for d in c.tangent()]


def find_joints(inst: JointsInstance, tol_span: float = 1e-9, cfg: SolveConfig | None = None) -> JointsResult:
    """Joints of the instance.

    Candidates are intersections of a curve from the first family with one
    from the second; a candidate is a joint when every family has a curve
    through it and some choice of tangents has |det| >= tol_span after
    normalizing rows to unit length. Lines are handled in exact rational
    arithmetic.
    """
    if inst.n < 2 or any(not fam for fam in inst.families):
        return JointsResult([], [])
    if any(c.dim != inst.n for fam in inst.families for c in fam):
        raise ValueError("every curve must live in R^n with n = number of families")
    tol = Fraction(tol_span)
    lines = [[_as_line(c) for c in fam] for fam in inst.families]
    if all(ln is not None for fam in lines for ln in fam):
        res = _find_joints_lines(inst, lines, tol)
    else:
        res = _find_joints_general(inst, tol_span, cfg or SolveConfig())
    res.joints.sort(key=lambda j: (not j.exact, j.point))
    return res


__all__ = ["JointsInstance", "Joint", "JointsResult", "gen_joints", "find_joints", "line_curve", "rigid_motion"]
