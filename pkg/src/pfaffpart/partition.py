"""Polynomial and Pfaffian partitioning of finite point sets.

A partition of degree at most D is a product P = P_1 ... P_s where level l
adds a factor of degree at most d_l that (approximately) bisects every
current cell of every collection. Points are assigned to sign-condition
cells by the exact sign of each factor; points on a factor's zero set are
kept apart as boundary points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .chains import PfaffianChain
from .interval import CompiledPoly, IArray, hiprec, iv, mp_eval_poly
from .pfaffian import PfaffianFunction
from .poly import MultiPoly, graded_lex_exponents

DEFAULT_SEED = 0xC0FFEE


# -- degree schedule ------------------------------------------------------------

@dataclass(frozen=True)
class DegreeSchedule:
    D: int
    m: int
    n: int
    s: int
    d: tuple

    @property
    def total(self) -> int:
        return sum(self.d)

    def to_json(self) -> dict:
        return {"D": self.D, "m": self.m, "n": self.n, "s": self.s, "d": list(self.d)}


def _ceil_root(x: int, n: int) -> int:
    """Smallest integer d >= 0 with d**n >= x."""
    if x <= 0:
        return 0
    d = max(1, int(round(x ** (1.0 / n))))
    while d**n < x:
        d += 1
    while d > 1 and (d - 1) ** n >= x:
        d -= 1
    return d


def level_degree(level: int, m: int, n: int) -> int:
    """d_l = ceil((m n! 2^(l-1))^(1/n)), computed exactly."""
    return _ceil_root(m * math.factorial(n) * 2 ** (level - 1), n)


def check_level_degree(d: int, level: int, m: int, n: int) -> bool:
    """m 2^(l-1) <= d^n / n! < m 2^(n+l-1), as exact integers."""
    f = math.factorial(n)
    return m * 2 ** (level - 1) * f <= d**n < m * 2 ** (n + level - 1) * f


def degree_schedule(D: int, m: int, n: int) -> DegreeSchedule:
    """Largest s with d_1 + ... + d_s <= D."""
    if D < 1 or m < 1 or n < 1:
        raise ValueError("D, m and n must be at least 1")
    ds: list[int] = []
    total = 0
    level = 1
    while True:
        d = level_degree(level, m, n)
        if not check_level_degree(d, level, m, n):
            raise AssertionError(f"schedule inequality fails at level {level}")
        if total + d > D:
            break
        ds.append(d)
        total += d
        level += 1
    return DegreeSchedule(D, m, n, len(ds), tuple(ds))


# -- sign conditions ----------------------------------------------------------------

@dataclass(frozen=True, order=True)
class SignCondition:
    sigma: tuple  # entries +1 / -1

    def __str__(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.sigma)

    @classmethod
    def parse(cls, text: str) -> "SignCondition":
        return cls(tuple(1 if ch == "+" else -1 for ch in text))

    def prefix(self, k: int) -> "SignCondition":
        return SignCondition(self.sigma[:k])


BOUNDARY = "boundary"


# -- point handling ---------------------------------------------------------------------

@dataclass
class _PointSet:
    """Points as floats plus their exact rational values when not float-exact."""

    floats: np.ndarray  # (N, n)
    exact: list  # per point: tuple of Fractions
    float_exact: np.ndarray  # (N,) bool

    @classmethod
    def from_points(cls, pts, n: int) -> "_PointSet":
        pts = list(pts)
        if not pts:
            return cls(np.zeros((0, n)), [], np.zeros(0, dtype=bool))
        exact = [tuple(_to_fraction(v) for v in p) for p in pts]
        if any(len(p) != n for p in exact):
            raise ValueError("points must all have the same dimension")
        floats = np.array([[float(v) for v in p] for p in exact], dtype=np.float64)
        fe = np.array([all(Fraction(float(v)) == v for v in p) for p in exact])
        return cls(floats, exact, fe)

    def __len__(self):
        return len(self.exact)


def _to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(v)  # floats are taken at their exact binary value
    if isinstance(v, str):
        return Fraction(v)
    return Fraction(v)


def _signs(poly: MultiPoly, cp: CompiledPoly, ps: _PointSet, idx: np.ndarray) -> np.ndarray:
    """Exact signs of poly at the selected points (0 on the zero set)."""
    if idx.size == 0:
        return np.zeros(0, dtype=np.int8)
    xs = [ps.floats[idx, j] for j in range(ps.floats.shape[1])]
    val, err = cp.eval_float(xs)
    sign = np.where(val > err, 1, np.where(val < -err, -1, 0)).astype(np.int8)
    redo = (sign == 0) | ~ps.float_exact[idx]
    for k in np.flatnonzero(redo):
        v = poly.evaluate(ps.exact[idx[k]])
        sign[k] = (v > 0) - (v < 0)
    return sign


# -- ham sandwich -----------------------------------------------------------------------

@dataclass
class HamSandwichResult:
    poly: MultiPoly
    imbalances: list  # per set: |#positive - #negative| under the exact signs
    allowed: list  # per set: tol |S| + 1
    met: bool
    iterations: int
    basis: list  # exponent vectors spanning the search space
    rank_deficient: bool = False

    def to_json(self) -> dict:
        return {
            "imbalances": self.imbalances,
            "allowed": [str(a) for a in self.allowed],
            "met": self.met,
            "iterations": self.iterations,
            "basis": [list(e) for e in self.basis],
            "rank_deficient": self.rank_deficient,
        }


@dataclass
class _Normalizer:
    """Affine map x -> (x - center) / scale with dyadic center and power-of-two scale."""

    center: list
    scale: list

    @classmethod
    def fit(cls, X: np.ndarray) -> "_Normalizer":
        if X.size == 0:
            return cls([Fraction(0)] * X.shape[1], [Fraction(1)] * X.shape[1])
        lo, hi = X.min(axis=0), X.max(axis=0)
        center = [Fraction(float(0.5 * a + 0.5 * b)) for a, b in zip(lo, hi)]
        scale = []
        for a, b in zip(lo, hi):
            half = 0.5 * (b - a)
            e = math.ceil(math.log2(half)) if half > 0 else 0
            scale.append(Fraction(2) ** e)
        return cls(center, scale)

    def apply(self, X: np.ndarray) -> np.ndarray:
        c = np.array([float(v) for v in self.center])
        s = np.array([float(v) for v in self.scale])
        return (X - c) / s

    def pull_back(self, poly: MultiPoly) -> MultiPoly:
        """Polynomial in original coordinates equal to poly((x - c) / s)."""
        n = poly.nvars
        subs = [(MultiPoly.var(n, j) - self.center[j]) * (1 / self.scale[j]) for j in range(n)]
        return poly.compose(subs)


def _lift(Y: np.ndarray, exps: Sequence[tuple]) -> np.ndarray:
    if not exps:
        return np.zeros((len(Y), 0))
    E = np.array(exps, dtype=np.int64)
    out = np.ones((len(Y), len(exps)))
    for j in range(Y.shape[1]):
        col = Y[:, j:j + 1]
        out *= col ** E[:, j][None, :]
    return out


def select_basis(Y: np.ndarray, degree: int, K: int, rtol: float = 1e-9) -> list[tuple]:
    """First K monomials of degree <= ``degree`` in graded-lex order that are
    linearly independent on the data; fewer if the data do not support K."""
    n = Y.shape[1]
    chosen: list[tuple] = []
    Qcols: list[np.ndarray] = []
    for e in graded_lex_exponents(n, degree):
        if len(chosen) == K:
            break
        v = _lift(Y, [e])[:, 0]
        nv = np.linalg.norm(v)
        if nv == 0:
            continue
        w = v / nv
        for q in Qcols:
            w = w - (q @ w) * q
        for q in Qcols:  # second pass for stability
            w = w - (q @ w) * q
        nw = np.linalg.norm(w)
        if nw > rtol:
            chosen.append(e)
            Qcols.append(w / nw)
    return chosen


def _imbalance(vals: np.ndarray) -> int:
    return abs(int(np.count_nonzero(vals > 0)) - int(np.count_nonzero(vals < 0)))


def _middle_vector(vals: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Lifted vector the bisecting hyperplane should pass through."""
    N = len(vals)
    if N % 2 == 1:
        j = N // 2
        return V[np.argpartition(vals, j)[j]]
    j = N // 2 - 1
    part = np.argpartition(vals, [j, j + 1])
    return 0.5 * (V[part[j]] + V[part[j + 1]])


def _search(sets_V: list, K: int, allowed: list, rng: np.random.Generator, budget: int, inner: int = 50):
    """Median-Newton search on the coefficient sphere.

    For the current coefficient vector c, each set contributes the lifted
    vector at (or between) its median values; projecting c onto the null space
    of these vectors moves the hyperplane through all medians at once. Random
    restarts guard against cycling.
    """
    best = None
    it = 0
    while it < budget:
        c = rng.standard_normal(K)
        c /= np.linalg.norm(c)
        for _ in range(inner):
            it += 1
            vals = [V @ c for V in sets_V]
            ims = [_imbalance(v) for v in vals]
            score = max((i / a for i, a in zip(ims, allowed)), default=0.0)
            if best is None or score < best[0]:
                best = (score, c.copy())
            if all(i <= 1 for i in ims):
                return best, it
            if it >= budget:
                break
            W = np.array([_middle_vector(v, V) for v, V in zip(vals, sets_V)])
            cn = c - W.T @ np.linalg.lstsq(W @ W.T, W @ c, rcond=None)[0]
            nrm = np.linalg.norm(cn)
            if nrm < 1e-12:
                break
            cn /= nrm
            if np.linalg.norm(cn - c) < 1e-14:
                break
            c = cn
    return best, it


def approx_ham_sandwich(
    sets: Sequence,
    d: int,
    tol: float = 0.05,
    budget: int = 2000,
    seed: int = DEFAULT_SEED,
    K: int | None = None,
) -> HamSandwichResult:
    """Polynomial of degree <= d that nearly bisects every given point set.

    The search space is spanned by K monomials (default: number of sets + 1),
    chosen greedily in graded-lex order among those independent on the data.
    Success means |#{P > 0} - #{P < 0}| <= tol |S| + 1 for every set S; when
    the budget runs out the best polynomial found is returned with ``met``
    false.
    """
    sets = [list(S) for S in sets]
    nonempty = [S for S in sets if S]
    n = len(nonempty[0][0]) if nonempty else 1
    psets = [_PointSet.from_points(S, n) for S in sets]
    return _ham_sandwich_points(psets, [np.arange(len(p)) for p in psets], n, d, tol, budget, seed, K)


def _ham_sandwich_points(psets, idxs, n, d, tol, budget, seed, K=None) -> HamSandwichResult:
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    K = len(idxs) + 1 if K is None else K
    if math.comb(d + n, n) < K:
        raise ValueError(f"degree {d} in {n} variables has fewer than {K} monomials")
    all_pts = [ps.floats[ix] for ps, ix in zip(psets, idxs) if len(ix)]
    X = np.concatenate(all_pts) if all_pts else np.zeros((0, n))
    norm = _Normalizer.fit(X)
    Y = norm.apply(X) if len(X) else X
    basis = select_basis(Y, d, K) if len(Y) else [(0,) * n]
    rank_deficient = len(basis) < K
    F = _lift(Y, basis)
    scale = np.abs(F).max(axis=0) if len(F) else np.ones(len(basis))
    scale[scale == 0] = 1.0
    F = F / scale
    sizes = [len(ix) for ix in idxs]
    allowed = [Fraction(tol).limit_denominator(10**6) * s + 1 for s in sizes]
    sets_V, set_allowed, offset = [], [], 0
    for s, a in zip(sizes, allowed):
        if s:
            sets_V.append(F[offset:offset + s])
            set_allowed.append(float(a))
        offset += s
    if sets_V:
        (score, c), iters = _search(sets_V, len(basis), set_allowed, rng, budget)
    else:
        c, iters = np.zeros(len(basis)), 0
        c[-1] = 1.0
    coeffs = c / scale
    coeffs = coeffs / np.abs(coeffs).max()
    local = MultiPoly(n, {e: Fraction(float(v)) for e, v in zip(basis, coeffs)})
    if local.is_zero():
        local = MultiPoly.var(n, 0)
    poly = norm.pull_back(local)
    cp = CompiledPoly(poly)
    imbalances = []
    for ps, ix in zip(psets, idxs):
        sg = _signs(poly, cp, ps, ix)
        imbalances.append(abs(int(np.count_nonzero(sg > 0)) - int(np.count_nonzero(sg < 0))))
    met = all(i <= a for i, a in zip(imbalances, allowed))
    return HamSandwichResult(poly, imbalances, allowed, met, iters, basis, rank_deficient)


# -- partitions ----------------------------------------------------------------------------

@dataclass
class Partition:
    schedule: DegreeSchedule
    factors: list
    cells: dict  # SignCondition -> list (per collection) of index lists
    boundary: list  # per collection: sorted indices
    sizes: list  # per collection |Gamma_i|
    levels: list = field(default_factory=list)  # per level HamSandwichResult
    degenerate_input: bool = False

    @property
    def product_degree(self) -> int:
        return sum(max(int(f.degree()), 0) for f in self.factors)

    @property
    def s(self) -> int:
        return self.schedule.s

    def loads(self, i: int) -> dict:
        return {sc: len(v[i]) for sc, v in self.cells.items()}

    def max_load(self, i: int) -> int:
        return max((len(v[i]) for v in self.cells.values()), default=0)

    def target(self, i: int, C: float = 1.0) -> Fraction:
        """C m |Gamma_i| / 2^s."""
        return Fraction(C).limit_denominator() * self.schedule.m * self.sizes[i] / 2**self.s

    def ceiling(self, i: int) -> Fraction:
        """Acceptance ceiling 2 m |Gamma_i| / 2^s + s."""
        return 2 * self.target(i) + self.s

    def product(self) -> MultiPoly:
        n = self.schedule.n
        out = MultiPoly.const(n, 1)
        for f in self.factors:
            out = out * f
        return out

    def to_json(self) -> dict:
        m = len(self.sizes)
        return {
            "schedule": self.schedule.to_json(),
            "factors": [f.to_json() for f in self.factors],
            "product_degree": self.product_degree,
            "cells": {str(sc): [list(map(int, v[i])) for i in range(m)] for sc, v in sorted(self.cells.items())},
            "loads": {str(sc): [len(v[i]) for i in range(m)] for sc, v in sorted(self.cells.items())},
            "boundary": [list(map(int, b)) for b in self.boundary],
            "table": [
                {
                    "collection": i,
                    "size": self.sizes[i],
                    "max_load": self.max_load(i),
                    "target": str(self.target(i)),
                    "ceiling": str(self.ceiling(i)),
                }
                for i in range(m)
            ],
            "levels": [lv.to_json() for lv in self.levels],
            "degenerate_input": self.degenerate_input,
        }


def _infer_dim(collections, n):
    for coll in collections:
        for p in coll:
            return len(p)
    if n is None:
        raise ValueError("cannot infer the dimension of empty collections; pass n")
    return n


def build_partition(
    collections: Sequence,
    D: int,
    tol: float = 0.05,
    budget: int = 2000,
    seed: int = DEFAULT_SEED,
    n: int | None = None,
) -> Partition:
    """Partition m finite collections in R^n with a product of degree <= D."""
    n = _infer_dim(collections, n)
    m = max(len(collections), 1)
    sched = degree_schedule(D, m, n)
    psets = [_PointSet.from_points(c, n) for c in collections]
    return _partition_points(psets, sched, tol, budget, seed)


def _level_seed(seed: int, level: int) -> int:
    return int(np.random.SeedSequence([seed & (2**64 - 1), level]).generate_state(1, dtype=np.uint64)[0])


def _partition_points(psets, sched: DegreeSchedule, tol, budget, seed) -> Partition:
    m = len(psets)
    n = sched.n
    cells = {SignCondition(()): [np.arange(len(p)) for p in psets]}
    boundary = [[] for _ in psets]
    factors, levels = [], []
    degenerate = False
    for level in range(1, sched.s + 1):
        keys = sorted(cells)
        idxs, owners = [], []
        for sc in keys:
            for i in range(m):
                idxs.append(cells[sc][i])
                owners.append((sc, i))
        hs = _ham_sandwich_points(
            [psets[i] for _, i in owners], idxs, n, sched.d[level - 1], tol, budget, _level_seed(seed, level),
            K=m * 2 ** (level - 1) + 1,
        )
        degenerate |= hs.rank_deficient
        factors.append(hs.poly)
        levels.append(hs)
        cp = CompiledPoly(hs.poly)
        new_cells = {}
        for sc in keys:
            plus, minus = [], []
            for i in range(m):
                ix = cells[sc][i]
                sg = _signs(hs.poly, cp, psets[i], ix)
                plus.append(ix[sg > 0])
                minus.append(ix[sg < 0])
                boundary[i].extend(int(k) for k in ix[sg == 0])
            new_cells[SignCondition(sc.sigma + (1,))] = plus
            new_cells[SignCondition(sc.sigma + (-1,))] = minus
        cells = new_cells
    out_cells = {sc: [sorted(int(k) for k in v) for v in lists] for sc, lists in cells.items()}
    return Partition(sched, factors, out_cells, [sorted(b) for b in boundary], [len(p) for p in psets], levels, degenerate)


def locate(x: Sequence, p) -> SignCondition | str:
    """Sign vector of the factors at x, or ``BOUNDARY`` on a zero set."""
    if isinstance(p, PfaffianPartition):
        return _locate_pfaffian(x, p)
    signs = []
    ps = _PointSet.from_points([x], p.schedule.n)
    for f in p.factors:
        s = int(_signs(f, CompiledPoly(f), ps, np.array([0]))[0])
        if s == 0:
            return BOUNDARY
        signs.append(s)
    return SignCondition(tuple(signs))


# -- Pfaffian partitions --------------------------------------------------------------------

@dataclass
class PfaffianPartition:
    chain: PfaffianChain
    lifted: Partition
    pullback: PfaffianFunction
    cells: dict  # pullback cells: SignCondition -> per-collection index lists
    boundary: list  # per collection
    lift_error: list  # per collection: max |float lift - true lift| bound
    degenerate_input: bool = False

    @property
    def s(self) -> int:
        return self.lifted.s

    @property
    def sizes(self) -> list:
        return self.lifted.sizes

    def max_load(self, i: int) -> int:
        return max((len(v[i]) for v in self.cells.values()), default=0)

    def target(self, i: int) -> Fraction:
        return self.lifted.target(i)

    def ceiling(self, i: int) -> Fraction:
        return self.lifted.ceiling(i)

    def to_json(self) -> dict:
        m = len(self.sizes)
        out = self.lifted.to_json()
        out["lifted_cells"] = out.pop("cells")
        out["lifted_boundary"] = out.pop("boundary")
        out.update(
            {
                "chain": self.chain.to_json(),
                "pullback": self.pullback.to_json(),
                "cells": {str(sc): [list(map(int, v[i])) for i in range(m)] for sc, v in sorted(self.cells.items())},
                "loads": {str(sc): [len(v[i]) for i in range(m)] for sc, v in sorted(self.cells.items())},
                "boundary": [list(map(int, b)) for b in self.boundary],
                "lift_error": [repr(float(e)) for e in self.lift_error],
                "degenerate_input": self.degenerate_input,
            }
        )
        out["table"] = [
            {"collection": i, "size": self.sizes[i], "max_load": self.max_load(i),
             "target": str(self.target(i)), "ceiling": str(self.ceiling(i))}
            for i in range(m)
        ]
        return out


class IndependenceError(ValueError):
    """The chain is not declared algebraically independent."""


def _lift_points(chain: PfaffianChain, ps: _PointSet):
    """Float-rounded lifts and per-point interval enclosures of the true lift."""
    N = len(ps)
    if N == 0:
        return np.zeros((0, chain.n + chain.r)), None, 0.0
    if not all(chain.domain.contains(p) for p in ps.floats):
        raise ValueError("a point lies outside the chain domain")
    xs_iv = [IArray(ps.floats[:, j], ps.floats[:, j]) for j in range(chain.n)]
    qs_iv = chain.eval_interval(xs_iv)
    qs_f = chain.eval_float([ps.floats[:, j] for j in range(chain.n)])
    lifted = np.column_stack([ps.floats] + [np.asarray(q, dtype=np.float64) for q in qs_f])
    # float lift must sit inside the rigorous enclosure; widen nothing, just measure
    err = 0.0
    for q, qf in zip(qs_iv, qs_f):
        err = max(err, float(np.max(np.maximum(qf - q.lo, q.hi - qf))))
    enclosure = xs_iv + qs_iv
    return lifted, enclosure, err


def pfaffian_partition(
    collections: Sequence,
    chain: PfaffianChain,
    D: int,
    tol: float = 0.05,
    budget: int = 2000,
    seed: int = DEFAULT_SEED,
) -> PfaffianPartition:
    """Partition via the graph of the chain: lift, partition in R^(n+r), pull back.

    Each lifted factor P_l(x, y) pulls back to the Pfaffian function
    P_l(x, q(x)). A point is placed in a pullback cell only when every factor
    sign at the true lift is certified and equals its sign at the rounded lift;
    otherwise it is a boundary point.
    """
    if not chain.independent:
        raise IndependenceError(f"chain {chain.name!r} is not algebraically independent: {chain.independence_note}")
    n, r = chain.n, chain.r
    psets = [_PointSet.from_points(c, n) for c in collections]
    m = max(len(collections), 1)
    if r == 0:
        part = _partition_points(psets, degree_schedule(D, m, n), tol, budget, seed)
        pull = PfaffianFunction(chain, part.product())
        return PfaffianPartition(chain, part, pull, part.cells, part.boundary, [0.0] * len(psets), part.degenerate_input)

    lifts = [_lift_points(chain, ps) for ps in psets]
    lifted_sets = [
        _PointSet(lf, [tuple(Fraction(float(v)) for v in row) for row in lf], np.ones(len(lf), dtype=bool))
        for lf, _, _ in lifts
    ]
    part = _partition_points(lifted_sets, degree_schedule(D, m, n + r), tol, budget, seed)
    pull = PfaffianFunction(chain, part.product())

    compiled = [CompiledPoly(f) for f in part.factors]
    cells = {sc: [[] for _ in psets] for sc in part.cells}
    boundary = [list(b) for b in part.boundary]
    for i, (ps, (lf, enc, _)) in enumerate(zip(psets, lifts)):
        if len(ps) == 0:
            continue
        certified = np.ones(len(ps), dtype=bool)
        for cp, f in zip(compiled, part.factors):
            val = cp.eval_interval(enc)
            ok = (val.lo > 0) | (val.hi < 0)
            for k in np.flatnonzero(~ok):
                ok[k] = _mp_factor_sign(f, chain, ps.exact[k]) != 0
            certified &= ok
        for sc, lists in part.cells.items():
            for k in lists[i]:
                true_sc = _certified_signs(part.factors, compiled, chain, ps, k)
                if certified[k] and true_sc == sc:
                    cells[sc][i].append(k)
                else:
                    boundary[i].append(k)
    cells = {sc: [sorted(v) for v in lists] for sc, lists in cells.items()}
    return PfaffianPartition(
        chain, part, pull, cells, [sorted(b) for b in boundary], [lf[2] for lf in lifts], part.degenerate_input
    )


def _mp_factor_sign(f: MultiPoly, chain: PfaffianChain, x: Sequence[Fraction]) -> int:
    with hiprec():
        xs = [iv.mpf(v.numerator) / v.denominator for v in x]
        v = mp_eval_poly(f, xs + chain.eval_mp(xs))
    return 1 if v.a > 0 else -1 if v.b < 0 else 0


def _certified_signs(factors, compiled, chain, ps: _PointSet, k: int):
    xs = [IArray(ps.floats[k:k + 1, j], ps.floats[k:k + 1, j]) for j in range(chain.n)]
    if not ps.float_exact[k]:
        return _mp_signs(factors, chain, ps.exact[k])
    enc = chain.lift_interval(xs)
    signs = []
    for cp, f in zip(compiled, factors):
        v = cp.eval_interval(enc)
        s = 1 if v.lo[0] > 0 else -1 if v.hi[0] < 0 else _mp_factor_sign(f, chain, ps.exact[k])
        if s == 0:
            return None
        signs.append(s)
    return SignCondition(tuple(signs))


def _mp_signs(factors, chain, x):
    signs = []
    for f in factors:
        s = _mp_factor_sign(f, chain, x)
        if s == 0:
            return None
        signs.append(s)
    return SignCondition(tuple(signs))


def _locate_pfaffian(x: Sequence, p: PfaffianPartition):
    chain = p.chain
    if chain.r == 0:
        return locate(x, p.lifted)
    ps = _PointSet.from_points([x], chain.n)
    compiled = [CompiledPoly(f) for f in p.lifted.factors]
    sc = _certified_signs(p.lifted.factors, compiled, chain, ps, 0)
    return BOUNDARY if sc is None else sc
