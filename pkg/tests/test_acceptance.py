"""Acceptance criteria 1-10, one test each, each printing a PASS/FAIL line.

Criteria 3-9 return a JSON-able payload (no timings) which criterion 10
recomputes and compares byte for byte.
"""

import hashlib
import json
import math
import random
import time
from fractions import Fraction

import mpmath
import numpy as np

from oracles import (
    CurveGridOracle, central_difference, chain_truth, grid_joints_oracle, integer_incidences, khovanskii_formula,
    poly_mp, schedule_oracle,
)
from pfaffpart.bounds import BoundQuery, joints_bound, khovanskii_bound
from pfaffpart.chains import chain_builtin
from pfaffpart.lab import count_incidences, curve_ensemble, find_joints, fit_loglog, gen_incidence, gen_joints
from pfaffpart.lab import run_experiment
from pfaffpart.partition import build_partition, degree_schedule, pfaffian_partition
from pfaffpart.pfaffian import ParametricCurve, PfaffianFunction, pf_derive, pf_eval
from pfaffpart.poly import MultiPoly, graded_lex_exponents
from pfaffpart.topology import components_along_curve, isolate_roots_1d

SEED = 0xC0FFEE
PAYLOADS: dict = {}


def digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


# -- 1. formula exactness ----------------------------------------------------------------------------

HAND_VALUES = [
    # (n, r, alpha, xi, betas, value) worked out by hand
    (2, 0, 1, 2, (2, 3), 6),
    (1, 1, 1, 1, (1,), 2),
    (2, 1, 1, 2, (2, 2), 16),
    (1, 0, 1, 1, (7,), 7),
    (3, 0, 1, 3, (2, 3, 4), 24),
    (1, 2, 1, 1, (2,), 36),
    (1, 2, 2, 1, (3,), 150),
    (2, 2, 1, 2, (1, 1), 18),
    (3, 1, 2, 3, (1, 2, 3), 36),
    (2, 3, 1, 2, (2, 1), 1024),
]


def test_criterion_1_formula_exactness(criterion):
    criterion.start(1)

    def run():
        bad = [h for h in HAND_VALUES
               if khovanskii_bound(BoundQuery(n=h[0], r=h[1], alpha=h[2], xi=h[3], betas=h[4])) != h[5]]
        rng = random.Random(SEED)
        misses = 0
        for _ in range(1000):
            n = rng.randint(1, 6)
            betas = [rng.randint(1, 50) for _ in range(n)]
            if khovanskii_bound(BoundQuery(n=n, r=0, betas=betas)) != math.prod(betas):
                misses += 1
        return bad, misses

    (bad, misses), dt = timed(run)
    ok = not bad and misses == 0 and dt < 1.0
    criterion.done(ok, f"{10 - len(bad)}/10 hand values, {1000 - misses}/1000 r=0 products, {dt:.3f}s (< 1s)")
    assert all(khovanskii_formula(n, r, a, x, b) == v for n, r, a, x, b, v in HAND_VALUES)
    assert ok


# -- 2. chain rule vs finite differences -------------------------------------------------------------

CHAIN_CASES = [
    # (name, params, n, sampler for one coordinate)
    ("empty", [], 2, lambda g: g.uniform(-2, 2)),
    ("exp", [1, -2], 2, lambda g: g.uniform(-1, 1)),
    ("iterated_exp", [1, 2], 1, lambda g: g.uniform(-1, 0.8)),
    ("tan", [0], 1, lambda g: g.uniform(-1.3, 1.3)),
    ("recip_log", [], 1, lambda g: g.choice([-1, 1]) * g.uniform(0.3, 3)),
    ("recip_power", [Fraction(1, 2)], 1, lambda g: g.uniform(0.3, 3)),
    ("fewnomial_monomial", [1, 2, -1], 2, lambda g: g.choice([-1, 1]) * g.uniform(0.5, 2)),
]


def random_poly(rng, nvars, max_degree, max_terms, allowed=None):
    exps = [e for e in graded_lex_exponents(nvars, max_degree) if allowed is None or allowed(e)]
    chosen = rng.sample(exps, min(len(exps), rng.randint(1, max_terms)))
    terms = {e: Fraction(rng.randint(-9, 9) or 1, rng.randint(1, 4)) for e in chosen}
    return MultiPoly(nvars, terms)


def term_sum(Q, lifted):
    return sum(abs(poly_mp(MultiPoly(Q.nvars, {e: c}), lifted)) for e, c in Q.items())


def test_criterion_2_chain_rule(criterion):
    """pf_derive against central differences of an mpmath evaluation at h = 1e-5.

    The error is measured relative to max(|f'|, S) where S is the sum of the
    absolute values of the derivative's terms at the lifted point: a double
    precision evaluation of a sum cannot be more accurate than that, so the
    comparison stays meaningful where the terms nearly cancel. The 40-digit
    difference quotient itself carries rounding noise near 1e-35 times the
    term sum of f, which matters only when f' vanishes identically; 1e-25 of
    that term sum is discounted.
    """
    criterion.start(2)

    def run():
        rng = random.Random(SEED)
        worst, worst_plain, checks, bad = 0.0, 0.0, 0, []
        for name, params, n, sample in CHAIN_CASES:
            chain = chain_builtin(name, params, n=n)
            for _ in range(100):
                Q = random_poly(rng, chain.nvars, 4, 8)
                f = PfaffianFunction(chain, Q)
                derivs = [pf_derive(f, i) for i in range(1, n + 1)]
                for _ in range(20):
                    x = [sample(rng) for _ in range(n)]
                    with mpmath.workdps(40):
                        lifted = [mpmath.mpf(v) for v in x]
                        lifted += chain_truth(name, params, lifted)
                    for i, df in enumerate(derivs):
                        got = pf_eval(df, x)
                        fd = central_difference(name, params, Q, x, i)
                        with mpmath.workdps(40):
                            scale = term_sum(df.Q, lifted)
                            noise = 1e-25 * term_sum(Q, lifted)
                        gap = max(abs(got - fd) - noise, 0)
                        err = float(gap / max(abs(fd), scale, mpmath.mpf(1e-300)))
                        plain = float(gap / max(abs(fd), mpmath.mpf(1e-300)))
                        checks += 1
                        worst = max(worst, err)
                        if abs(fd) > 1e-8 * scale:
                            worst_plain = max(worst_plain, plain)
                        if err > 1e-6:
                            bad.append((name, str(Q), x, i))
        return worst, worst_plain, checks, bad

    (worst, worst_plain, checks, bad), dt = timed(run)
    ok = not bad and dt < 30
    criterion.done(ok, f"{checks} derivative checks over 7 chains, worst scaled rel err {worst:.2e}, worst plain rel "
                       f"err away from cancellation {worst_plain:.2e}, {len(bad)} over 1e-6, {dt:.1f}s (< 30s)")
    assert ok, bad[:5]


# -- 3. root-count soundness -------------------------------------------------------------------------

ROOT_CASES = {
    "exp": ((Fraction(-3), Fraction(3)), lambda t, y: [y, y * y + 1, y + t * t, y * 3 + 1]),
    "tan": ((Fraction(-3, 2), Fraction(3, 2)), lambda t, y: [y * y + 1, y * y + t * t + 1, (y - t) ** 2 + Fraction(1, 4)]),
    "recip_log": ((Fraction(1, 8), Fraction(8)), lambda t, y1, y2: [y1, y2 * y2 + 1, y1 * y1 + y2 * y2, y1 + y2 * y2]),
}


def planted_roots(rng, lo, hi, k):
    grid = [Fraction(j, 32) for j in range(math.ceil(lo * 32) + 1, math.floor(hi * 32))]
    while True:
        roots = sorted(rng.sample(grid, k))
        if all(b - a >= Fraction(1, 32) for a, b in zip(roots, roots[1:])):
            return roots


def criterion_3_run():
    summary, rows = {}, []
    for name, ((lo, hi), positives) in ROOT_CASES.items():
        chain = chain_builtin(name)
        nv = chain.nvars
        vs = [MultiPoly.var(nv, j) for j in range(nv)]
        t = vs[0]
        # recip_log: skip monomials t^a y1^b with a, b > 0 so t * y1 = 1 cannot make f vanish identically
        allowed = (lambda e: not (e[0] and e[1])) if name == "recip_log" else None
        rng = random.Random(f"{SEED}-{name}")
        over, planted_miss, uncertified = 0, 0, 0
        for trial in range(1000):
            if trial % 2 == 0:
                Q = random_poly(rng, nv, 3, 6, allowed)
                roots = None
            else:
                k = rng.randint(0, 4)
                roots = planted_roots(rng, lo, hi, k)
                Q = rng.choice(positives(*vs))
                for r in roots:
                    Q = Q * (t - r)
            res = isolate_roots_1d(PfaffianFunction(chain, Q), (lo, hi))
            beta = max(int(Q.degree()), 1)
            bound = khovanskii_bound(BoundQuery(n=1, r=chain.r, alpha=chain.alpha, xi=1, betas=(beta,)))
            over += res.count > bound
            uncertified += not res.certified
            if roots is not None:
                ivs = sorted(res.intervals, key=lambda iv: iv.lo)
                hit = res.certified and len(ivs) == len(roots) and all(
                    iv.lo <= r <= iv.hi for iv, r in zip(ivs, roots))
                planted_miss += not hit
            rows.append([name, trial, res.count, bound, res.certified])
        summary[name] = {"over_bound": over, "planted_missed": planted_miss, "uncertified": uncertified}
    return summary, digest(rows)


def test_criterion_3_root_soundness(criterion):
    criterion.start(3)
    (summary, rows), dt = timed(criterion_3_run)
    PAYLOADS[3] = [summary, rows]
    ok = all(v["over_bound"] == 0 and v["planted_missed"] == 0 for v in summary.values()) and dt < 300
    detail = "; ".join(f"{k}: {v['over_bound']} over bound, {v['planted_missed']} planted missed, "
                       f"{v['uncertified']} uncertified" for k, v in summary.items())
    criterion.done(ok, f"1000 instances per chain; {detail}; {dt:.1f}s (< 300s)")
    assert ok


# -- 4. components along (t, e^t) ---------------------------------------------------------------------

def criterion_4_run():
    chain = chain_builtin("exp", [1])
    T, Y = MultiPoly.var(2, 0), MultiPoly.var(2, 1)
    gamma = ParametricCurve.from_polys(chain, [T, Y], (-3, 3))
    oracle = CurveGridOracle()
    maxima, mismatches, uncertified, counts = [], [], 0, []
    for D in range(1, 7):
        best = 0
        for idx, member in enumerate(curve_ensemble(D, 500, SEED)):
            res = components_along_curve(member.poly, gamma)
            uncertified += not res.certified
            if res.count != oracle.components(member.poly):
                mismatches.append((D, idx))
            best = max(best, res.count)
            counts.append(res.count)
        maxima.append(best)
    return maxima, mismatches, uncertified, counts


def test_criterion_4_components_on_exp_curve(criterion):
    criterion.start(4)
    (maxima, mismatches, uncertified, counts), dt = timed(criterion_4_run)
    slope = fit_loglog(range(1, 7), maxima)
    PAYLOADS[4] = [maxima, mismatches, uncertified, digest(counts)]
    ok = not mismatches and 1.0 <= slope <= 2.0 and dt < 600
    criterion.done(ok, f"3000 instances, {len(mismatches)} oracle mismatches, {uncertified} uncertified, max counts "
                       f"{maxima}, fitted exponent {slope:.3f} (window [1, 2]), {dt:.1f}s (< 600s)")
    assert ok, mismatches[:10]


# -- 5. degree schedule ------------------------------------------------------------------------------

def test_criterion_5_schedule_exactness(criterion):
    criterion.start(5)

    def run():
        bad = []
        for D in range(1, 51):
            for m in range(1, 5):
                for n in range(1, 5):
                    sched = degree_schedule(D, m, n)
                    d = list(sched.d)
                    f = math.factorial(n)
                    ineq = all(m * 2 ** (l - 1) * f <= dl**n < m * 2 ** (n + l - 1) * f for l, dl in enumerate(d, 1))
                    need = m * f * 2 ** len(d)
                    nxt = next(x for x in range(1, need + 2) if x**n >= need)
                    bracket = sum(d) <= D < sum(d) + nxt
                    if not (ineq and bracket and d == schedule_oracle(D, m, n) and sched.s == len(d)):
                        bad.append((D, m, n))
        return bad

    bad, dt = timed(run)
    ok = not bad and dt < 1.0
    criterion.done(ok, f"800 (D, m, n) triples, {len(bad)} violations, {dt:.3f}s (< 1s)")
    assert ok, bad[:5]


# -- 6. equidistribution -----------------------------------------------------------------------------

KINDS = ("uniform", "clustered", "curve", "grid")
SIZES = (256, 1024, 4096)


def family(kind, seed, N):
    """Collections for one seeded family; clustered families carry two collections."""
    rng = np.random.default_rng([seed, N])
    q = 2**20
    if kind == "uniform":
        raw = [rng.integers(0, q, size=(N, 2))]
    elif kind == "clustered":
        raw = []
        for _ in range(2):
            centers = rng.integers(q // 8, 7 * q // 8, size=(5, 2))
            labels = rng.integers(0, 5, size=N)
            raw.append(np.rint(centers[labels] + rng.normal(0, q / 40, size=(N, 2))).astype(np.int64))
    elif kind == "curve":
        x = rng.choice(np.arange(-q, q), size=N, replace=False)
        return [[(Fraction(int(v), q), Fraction(int(v) ** 2, q * q)) for v in x]]
    else:
        side = int(math.isqrt(N))
        off = rng.integers(0, 1000, size=2)
        raw = [np.array([(i + off[0], j + off[1]) for i in range(side) for j in range(side)])]
    return [[(Fraction(int(a), q), Fraction(int(b), q)) for a, b in pts] for pts in raw]


def degree_for(s, m, n=2):
    return next(D for D in range(1, 200) if degree_schedule(D, m, n).s == s)


def criterion_6_run():
    table, fails, digests = [], [], []
    for kind in KINDS:
        for fam_seed in range(5):
            for N in SIZES:
                cols = family(kind, fam_seed, N)
                for s in (2, 3, 4):
                    D = degree_for(s, len(cols))
                    p = build_partition(cols, D, tol=0.05, seed=SEED + fam_seed)
                    for i in range(len(cols)):
                        load, ceil_ = p.max_load(i), p.ceiling(i)
                        table.append([kind, fam_seed, N, s, i, load, str(ceil_), len(p.boundary[i])])
                        if load > ceil_:
                            fails.append(table[-1])
                    digests.append(digest(p.to_json()))
    return table, fails, digests


def test_criterion_6_equidistribution(criterion):
    criterion.start(6)
    (table, fails, digests), dt = timed(criterion_6_run)
    PAYLOADS[6] = [table, digests]
    worst = max(Fraction(row[5]) / Fraction(row[6]) for row in table)
    ok = not fails and dt < 600
    criterion.done(ok, f"20 families x 3 sizes x s in {{2,3,4}}: {len(table)} collection checks, {len(fails)} over "
                       f"ceiling, worst load/ceiling {float(worst):.3f}, {dt:.1f}s (< 600s)")
    assert ok, fails[:5]


# -- 7. Pfaffian lift partition ----------------------------------------------------------------------

def criterion_7_run():
    rows, fails = [], []
    for n, D, N in ((1, 7, 256), (1, 10, 1024), (2, 8, 512), (2, 12, 1024)):
        chain = chain_builtin("exp", [1], n=n)
        for seed in range(3):
            rng = np.random.default_rng([seed, n, N])
            cols = [[tuple(Fraction(int(v), 2**12) for v in row) for row in rng.integers(-2**13, 2**13, size=(N, n))]]
            pp = pfaffian_partition(cols, chain, D, seed=SEED + seed)
            sched = degree_schedule(D, 1, n + chain.r)
            assert pp.lifted.schedule.d == sched.d
            load, ceil_ = pp.max_load(0), pp.ceiling(0)
            rows.append([n, D, N, seed, pp.s, load, str(ceil_), len(pp.boundary[0]), digest(pp.to_json())])
            if load > ceil_:
                fails.append(rows[-1])
    identical = []
    for seed in range(3):
        rng = np.random.default_rng([seed, 99])
        cols = [[tuple(Fraction(int(v), 2**16) for v in row) for row in rng.integers(0, 2**16, size=(500, 2))]]
        via_chain = pfaffian_partition(cols, chain_builtin("empty", n=2), 10, seed=seed)
        direct = build_partition(cols, 10, seed=seed)
        a = json.dumps(via_chain.lifted.to_json(), sort_keys=True)
        identical.append(a == json.dumps(direct.to_json(), sort_keys=True) and via_chain.cells == direct.cells)
    return rows, fails, identical


def test_criterion_7_pfaffian_partition(criterion):
    criterion.start(7)
    (rows, fails, identical), dt = timed(criterion_7_run)
    PAYLOADS[7] = [rows, identical]
    ok = not fails and all(identical) and dt < 300
    loads = ", ".join(f"n={r[0]} N={r[2]}: {r[5]}/{r[6]}" for r in rows[::3])
    criterion.done(ok, f"{len(rows)} exp-chain partitions, {len(fails)} over ceiling ({loads}); r=0 path bit-identical "
                       f"{sum(identical)}/3; {dt:.1f}s (< 300s)")
    assert ok


# -- 8. incidence ladder -----------------------------------------------------------------------------

def criterion_8_run():
    ladder = list(range(2, 13))
    rep = run_experiment({"generator": "line_grid", "bound": "st_plane", "ladder": ladder})
    exact = []
    for k in ladder:
        inst = gen_incidence("line_grid", {"k": k})
        count, g = count_incidences(inst)
        exact.append(sorted(g.edges) == integer_incidences(inst.points, inst.curves) and count == k**4)
    return rep.payload(), exact


def test_criterion_8_incidence_ladder(criterion):
    criterion.start(8)
    (payload, exact), dt = timed(criterion_8_run)
    PAYLOADS[8] = [payload, exact]
    slope = float(payload["fitted_exponent"])
    ratios = [float(r["ratio"]) for r in payload["rows"]]
    ok = all(exact) and 1.25 <= slope <= 1.34 and max(ratios) <= 4 and dt < 120
    criterion.done(ok, f"k=2..12 brute-force exact {sum(exact)}/11, fitted exponent {slope:.4f} (window [1.25, 1.34]), "
                       f"ratio range [{min(ratios):.3f}, {max(ratios):.3f}] (<= 4), {dt:.1f}s (< 120s)")
    assert ok


# -- 9. joints ladder --------------------------------------------------------------------------------

def criterion_9_run():
    out = []
    for k in range(2, 11):
        res = find_joints(gen_joints("axis_grid", {"k": k}))
        truth = {tuple(Fraction(v) for v in p) for p in grid_joints_oracle(k)}
        bound = joints_bound(BoundQuery(n=3, r=0, cardinalities=(k * k,) * 3))
        out.append([k, res.count, res.points() == truth, len(res.uncertain), str(bound)])
    return out


def test_criterion_9_joints_ladder(criterion):
    criterion.start(9)
    rows, dt = timed(criterion_9_run)
    PAYLOADS[9] = rows
    ratios = [r[1] / float(Fraction(r[4])) for r in rows]
    spread = max(ratios) / min(ratios) - 1
    ok = all(r[1] == r[0] ** 3 and r[2] and r[3] == 0 for r in rows) and spread <= 0.05 and dt < 300
    criterion.done(ok, f"k=2..10 joints {[r[1] for r in rows]}, ratio to bound in [{min(ratios):.4f}, "
                       f"{max(ratios):.4f}] (spread {spread:.2%} <= 5%), {dt:.1f}s (< 300s)")
    assert ok


# -- 10. determinism ---------------------------------------------------------------------------------

RERUN = {
    3: lambda: list(criterion_3_run()),
    4: lambda: (lambda r: [r[0], r[1], r[2], digest(r[3])])(criterion_4_run()),
    6: lambda: (lambda r: [r[0], r[2]])(criterion_6_run()),
    7: lambda: (lambda r: [r[0], r[2]])(criterion_7_run()),
    8: lambda: list(criterion_8_run()),
    9: criterion_9_run,
}


def test_criterion_10_determinism(criterion):
    """Criteria 3-9 with equal seeds give identical payloads (criterion 5 has no randomness)."""
    criterion.start(10)
    t0 = time.perf_counter()
    same = {}
    for num, fn in RERUN.items():
        first = PAYLOADS.get(num)
        if first is None:
            first = fn()
        second = fn()
        same[num] = json.dumps(first, sort_keys=True) == json.dumps(second, sort_keys=True)
    dt = time.perf_counter() - t0
    ok = all(same.values())
    criterion.done(ok, f"payloads identical for criteria {sorted(k for k, v in same.items() if v)} of "
                       f"{sorted(same)}, {dt:.1f}s")
    assert ok
