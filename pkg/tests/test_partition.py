import json
from fractions import Fraction

import numpy as np
import pytest

from oracles import schedule_oracle
from pfaffpart.chains import chain_builtin
from pfaffpart.partition import (
    BOUNDARY, IndependenceError, SignCondition, approx_ham_sandwich, build_partition, check_level_degree,
    degree_schedule, locate, pfaffian_partition,
)


def uniform(n_points, seed, dim=2):
    rng = np.random.default_rng(seed)
    return [tuple(Fraction(int(v), 2**20) for v in row) for row in rng.integers(0, 2**20, size=(n_points, dim))]


def sign_counts(poly, pts):
    vals = [poly.evaluate(p) for p in pts]
    return sum(v > 0 for v in vals), sum(v < 0 for v in vals)


# -- degree schedule ---------------------------------------------------------------------------------

def test_schedule_examples():
    s = degree_schedule(1, 1, 2)
    assert (s.s, s.d) == (0, ())
    s = degree_schedule(10, 1, 2)
    assert (s.s, tuple(s.d)) == (3, (2, 2, 3))
    s = degree_schedule(3, 1, 1)
    assert (s.s, tuple(s.d)) == (2, (1, 2))


def test_schedule_matches_brute_search():
    for D in range(1, 30):
        for m in range(1, 4):
            for n in range(1, 4):
                assert list(degree_schedule(D, m, n).d) == schedule_oracle(D, m, n)


def test_level_degree_inequalities():
    for level in range(1, 8):
        for m in (1, 2, 3):
            for n in (1, 2, 3):
                d = degree_schedule(10**6, m, n).d[level - 1]
                assert check_level_degree(d, level, m, n)


# -- ham sandwich ----------------------------------------------------------------------------------

def test_two_points_split_by_line():
    res = approx_ham_sandwich([[(0, 0), (1, 1)]], 1, tol=0.0)
    assert res.imbalances == [0] and res.met
    pos, neg = sign_counts(res.poly, [(0, 0), (1, 1)])
    assert (pos, neg) == (1, 1)


def test_square_corners():
    corners = [(0, 0), (1, 0), (0, 1), (1, 1)]
    res = approx_ham_sandwich([corners], 1, tol=0.0)
    assert res.imbalances[0] <= 1


def test_two_random_sets_degree_two():
    a, b = uniform(100, 1), uniform(100, 2)
    res = approx_ham_sandwich([a, b], 2, tol=0.05)
    for S in (a, b):
        pos, neg = sign_counts(res.poly, S)
        assert abs(pos - neg) <= 0.05 * len(S) + 1


# -- build_partition -------------------------------------------------------------------------------

def test_1024_uniform_points():
    pts = uniform(1024, 7)
    p = build_partition([pts], 10)
    assert p.s == 3 and len(p.cells) <= 8
    assert p.max_load(0) <= 256
    assert p.product_degree <= 10


def test_exact_bisection_generic_points():
    pts = uniform(64, 3)
    p = build_partition([pts], 10, tol=0.0)
    c = 64 // 2**p.s
    assert p.max_load(0) <= c + p.s


def test_empty_collections():
    p = build_partition([[], []], 6, n=2)
    assert all(len(v[0]) == 0 and len(v[1]) == 0 for v in p.cells.values())


def test_conservation_and_relocation():
    cols = [uniform(300, 4), uniform(200, 5)]
    p = build_partition(cols, 12)
    for i, pts in enumerate(cols):
        seen = sorted(j for v in p.cells.values() for j in v[i]) + list(p.boundary[i])
        assert sorted(seen) == list(range(len(pts)))
        for sc, v in p.cells.items():
            for j in v[i]:
                assert locate(pts[j], p) == sc
        for j in p.boundary[i]:
            assert locate(pts[j], p) == BOUNDARY


def test_monotone_refinement():
    pts = uniform(256, 8)
    p = build_partition([pts], 10)
    for k in range(1, p.s):
        groups = {}
        for sc, v in p.cells.items():
            groups.setdefault(sc.prefix(k), set()).update(v[0])
        # each level-k cell is the exact sign region of the first k factors
        for pre, members in groups.items():
            for j in members:
                signs = tuple(1 if f.evaluate(pts[j]) > 0 else -1 for f in p.factors[:k])
                assert signs == pre.sigma


def test_points_on_zero_set_go_to_boundary():
    pts = [(Fraction(i), Fraction(0)) for i in range(6)] + [(Fraction(0), Fraction(i)) for i in range(1, 6)]
    p = build_partition([pts], 2)
    for i in p.boundary[0]:
        assert any(f.evaluate(pts[i]) == 0 for f in p.factors)


def test_partition_is_deterministic():
    pts = uniform(512, 9)
    a = build_partition([pts], 10, seed=42).to_json()
    b = build_partition([pts], 10, seed=42).to_json()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_sign_condition_text():
    sc = SignCondition.parse("+-+")
    assert str(sc) == "+-+" and sc.prefix(2) == SignCondition((1, -1))


# -- pfaffian partition ----------------------------------------------------------------------------

def test_exp_chain_on_line():
    pts = [(Fraction(i, 3),) for i in range(-4, 4)]
    pp = pfaffian_partition([pts], chain_builtin("exp", [1]), 4)
    assert pp.s == 2
    assert pp.max_load(0) <= pp.ceiling(0)
    assert sum(len(v[0]) for v in pp.cells.values()) + len(pp.boundary[0]) == 8


def test_empty_chain_matches_polynomial_partition():
    pts = uniform(200, 10)
    pp = pfaffian_partition([pts], chain_builtin("empty", n=2), 10)
    direct = build_partition([pts], 10)
    assert json.dumps(pp.lifted.to_json(), sort_keys=True) == json.dumps(direct.to_json(), sort_keys=True)


def test_dependent_chain_refused():
    with pytest.raises(IndependenceError):
        pfaffian_partition([[(Fraction(1),)]], chain_builtin("recip_power", [Fraction(1, 2)]), 4)


def test_degenerate_input_reported():
    pts = [(Fraction(1, 2), Fraction(1, 3))] * 10
    p = build_partition([pts], 6)
    assert p.degenerate_input
    occupied = [sc for sc, v in p.cells.items() if v[0]]
    assert len(occupied) <= 1


def test_pullback_cells_match_lifted_signs():
    pts = uniform(128, 12)
    chain = chain_builtin("exp", [1, 1])
    pp = pfaffian_partition([pts], chain, 10)
    for sc, v in pp.cells.items():
        for j in v[0]:
            assert locate(pts[j], pp) == sc
