import warnings
from fractions import Fraction

import pytest

from oracles import khovanskii_formula
from pfaffpart.bounds import (
    BoundQuery, InvalidBoundQuery, TrivialGuaranteeWarning, component_bound, degenerate_bound_max,
    evaluate_bound, irreducible_component_bound, joints_bound, joints_exponent, khovanskii_bound,
    khovanskii_degenerate_bound, kst_bound, partition_guarantee, st_bound, st_exponents,
)


def test_khovanskii_examples():
    assert khovanskii_bound(BoundQuery(n=2, r=0, betas=(2, 3))) == 6
    assert khovanskii_bound(BoundQuery(n=1, r=1, alpha=1, xi=1, betas=(1,))) == 2
    assert khovanskii_bound(BoundQuery(n=2, r=1, alpha=1, xi=2, betas=(2, 2))) == 16


def test_khovanskii_matches_hand_formula():
    for n, r, alpha, xi, betas in [(1, 2, 2, 1, (3,)), (3, 2, 1, 2, (1, 2, 3)), (2, 3, 2, 1, (4, 1))]:
        q = BoundQuery(n=n, r=r, alpha=alpha, xi=xi, betas=betas)
        assert khovanskii_bound(q) == khovanskii_formula(n, r, alpha, xi, betas)


def test_khovanskii_input_checks():
    with pytest.raises(InvalidBoundQuery):
        khovanskii_bound(BoundQuery(n=2, betas=(1,)))
    with pytest.raises(InvalidBoundQuery):
        khovanskii_bound(BoundQuery(n=1, betas=(0,)))


def test_degenerate_variants():
    assert khovanskii_degenerate_bound(BoundQuery(n=1, r=0, betas=(3,)), "stated") == 6
    assert khovanskii_degenerate_bound(BoundQuery(n=1, r=0, betas=(3,)), "substituted") == 6
    q = BoundQuery(n=2, r=1, alpha=1, xi=1, betas=(1, 1))
    assert khovanskii_degenerate_bound(q, "stated") == 16
    assert degenerate_bound_max(q) >= khovanskii_degenerate_bound(q, "substituted")
    with pytest.raises(InvalidBoundQuery):
        khovanskii_degenerate_bound(q, "other")


def test_component_bound_examples():
    assert component_bound(BoundQuery(C=1, D=1, k=1, r=1, n=2)) == 1
    assert component_bound(BoundQuery(C=1, D=3, k=1, r=1, n=2)) == 9
    assert component_bound(BoundQuery(C=2, D=4, k=0, r=2, n=2)) == 32


def test_partition_guarantee_examples():
    assert partition_guarantee(BoundQuery(n=2, k=0, r=0, D=4, cardinalities=(160,))) == 10
    q = BoundQuery(n=2, k=1, r=1, D=2, cardinalities=(8,), independent=True)
    assert partition_guarantee(q, "pfaffian") == 4
    q = BoundQuery(n=2, k=0, r=1, D=2, cardinalities=(16,), independent=True)
    assert partition_guarantee(q, "pfaffian") == 2


def test_partition_guarantee_flags():
    with pytest.raises(InvalidBoundQuery):
        partition_guarantee(BoundQuery(n=2, D=2, cardinalities=(8,)), "pfaffian")
    with pytest.warns(TrivialGuaranteeWarning):
        partition_guarantee(BoundQuery(n=2, k=1, r=1, D=2, cardinalities=(8,)), "poly")


def test_partition_guarantee_reduces_to_classical():
    for n, k, D, size in [(2, 1, 3, 90), (3, 2, 2, 64), (3, 0, 5, 1000)]:
        q = BoundQuery(n=n, k=k, r=0, D=D, cardinalities=(size,))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            got = partition_guarantee(q)
        assert got == Fraction(size) * Fraction(D) ** (k - n) if k > 0 else Fraction(size, D**n)


def test_kst_examples():
    assert kst_bound(BoundQuery(s=2, t=2, cardinalities=(0, 7))) == 0
    assert kst_bound(BoundQuery(s=2, t=2, cardinalities=(100, 100))) == 1100
    assert kst_bound(BoundQuery(s=2, t=2, cardinalities=(1, 1))) == 2


def test_st_plane_examples():
    a, b = st_exponents(BoundQuery(n=2, r=0, s=2), plane=True)
    assert (a, b) == (Fraction(2, 3), Fraction(2, 3))
    N = 1000
    v = st_bound(BoundQuery(n=2, r=0, s=2, cardinalities=(N, N)), plane=True)
    assert v == 100 * 100 + 2 * N
    assert st_bound(BoundQuery(n=2, cardinalities=(0, 50)), plane=True) == 50


def test_st_space_exponents():
    a, b = st_exponents(BoundQuery(n=3, r=0, s=2), plane=False)
    assert (a, b) == (Fraction(1, 2), Fraction(3, 4))
    with pytest.raises(InvalidBoundQuery):
        st_bound(BoundQuery(n=2, cardinalities=(1, 1)), plane=False)


def test_joints_examples():
    assert joints_exponent(BoundQuery(n=3, r=0)) == Fraction(1, 2)
    assert joints_bound(BoundQuery(n=3, r=0, cardinalities=(16, 16, 16))) == 64
    assert joints_exponent(BoundQuery(n=3, r=3)) == 1
    assert joints_bound(BoundQuery(n=3, r=3, cardinalities=(5, 5, 5))) == 125
    assert joints_bound(BoundQuery(n=3, cardinalities=(5, 0, 5))) == 0


def test_irreducible_examples():
    assert irreducible_component_bound(BoundQuery(C1=1, C2=1, betas=(5,))) == 5
    assert irreducible_component_bound(BoundQuery(C1=2, C2=3, betas=(2,))) == 16
    assert irreducible_component_bound(BoundQuery(C1=7, C2=4, betas=(1,))) == 7


def test_irrational_values_are_high_precision():
    v = kst_bound(BoundQuery(s=2, t=2, cardinalities=(3, 2)))
    assert abs(float(v) - min(3 * 2**0.5 + 2, 3**0.5 * 2 + 3)) < 1e-12


def test_evaluate_bound_front_end():
    v, exps = evaluate_bound("st_plane", BoundQuery(n=2, cardinalities=(8, 8)))
    assert exps == {"P": Fraction(2, 3), "Gamma": Fraction(2, 3)}
    with pytest.raises(InvalidBoundQuery):
        evaluate_bound("nope", BoundQuery())


def test_query_validation():
    with pytest.raises(InvalidBoundQuery):
        BoundQuery(n=0)
    with pytest.raises(InvalidBoundQuery):
        BoundQuery(n=2, k=3)
    with pytest.raises(InvalidBoundQuery):
        BoundQuery.from_json({"n": 2, "bogus": 1})
    q = BoundQuery(n=3, betas=(1, 2, 3), eps=Fraction(1, 10))
    assert BoundQuery.from_json(q.to_json()) == q
