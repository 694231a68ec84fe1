import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from extcomplex.constructions import (
    balas_union,
    default_suffix_width,
    product_ef,
    shannon_01_ef,
    shannon_01_plan,
    shannon_declared_bound,
    trivial_vrep_ef,
)
from extcomplex.extform import LinearEF, verify_linear_ef
from extcomplex.geometry.polytope import AffineMap, HPolyhedron, UnboundedError, VPolytope

from conftest import point_sets


def V(*pts):
    return VPolytope.from_points(pts)


def point_ef(p) -> LinearEF:
    """Size-0 formulation of a single point: empty lift, constant projection."""
    return LinearEF(HPolyhedron(0, (), ()), AffineMap(tuple(() for _ in p), tuple(p), 0))


def test_trivial_examples():
    ef = trivial_vrep_ef(V((3, -1)))
    assert ef.size() == 1 and ef.proj.apply((1,)) == (3, -1)
    sq = V((0, 0), (1, 0), (0, 1), (1, 1))
    ef = trivial_vrep_ef(sq)
    assert ef.size() == 4 and verify_linear_ef(ef, sq).verified
    rng = random.Random(1)
    pts = [tuple(rng.randint(-5, 5) for _ in range(3)) for _ in range(6)]
    pts = list(dict.fromkeys(pts))
    ef = trivial_vrep_ef(VPolytope(3, tuple(tuple(map(Fraction, p)) for p in pts)))
    assert ef.size() == len(pts)
    assert verify_linear_ef(ef, V(*pts)).verified


def test_trivial_rejects_empty():
    with pytest.raises(ValueError):
        trivial_vrep_ef(VPolytope(2, ()))


def test_balas_segment_from_endpoints():
    ef = balas_union([trivial_vrep_ef(V((0,))), trivial_vrep_ef(V((1,)))])
    assert ef.size() == 2 + 1 + 1
    assert verify_linear_ef(ef, V((0,), (1,))).verified


def test_balas_two_squares():
    a = [(0, 0), (1, 0), (0, 1), (1, 1)]
    b = [(2, 0), (3, 0), (2, 1), (3, 1)]
    ef = balas_union([trivial_vrep_ef(V(*a)), trivial_vrep_ef(V(*b))])
    assert ef.size() == 2 + 4 + 4
    assert verify_linear_ef(ef, V(*a, *b)).verified
    assert not verify_linear_ef(ef, V(*a)).verified


def test_balas_copies_idempotent():
    tri = V((0, 0), (2, 0), (0, 1))
    for copies in (1, 2, 3):
        ef = balas_union([trivial_vrep_ef(tri)] * copies)
        assert ef.size() == copies * 4
        assert verify_linear_ef(ef, tri).verified


def test_balas_with_h_description_and_equations():
    box = LinearEF(HPolyhedron.box([0, 0], [1, 2]), AffineMap.identity(2))
    ef = balas_union([box, trivial_vrep_ef(V((5, 5)))])
    assert verify_linear_ef(ef, V((0, 0), (1, 0), (0, 2), (1, 2), (5, 5))).verified


def test_balas_errors():
    ray = LinearEF(HPolyhedron(1, (((-1,), 0),)), AffineMap.identity(1))
    with pytest.raises(UnboundedError):
        balas_union([ray])
    with pytest.raises(ValueError):
        balas_union([])
    with pytest.raises(ValueError):
        balas_union([trivial_vrep_ef(V((0,))), trivial_vrep_ef(V((0, 0)))])


def test_product_examples():
    seg = trivial_vrep_ef(V((0,), (1,)))
    sq = product_ef(seg, seg)
    assert sq.size() == 4
    assert verify_linear_ef(sq, V((0, 0), (1, 0), (0, 1), (1, 1))).verified

    tri = trivial_vrep_ef(V((0, 0), (1, 0), (0, 1)))
    prism = product_ef(tri, seg)
    target = V(*[p + (z,) for p in [(0, 0), (1, 0), (0, 1)] for z in (0, 1)])
    assert prism.size() == 5 and verify_linear_ef(prism, target).verified


def test_product_with_point_keeps_size():
    P = [(0, 0), (2, 1), (1, 3)]
    ef = trivial_vrep_ef(V(*P))
    emb = product_ef(ef, point_ef((Fraction(1, 2),)))
    assert emb.size() == ef.size() + 0
    assert verify_linear_ef(emb, V(*[p + (Fraction(1, 2),) for p in P])).verified
    left = product_ef(point_ef((7,)), ef)
    assert left.size() == ef.size()
    assert verify_linear_ef(left, V(*[(7,) + p for p in P])).verified


# ---------------------------------------------------------------------------
# 0/1 formulations


def test_plan_examples():
    plan = shannon_01_plan(itertools.product((0, 1), repeat=8))
    assert plan.s == 1 and plan.declared_bound == 2 ** 7 + 4 * 3 == 140
    assert plan.declared_bound <= 9 * 2 ** 8 / 8

    plan = shannon_01_plan(itertools.product((0, 1), repeat=4), s=0)
    assert len(plan.groups) == 1
    Y, X = plan.groups[0]
    assert Y == ((),) and set(X) == set(itertools.product((0, 1), repeat=4))

    plan = shannon_01_plan([(0, 0), (1, 1)], s=1)
    assert plan.groups == ((((0,),), ((0,),)), (((1,),), ((1,),)))


def test_plan_errors():
    with pytest.raises(ValueError):
        shannon_01_plan([(0, 1)], s=3)
    with pytest.raises(ValueError):
        shannon_01_plan([(0, 1)], s=-1)
    with pytest.raises(ValueError):
        shannon_01_plan([(0, 2)])
    with pytest.raises(ValueError):
        shannon_01_plan([])
    with pytest.raises(ValueError):
        shannon_01_ef([])


def test_full_cube_d4():
    cube = list(itertools.product((0, 1), repeat=4))
    plan = shannon_01_plan(cube)
    assert plan.s == 0 and plan.declared_bound == 20 <= 36
    ef = shannon_01_ef(cube)
    assert ef.size() == 1 + 16 + 1 <= plan.declared_bound
    assert verify_linear_ef(ef, V(*cube)).verified


def test_exhaustive_d3():
    cube = list(itertools.product((0, 1), repeat=3))
    for mask in range(1, 256):
        pts = [cube[i] for i in range(8) if mask >> i & 1]
        ef = shannon_01_ef(pts)
        assert verify_linear_ef(ef, V(*pts)).verified, pts


def test_random_d5():
    rng = random.Random(55)
    cube = list(itertools.product((0, 1), repeat=5))
    for _ in range(10):
        pts = rng.sample(cube, rng.randint(1, 32))
        assert verify_linear_ef(shannon_01_ef(pts), V(*pts)).verified


def test_random_d6_size_and_verification():
    rng = random.Random(66)
    cube = list(itertools.product((0, 1), repeat=6))
    for _ in range(8):
        pts = [p for p in cube if rng.random() < 0.5] or [cube[0]]
        ef = shannon_01_ef(pts)
        assert ef.size() <= 9 * 64 / 6
        assert verify_linear_ef(ef, V(*pts)).verified


zero_one_sets = st.integers(1, 7).flatmap(
    lambda d: st.sets(st.tuples(*[st.integers(0, 1)] * d), min_size=1, max_size=2 ** d))


@given(zero_one_sets, st.data())
def test_size_accounting(pts, data):
    pts = sorted(pts)
    d = len(pts[0])
    s = data.draw(st.integers(0, d))
    plan = shannon_01_plan(pts, s)
    assert plan.points() == set(pts)
    seen = set()
    for Y, X in plan.groups:
        assert X and Y
        assert seen.isdisjoint(X)
        seen.update(X)
    assert seen == {p[: d - s] for p in pts}
    ef = shannon_01_ef(pts, plan=plan)
    assert ef.size() == len(plan.groups) + sum(len(X) + len(Y) for Y, X in plan.groups)
    assert ef.size() <= shannon_declared_bound(d, s)


@given(zero_one_sets, st.randoms(use_true_random=False))
def test_order_independence(pts, rnd):
    pts = list(pts)
    shuffled = pts[:]
    rnd.shuffle(shuffled)
    assert shannon_01_ef(pts).size() == shannon_01_ef(shuffled).size()
    assert shannon_01_plan(pts) == shannon_01_plan(shuffled)


def test_bound_chain_numeric():
    for d in range(4, 31):
        s = default_suffix_width(d)
        assert s == math.floor(math.log2(d / 4))
        assert 2 ** (d - s) + 2 ** (2 * 2 ** s) <= 9 * 2 ** d / d
        # the declared bound sits below the same threshold
        assert shannon_declared_bound(d, s) <= 9 * 2 ** d / d


@given(point_sets(2, min_size=1, max_size=5), point_sets(2, min_size=1, max_size=5))
def test_union_matches_hull(a, b):
    ef = balas_union([trivial_vrep_ef(V(*a)), trivial_vrep_ef(V(*b))])
    assert verify_linear_ef(ef, V(*a, *b)).verified
