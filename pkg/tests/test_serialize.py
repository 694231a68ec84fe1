import itertools
import json
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from extcomplex.bounds import BoundInputs, FamilySpec, certify_family_bound, generate_family, theorem1_bound
from extcomplex.constructions import shannon_01_ef, shannon_01_plan, trivial_vrep_ef
from extcomplex.extform import LinearEF, LMIBlock, SemidefEF, verify_linear_ef
from extcomplex.geometry.polytope import AffineMap, HPolyhedron, VPolytope
from extcomplex.normalization import normalize
from extcomplex.serialize import (
    MalformedInput,
    bound_to_json,
    certified_report_to_json,
    decimal,
    dumps,
    ef_from_json,
    ef_to_json,
    hrep_from_json,
    hrep_to_json,
    plan_to_json,
    polytope_from_json,
    polytope_to_json,
    rational,
    report_to_json,
    triple_to_json,
)

from conftest import point_sets


def roundtrip(obj):
    return json.loads(dumps(obj))


def test_scalars():
    assert rational(Fraction(-3, 4)) == "-3/4"
    assert rational(5) == "5"
    assert decimal(0.5) == "0.5"
    assert decimal(float("inf")) == "inf"
    with mpmath.workprec(80):
        assert decimal(mpmath.mpf(1) / 3).startswith("0.3333333333333333333")
    assert dumps({"a": 1}).endswith("}\n")


@given(point_sets(3, min_size=1, max_size=6))
def test_polytope_roundtrip(points):
    P = VPolytope.from_points(points)
    assert polytope_from_json(roundtrip(polytope_to_json(P))) == P


def test_polytope_reduce_flag():
    obj = {"dim": 1, "vertices": [["0"], ["1/2"], ["1"]]}
    assert len(polytope_from_json(obj).vertices) == 2
    assert len(polytope_from_json(obj, reduce=False).vertices) == 3


@pytest.mark.parametrize("bad", [
    {"vertices": [[1]]},
    {"dim": -1, "vertices": []},
    {"dim": 2, "vertices": [[1]]},
    {"dim": 1, "vertices": [["x"]]},
    {"dim": 1, "vertices": "nope"},
    [1, 2],
])
def test_polytope_malformed(bad):
    with pytest.raises(MalformedInput):
        polytope_from_json(bad)


def test_hrep_roundtrip():
    H = HPolyhedron(2, (((1, 0), Fraction(1, 3)), ((-1, -1), 0)), (((1, 1), 2),))
    assert hrep_from_json(roundtrip(hrep_to_json(H))) == H


def test_ef_roundtrip_linear_and_semidef():
    ef = shannon_01_ef(list(itertools.product((0, 1), repeat=3)))
    assert ef_from_json(roundtrip(ef_to_json(ef))) == ef
    block = LMIBlock(([[0, 1], [1, 0]], [[Fraction(1, 2), 0], [0, 0]]), [[1, 0], [0, 1]])
    sd = SemidefEF((block,), AffineMap(((1, 0),), (Fraction(-1, 7),), 2))
    assert ef_from_json(roundtrip(ef_to_json(sd))) == sd


@pytest.mark.parametrize("bad", [
    {"kind": "linear", "n": 1, "proj": {"matrix": [[1]], "offset": [0]}},
    {"kind": "cone", "n": 1, "proj": {"matrix": [[1]], "offset": [0]}},
    {"kind": "linear", "n": -1, "proj": {"matrix": [], "offset": []}},
    {"kind": "linear", "n": 2, "proj": {"matrix": [[1]], "offset": [0]}, "lifted": {"dim": 2}},
    {"kind": "linear", "n": 1, "proj": {"matrix": [[1]], "offset": [0]}, "lifted": {"dim": 2}},
    {"kind": "semidef", "n": 1, "proj": {"matrix": [[1]], "offset": [0]},
     "blocks": [{"S": [[["0", "1"], ["2", "0"]]], "T": [["1", "0"], ["0", "1"]]}]},
    {"kind": "semidef", "n": 2, "proj": {"matrix": [[1, 0]], "offset": [0]},
     "blocks": [{"S": [[["1"]]], "T": [["1"]]}]},
])
def test_ef_malformed(bad):
    with pytest.raises(MalformedInput):
        ef_from_json(bad)


def test_plan_and_report():
    plan = shannon_01_plan([(0, 0), (1, 1)], s=1)
    assert roundtrip(plan_to_json(plan)) == {
        "d": 2, "s": 1, "groups": [{"Y": [[0]], "X": [[0]]}, {"Y": [[1]], "X": [[1]]}], "declared_bound": 14}
    sq = VPolytope.from_points([(0, 0), (1, 0), (0, 1), (1, 1)])
    tri = VPolytope.from_points([(0, 0), (1, 0), (0, 1)])
    bad = roundtrip(report_to_json(verify_linear_ef(trivial_vrep_ef(sq), tri)))
    assert bad["verified"] is False and bad["kind"] == "facet"
    assert bad["constraint"] == {"a": ["1", "1"], "b": "1"} and bad["image"] == ["1", "1"]
    missing = roundtrip(report_to_json(verify_linear_ef(trivial_vrep_ef(tri), sq)))
    assert missing["kind"] == "vertex" and missing["vertex"] == ["1", "1"]
    good = roundtrip(report_to_json(verify_linear_ef(trivial_vrep_ef(sq), sq)))
    assert good == {"verified": True, "checked_vertices": 4, "checked_facets": 4}


def test_triple_json_shape():
    sq = VPolytope.from_points([(0, 0), (1, 0), (0, 1), (1, 1)])
    res = normalize(trivial_vrep_ef(sq), sq)
    obj = roundtrip(triple_to_json(res.triple, res.certificate))
    assert (obj["l"], obj["m"], obj["n"], obj["d"]) == res.triple.shape()
    A = np.array([[[[float(v) for v in r] for r in M] for M in blk] for blk in obj["A_blocks"]])
    assert np.array_equal(A, res.triple.A)
    assert np.array_equal(np.array(obj["phi"], dtype=float), res.triple.phi)
    assert obj["certificate"]["passed"] is True
    assert all(isinstance(v, str) for v in (obj["certificate"]["rho"], obj["certificate"]["norm_phi"]))


def test_exact_triple_keeps_rationals():
    box = VPolytope.from_points(list(itertools.product((-2, 2), repeat=2)))
    ef = LinearEF(HPolyhedron.box([-2, -2], [2, 2]), AffineMap.identity(2))
    obj = roundtrip(triple_to_json(normalize(ef, box, exact=True).triple))
    assert obj["exact"] is True and obj["phi"] == [["2", "0"], ["0", "2"]]


def test_bound_and_report_json():
    obj = roundtrip(bound_to_json(theorem1_bound(BoundInputs(d=1, N=2, rho=1, delta=2))))
    assert obj == {"B": "0.125", "sxc_floor": 1, "xc_floor": 1}
    fam = generate_family(FamilySpec("parabola", s=4, n=2))
    rep = roundtrip(certified_report_to_json(certify_family_bound(fam, (1, 1))))
    assert rep["N"] == "6" and rep["rho_sq"] == "272" and rep["violation"] in (True, False)
    assert Fraction(rep["delta_sq"]) > 0
