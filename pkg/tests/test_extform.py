import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from extcomplex.constructions import trivial_vrep_ef
from extcomplex.extform import (
    EncodingTriple,
    LinearEF,
    LMIBlock,
    SemidefEF,
    ef_membership,
    ef_project_size,
    triple_distance_bound,
    triple_norms,
    validate_normalized,
    verify_linear_ef,
)
from extcomplex.geometry.polytope import AffineMap, HPolyhedron, UnboundedError, VPolytope

from conftest import point_sets, small_fractions

SQUARE = VPolytope.from_points([(0, 0), (1, 0), (0, 1), (1, 1)])
TRIANGLE = VPolytope.from_points([(0, 0), (1, 0), (0, 1)])


def unit(i, j, m=3):
    M = [[0] * m for _ in range(m)]
    M[i][j] = M[j][i] = 1
    return M


def elliptope_ef() -> SemidefEF:
    """3x3 matrix with unit diagonal and off-diagonals x1, x2, x3, projected to (x1, x2)."""
    block = LMIBlock((unit(0, 1), unit(0, 2), unit(1, 2)), [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    return SemidefEF((block,), AffineMap(((1, 0, 0), (0, 1, 0)), (0, 0), 3))


def test_membership_examples():
    ef = elliptope_ef()
    assert ef_membership(ef, (0, 0, 0))
    assert not ef_membership(ef, (1, 1, -1))
    # det [[1,1,1],[1,1,-1],[1,-1,1]] is negative
    M = np.array([[1, 1, 1], [1, 1, -1], [1, -1, 1]], dtype=float)
    assert np.linalg.det(M) < 0
    assert ef_membership(ef, (1, 1, 1))
    sq = trivial_vrep_ef(SQUARE)
    box = LinearEF(HPolyhedron.box([0, 0], [1, 1]), AffineMap.identity(2))
    assert not ef_membership(box, (2, 0))
    assert ef_membership(box, (1, Fraction(1, 2)))
    with pytest.raises(ValueError):
        ef_membership(sq, (0, 0))


def test_membership_agrees_with_eigenvalues():
    rng = random.Random(5)
    for _ in range(500):
        k = rng.randint(1, 4)
        W = [[Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(k)] for _ in range(k)]
        T = [[W[i][j] + W[j][i] for j in range(k)] for i in range(k)]
        ef = SemidefEF((LMIBlock((), T),), AffineMap((), (), 0))
        lam = np.linalg.eigvalsh(np.array(T, dtype=float))[0]
        assert ef_membership(ef, ()) == (lam >= -1e-9)


def test_project_size():
    V = VPolytope.from_points([(0, 0), (2, 0), (0, 2), (2, 2), (1, 3)])
    assert ef_project_size(trivial_vrep_ef(V))[:2] == (5, 1)
    assert ef_project_size(elliptope_ef()) == (1, 3, 3, 2)
    assert ef_project_size(EncodingTriple.empty(2))[0] == 0


def test_block_validation():
    with pytest.raises(ValueError):
        LMIBlock(([[0, 1], [2, 0]],), [[1, 0], [0, 1]])
    with pytest.raises(ValueError):
        LMIBlock(([[1]],), [[1, 0], [0, 1]])


def test_verify_square():
    rep = verify_linear_ef(trivial_vrep_ef(SQUARE), SQUARE)
    assert rep.verified and bool(rep)


def test_square_ef_against_triangle():
    rep = verify_linear_ef(trivial_vrep_ef(SQUARE), TRIANGLE)
    assert not rep.verified
    assert rep.kind == "facet"
    assert rep.constraint == ((1, 1), 1)
    assert rep.image == (1, 1)
    ef = trivial_vrep_ef(SQUARE)
    assert ef.proj.apply(rep.witness) == rep.image
    assert ef_membership(ef, rep.witness)


def test_missing_vertex_reported():
    rep = verify_linear_ef(trivial_vrep_ef(TRIANGLE), SQUARE)
    assert not rep.verified and rep.kind == "vertex" and rep.constraint == (1, 1)


def test_lower_dimensional_target_checks_equations():
    seg = VPolytope.from_points([(0, 0), (1, 1)])
    rep = verify_linear_ef(trivial_vrep_ef(TRIANGLE), seg)
    assert not rep.verified


def test_unbounded_lift_rejected():
    ef = LinearEF(HPolyhedron(1, (((-1,), 0),)), AffineMap(((0,),), (0,), 1))
    with pytest.raises(UnboundedError):
        verify_linear_ef(ef, VPolytope.from_points([(0,)]))


def test_trivial_ef_exhaustive_cube():
    cube = list(itertools.product((0, 1), repeat=3))
    for mask in range(1, 256):
        V = VPolytope.from_points([cube[i] for i in range(8) if mask >> i & 1])
        assert verify_linear_ef(trivial_vrep_ef(V), V).verified


@given(point_sets(3, min_size=1, max_size=7))
def test_trivial_ef_random(points):
    V = VPolytope.from_points(points)
    assert verify_linear_ef(trivial_vrep_ef(V), V).verified


# ---------------------------------------------------------------------------
# triples


def linear_triple(rows, phi, t):
    return EncodingTriple.linear(np.array(rows, dtype=float), np.array(phi, dtype=float), np.array(t, dtype=float))


def test_norms_closed_form():
    tr = linear_triple([[0.6, 0.8], [0.0, 1.0]], np.eye(2), [0, 0])
    lo, hi, phi, t = triple_norms(tr)
    assert lo == hi == 1.0
    assert abs(phi - 1) < 1e-12 and t == 0


def test_zero_triple():
    tr = EncodingTriple(np.zeros((2, 3, 2, 2)), np.zeros((2, 3)), np.zeros(2))
    assert tuple(triple_norms(tr)) == (0, 0, 0, 0)


@given(st.lists(st.lists(st.floats(-3, 3), min_size=3, max_size=3), min_size=1, max_size=5))
def test_m1_bracket_is_tight(rows):
    tr = linear_triple(rows, np.zeros((1, 3)), [0])
    n = triple_norms(tr)
    assert n.exact_A
    assert abs(n.norm_A_upper - max(np.linalg.norm(r) for r in rows)) < 1e-12


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 3), st.integers(2, 3), st.integers(1, 3))
def test_bracket_brackets_dense_search(seed, l, m, n):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((l, n, m, m))
    A = (A + np.swapaxes(A, 2, 3)) / 2
    tr = EncodingTriple(A, np.zeros((1, n)), np.zeros(1))
    lo, hi, _, _ = triple_norms(tr, samples=300, seed=1)
    X = rng.standard_normal((4000, n))
    X /= np.linalg.norm(X, axis=1)[:, None]
    dense = np.abs(np.linalg.eigvalsh(np.einsum("sj,ijab->siab", X, A))).max()
    assert lo <= hi + 1e-12
    assert dense <= hi + 1e-9
    assert lo >= dense - 1e-2 * dense
    # the upper end never exceeds the plain triangle-inequality bound
    assert hi <= sum(np.linalg.norm(A[i, j], 2) for j in range(n) for i in range(l)) + 1e-12


def test_phi_norm_matches_svd():
    rng = np.random.default_rng(3)
    for _ in range(20):
        phi = rng.standard_normal((3, 4))
        tr = EncodingTriple(np.zeros((1, 4, 1, 1)), phi, np.zeros(3))
        assert abs(triple_norms(tr).norm_phi - np.linalg.svd(phi, compute_uv=False)[0]) < 1e-8


def test_distance_bound_examples():
    rows = [[0.5, 0.0], [0.0, -0.5]]
    a = linear_triple(rows, [[1, 0], [0, 1]], [0, 0])
    b = linear_triple(rows, [[1.1, 0], [0, 1]], [0, 0])
    assert triple_distance_bound(a, a, 1.0) == 0
    assert abs(triple_distance_bound(a, b, 1.0) - 0.2) < 1e-12
    with pytest.raises(ValueError):
        triple_distance_bound(a, linear_triple([[1, 0]], [[1, 0], [0, 1]], [0, 0]), 1.0)


@given(st.integers(0, 2 ** 32 - 1))
def test_distance_bound_symmetric_and_triangle(seed):
    rng = np.random.default_rng(seed)

    def rand():
        A = rng.standard_normal((2, 2, 2, 2))
        return EncodingTriple((A + np.swapaxes(A, 2, 3)) / 2, rng.standard_normal((2, 2)), rng.standard_normal(2))

    x, y, z = rand(), rand(), rand()
    assert abs(triple_distance_bound(x, y, 2.0) - triple_distance_bound(y, x, 2.0)) < 1e-9
    assert triple_distance_bound(x, z, 2.0) <= \
        triple_distance_bound(x, y, 2.0) + triple_distance_bound(y, z, 2.0) + 1e-9


def test_validate_interval():
    tr = linear_triple([[1.0], [-1.0]], [[1.0]], [0.0])
    cert = validate_normalized(tr, 1.0)
    assert cert.passed and cert.outer_ball_exact and cert.max_outer_norm == 1.0


def test_validate_n_check_fails():
    tr = linear_triple([[1.0, 0.0]], [[1.0, 0.0]], [0.0])
    cert = validate_normalized(tr, 1.0)
    assert not cert.n_check and not cert.passed


def test_validate_t_check_fails():
    tr = linear_triple([[1.0], [-1.0]], [[1.0]], [2.0])
    cert = validate_normalized(tr, 1.0)
    assert not cert.t_check and cert.phi_check and not cert.passed


def test_validate_semidefinite_is_flagged_sampled():
    A = np.zeros((1, 1, 2, 2))
    A[0, 0] = [[1, 0], [0, -1]]
    cert = validate_normalized(EncodingTriple(A, np.array([[1.0]]), np.zeros(1)), 1.0)
    assert cert.passed and not cert.outer_ball_exact and cert.notes
