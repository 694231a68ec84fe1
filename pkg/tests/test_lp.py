from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from extcomplex.geometry.lp import LinearProgram, lp_solve
from extcomplex.geometry.polytope import HPolyhedron, VPolytope, convex_hull_facets, enumerate_vertices, solve_lp

from conftest import point_sets, small_fractions

SQUARE = HPolyhedron.box([0, 0], [1, 1])


def test_box_maximum():
    res = solve_lp([1, 1], SQUARE)
    assert res.optimal and res.value == 2 and res.x == (1, 1)


def test_contradictory_bounds_infeasible():
    H = HPolyhedron(1, (((1,), 0), ((-1,), -1)))
    assert solve_lp([1], H).status == "infeasible"


def test_simplex_objective():
    # brute force over the three vertices: values 0, 1, 2
    H = HPolyhedron(2, (((1, 1), 1), ((-1, 0), 0), ((0, -1), 0)))
    res = solve_lp([1, 2], H)
    assert res.value == 2 and res.x == (0, 1)


def test_unbounded_and_min():
    H = HPolyhedron(2, (((-1, 0), 0), ((0, -1), 0)))
    res = solve_lp([1, 0], H)
    assert res.status == "unbounded" and res.ray is not None
    assert solve_lp([1, 1], H, "min").value == 0


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        solve_lp([1, 2, 3], SQUARE)


def test_equations_and_reuse():
    # x + y + z = 1, x, y, z >= 0: one phase-one, several objectives
    prog = LinearProgram(3, [[-1, 0, 0], [0, -1, 0], [0, 0, -1]], [0, 0, 0], [[1, 1, 1]], [1])
    assert prog.optimize([1, 2, 3]).value == 3
    assert prog.optimize([1, 2, 3], "min").value == 1
    assert prog.optimize([Fraction(1, 3), 0, 0]).value == Fraction(1, 3)
    assert lp_solve([1, 0], [[1, 0], [0, 1], [0, -1]], [Fraction(7, 2), 1, 0]).value == Fraction(7, 2)


def test_degenerate_cycling_instance():
    # a classic degenerate LP (Beale); Bland fallback must terminate
    A = [[Fraction(1, 4), -60, Fraction(-1, 25), 9], [Fraction(1, 2), -90, Fraction(-1, 50), 3],
         [0, 0, 1, 0]]
    b = [0, 0, 1]
    A += [[-1 if i == j else 0 for j in range(4)] for i in range(4)]
    b += [0] * 4
    res = LinearProgram(4, A, b).optimize([Fraction(3, 4), -150, Fraction(1, 50), -6])
    assert res.value == Fraction(1, 20)


@given(st.lists(st.tuples(small_fractions(), small_fractions(), small_fractions()), min_size=1, max_size=6),
       st.tuples(small_fractions(), small_fractions(), small_fractions()))
def test_matches_float_oracle_on_bounded_instances(rows, c):
    # random rows intersected with a box: always bounded
    H = HPolyhedron(3, HPolyhedron.box([-2] * 3, [2] * 3).ineqs + tuple((r, Fraction(1)) for r in rows))
    res = solve_lp(list(c), H)
    A = np.array([[float(v) for v in a] for a, _ in H.ineqs])
    b = np.array([float(v) for _, v in H.ineqs])
    ref = linprog(-np.array([float(v) for v in c]), A_ub=A, b_ub=b, bounds=[(None, None)] * 3, method="highs")
    if ref.status == 2:
        assert res.status == "infeasible"
    else:
        assert res.optimal
        assert abs(float(res.value) + ref.fun) < 1e-7
        assert H.contains(res.x)


@given(point_sets(3, min_size=4, max_size=9), st.tuples(small_fractions(), small_fractions(), small_fractions()))
def test_lp_equals_vertex_brute_force(points, c):
    V = VPolytope.from_points(points)
    H = convex_hull_facets(V)
    res = solve_lp(list(c), H)
    brute = max(sum(ci * vi for ci, vi in zip(c, v)) for v in enumerate_vertices(H).vertices)
    assert res.value == brute
