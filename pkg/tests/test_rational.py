from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from extcomplex.geometry.rational import (
    affine_parametrization,
    as_fraction,
    format_rational,
    is_psd,
    ldl_pivoted,
    nullspace,
    primitive_integer,
    rref,
    solve_square,
)

from conftest import small_fractions


def matrices(rows, cols):
    return st.lists(st.lists(small_fractions(-3, 3, 3), min_size=cols, max_size=cols),
                    min_size=rows, max_size=rows)


def test_parse_and_format():
    assert as_fraction("3/6") == Fraction(1, 2)
    assert as_fraction(" -4 ") == -4
    assert format_rational(Fraction(-2, 4)) == "-1/2"
    assert format_rational(7) == "7"
    with pytest.raises(ValueError):
        as_fraction("1/0")
    with pytest.raises(ValueError):
        as_fraction("x")
    with pytest.raises(TypeError):
        as_fraction(True)


def test_primitive_integer():
    assert primitive_integer([Fraction(1, 2), Fraction(-3, 4)], 1) == ((2, -3), 4)
    # orientation is kept unless asked otherwise
    assert primitive_integer([-2, 4])[0] == (-1, 2)
    assert primitive_integer([-2, 4], fix_sign=True)[0] == (1, -2)


@given(matrices(3, 4))
def test_rref_rank_matches_sympy(M):
    R, pivots = rref(M, 4)
    assert len(pivots) == sympy.Matrix(M).rank()


@given(matrices(2, 4))
def test_nullspace_against_sympy(M):
    basis = nullspace(M, 4)
    assert len(basis) == len(sympy.Matrix(M).nullspace())
    for v in basis:
        assert all(sum(a * x for a, x in zip(row, v)) == 0 for row in M)


@given(matrices(3, 3), st.lists(small_fractions(), min_size=3, max_size=3))
def test_solve_square(M, b):
    x = solve_square(M, b)
    if sympy.Matrix(M).det() == 0:
        assert x is None
    else:
        expected = sympy.Matrix(M).LUsolve(sympy.Matrix(b))
        assert [Fraction(int(sympy.fraction(e)[0]), int(sympy.fraction(e)[1])) for e in expected] == list(x)


def test_affine_parametrization_inconsistent():
    assert affine_parametrization([[1, 1], [2, 2]], [1, 3], 2) is None
    x0, N, free = affine_parametrization([[1, 1]], [1], 2)
    for t in (Fraction(0), Fraction(5, 3)):
        x = [x0[i] + N[i][0] * t for i in range(2)]
        assert x[0] + x[1] == 1


def _sym(M):
    n = len(M)
    return [[M[i][j] + M[j][i] for j in range(n)] for i in range(n)]


@given(matrices(4, 4))
def test_is_psd_agrees_with_eigenvalues(M):
    S = _sym(M)
    lam = np.linalg.eigvalsh(np.array(S, dtype=float))
    if lam[0] > 1e-9:
        assert is_psd(S)
    elif lam[0] < -1e-9:
        assert not is_psd(S)


@given(matrices(4, 2))
def test_gram_matrices_are_psd(W):
    G = [[sum(a * b for a, b in zip(u, v)) for v in W] for u in W]
    assert is_psd(G)


def test_psd_edge_cases():
    assert is_psd([[0, 0], [0, 0]])
    assert not is_psd([[0, 1], [1, 0]])
    assert is_psd([[1, 1], [1, 1]])
    assert not is_psd([[-1]])
    with pytest.raises(ValueError):
        is_psd([[1, 2], [3, 1]])


@given(matrices(3, 3))
def test_ldl_reconstructs(W):
    T = [[sum(a * b for a, b in zip(u, v)) for v in W] for u in W]
    perm, L, D, residual = ldl_pivoted(T)
    r = len(D)
    k = len(T)
    assert r == sympy.Matrix(T).rank()
    assert all(v == 0 for row in residual for v in row)
    full = [[Fraction(D[i]) if i == j and i < r else Fraction(0) for j in range(k)] for i in range(k)]
    Lf = [[Fraction(v) for v in row] for row in L]
    rebuilt = [[sum(Lf[i][a] * full[a][b] * Lf[j][b] for a in range(k) for b in range(k))
                for j in range(k)] for i in range(k)]
    assert rebuilt == [[Fraction(T[perm[i]][perm[j]]) for j in range(k)] for i in range(k)]
