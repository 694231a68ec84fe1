"""Exact rational scalars and small dense linear algebra.

Public values are :class:`fractions.Fraction`; the hot loops run on
``gmpy2.mpq``, which is an order of magnitude faster and hashes/compares
equal to ``Fraction``.
"""
from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Sequence

from gmpy2 import mpq

Rational = Fraction

__all__ = [
    "Rational",
    "as_fraction",
    "as_vector",
    "format_rational",
    "mpq",
    "to_mpq",
    "to_fraction",
    "rref",
    "nullspace",
    "solve_square",
    "affine_parametrization",
    "primitive_integer",
    "ldl_pivoted",
    "is_psd",
]


def as_fraction(value) -> Fraction:
    """Parse ``value`` (int, Fraction, mpq, ``"p/q"`` string or float) exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed rational {value!r}") from exc
    if isinstance(value, float):
        return Fraction(value)
    if type(value).__name__ == "mpq":
        return Fraction(int(value.numerator), int(value.denominator))
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        return Fraction(int(value.numerator), int(value.denominator))
    raise TypeError(f"cannot interpret {value!r} as a rational")


def as_vector(values: Iterable) -> tuple[Fraction, ...]:
    return tuple(as_fraction(v) for v in values)


def format_rational(value) -> str:
    q = as_fraction(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def to_mpq(value):
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    return mpq(value)


def to_fraction(value) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


def rref(rows: Sequence[Sequence], ncols: int | None = None):
    """Reduced row echelon form over Q.

    Returns ``(R, pivots)`` with ``R`` the nonzero rows (as lists of mpq, pivot
    entries equal to one) and ``pivots`` their pivot columns.
    """
    mat = [[to_mpq(v) for v in row] for row in rows]
    if ncols is None:
        ncols = len(mat[0]) if mat else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == len(mat):
            break
        piv = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        prow = mat[r]
        inv = 1 / prow[c]
        prow = [v * inv for v in prow]
        mat[r] = prow
        nz = [j for j in range(c, ncols) if prow[j] != 0]
        for i in range(len(mat)):
            if i != r:
                f = mat[i][c]
                if f:
                    row = mat[i]
                    for j in nz:
                        row[j] -= f * prow[j]
        pivots.append(c)
        r += 1
    return mat[:r], pivots


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[list]:
    """Basis of ``{x : rows @ x = 0}``, one vector per free column."""
    R, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [mpq(0)] * ncols
        v[f] = mpq(1)
        for row, p in zip(R, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def solve_square(A: Sequence[Sequence], b: Sequence):
    """Unique solution of the square system ``A x = b`` or ``None`` if singular."""
    n = len(A)
    mat = [[to_mpq(v) for v in row] + [to_mpq(bi)] for row, bi in zip(A, b)]
    for c in range(n):
        piv = next((i for i in range(c, n) if mat[i][c] != 0), None)
        if piv is None:
            return None
        mat[c], mat[piv] = mat[piv], mat[c]
        prow = mat[c]
        inv = 1 / prow[c]
        for i in range(c + 1, n):
            f = mat[i][c]
            if f:
                f *= inv
                row = mat[i]
                for j in range(c, n + 1):
                    row[j] -= f * prow[j]
    x = [mpq(0)] * n
    for i in range(n - 1, -1, -1):
        row = mat[i]
        acc = row[n]
        for j in range(i + 1, n):
            acc -= row[j] * x[j]
        x[i] = acc / row[i]
    return x


def affine_parametrization(E: Sequence[Sequence], f: Sequence, n: int):
    """Solve ``E x = f`` as ``x = x0 + N z`` with ``z`` the free coordinates.

    Returns ``(x0, N, free)`` (``N`` is n × len(free), row-major lists of mpq)
    or ``None`` when the system is inconsistent.
    """
    if not E:
        ident = [[mpq(1) if i == j else mpq(0) for j in range(n)] for i in range(n)]
        return [mpq(0)] * n, ident, list(range(n))
    aug = [list(row) + [fi] for row, fi in zip(E, f)]
    R, pivots = rref(aug, n + 1)
    if pivots and pivots[-1] == n:
        return None
    pset = set(pivots)
    free = [c for c in range(n) if c not in pset]
    x0 = [mpq(0)] * n
    N = [[mpq(0)] * len(free) for _ in range(n)]
    for k, c in enumerate(free):
        N[c][k] = mpq(1)
    for row, p in zip(R, pivots):
        x0[p] = row[n]
        for k, c in enumerate(free):
            N[p][k] = -row[c]
    return x0, N, free


def primitive_integer(vec: Sequence, rhs=None, *, fix_sign: bool = False):
    """Scale ``vec`` by a positive factor to a primitive integer vector.

    ``rhs`` is scaled along.  With ``fix_sign`` the first nonzero entry is made
    positive (valid only for equations).
    """
    fr = [as_fraction(v) for v in vec]
    nonzero = [v for v in fr if v != 0]
    if not nonzero:
        return tuple(fr), (as_fraction(rhs) if rhs is not None else None)
    den = reduce(lambda a, b: a * b // gcd(a, b), (v.denominator for v in nonzero), 1)
    ints = [int(v * den) for v in fr]
    g = reduce(gcd, (abs(v) for v in ints if v), 0)
    scale = Fraction(den, g)
    if fix_sign and nonzero[0] < 0:
        scale = -scale
    out = tuple(Fraction(v * scale) for v in fr)
    if rhs is None:
        return out, None
    return out, as_fraction(rhs) * scale


def ldl_pivoted(M: Sequence[Sequence], tol=0):
    """Symmetric-pivoted LDLᵀ of a symmetric matrix.

    Works on exact rationals (``tol=0``) or floats.  At each step the largest
    remaining diagonal entry is chosen; elimination stops as soon as it is
    ``<= tol`` (relative to the first pivot when ``tol > 0``).

    Returns ``(perm, L, D, residual)``: ``P M Pᵀ = L diag(D, residual) Lᵀ``
    where ``perm`` lists original indices in pivot order, ``L`` is unit lower
    triangular (k × k), ``D`` holds the ``r`` eliminated pivots and
    ``residual`` is the remaining (k−r) × (k−r) Schur complement.
    """
    k = len(M)
    exact = tol == 0
    conv = to_mpq if exact else float
    S = [[conv(M[i][j]) for j in range(k)] for i in range(k)]
    perm = list(range(k))
    L = [[conv(1) if i == j else conv(0) for j in range(k)] for i in range(k)]
    D = []
    cutoff = None
    for step in range(k):
        best = max(range(step, k), key=lambda i: S[i][i])
        pivot = S[best][best]
        if cutoff is None:
            cutoff = tol * abs(pivot) if not exact else 0
        if pivot <= cutoff:
            break
        for mat in (S,):
            mat[step], mat[best] = mat[best], mat[step]
            for row in mat:
                row[step], row[best] = row[best], row[step]
        perm[step], perm[best] = perm[best], perm[step]
        for j in range(step):
            L[step][j], L[best][j] = L[best][j], L[step][j]
        D.append(pivot)
        for i in range(step + 1, k):
            L[i][step] = S[i][step] / pivot
        for i in range(step + 1, k):
            li = L[i][step]
            if li:
                for j in range(step + 1, k):
                    S[i][j] -= li * S[step][j]
        for i in range(step + 1, k):
            S[i][step] = S[step][i] = conv(0)
    r = len(D)
    residual = [row[r:] for row in S[r:]]
    return perm, L, D, residual


def is_psd(M: Sequence[Sequence]) -> bool:
    """Exact positive-semidefiniteness test for a symmetric rational matrix.

    A PSD matrix whose diagonal vanishes is zero, so once every remaining
    pivot candidate is zero the Schur complement must vanish identically.
    """
    k = len(M)
    if k == 0:
        return True
    for i in range(k):
        for j in range(i):
            if M[i][j] != M[j][i]:
                raise ValueError("matrix is not symmetric")
    _, _, D, residual = ldl_pivoted(M)
    if any(d < 0 for d in D):
        return False
    return all(v == 0 for row in residual for v in row)
