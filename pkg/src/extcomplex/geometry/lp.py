"""Exact two-phase simplex over the rationals.

Problems have the shape ``max/min c·x  s.t.  A x <= b,  E x = f`` with free
``x``.  Equations are eliminated up front (``x = x0 + N z``), the free ``z``
are split into nonnegative parts and a dense tableau of ``mpq`` entries is
pivoted with Dantzig's rule, falling back to Bland's rule after a run of
degenerate pivots.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .rational import affine_parametrization, mpq, to_fraction, to_mpq

__all__ = ["LPResult", "LinearProgram", "lp_solve"]

_DEGENERATE_RUN = 30


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None = None
    x: tuple[Fraction, ...] | None = None
    ray: tuple[Fraction, ...] | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    @property
    def feasible(self) -> bool:
        return self.status != "infeasible"


def _pivot(T, basis, r, c):
    prow = T[r]
    pv = prow[c]
    if pv != 1:
        inv = 1 / pv
        prow = [v * inv if v else v for v in prow]
        T[r] = prow
    nz = [j for j, v in enumerate(prow) if v]
    for i, row in enumerate(T):
        if i == r:
            continue
        f = row[c]
        if f:
            for j in nz:
                row[j] -= f * prow[j]
    basis[r] = c


def _simplex(T, basis, obj, ncols, allowed):
    """Maximize over tableau ``T`` whose objective row index is ``obj``.

    Row ``obj`` stores ``-(reduced profit)``; the last column is the rhs.
    Returns ``("optimal", None)`` or ``("unbounded", entering column)``.
    """
    nrows = len(basis)
    degenerate = 0
    while True:
        z = T[obj]
        if degenerate < _DEGENERATE_RUN:
            best, col = 0, None
            for j in allowed:
                v = z[j]
                if v < best:
                    best, col = v, j
        else:
            col = next((j for j in allowed if z[j] < 0), None)
        if col is None:
            return "optimal", None
        row, ratio = None, None
        for i in range(nrows):
            a = T[i][col]
            if a > 0:
                q = T[i][ncols] / a
                if ratio is None or q < ratio or (q == ratio and basis[i] < basis[row]):
                    row, ratio = i, q
        if row is None:
            return "unbounded", col
        degenerate = degenerate + 1 if ratio == 0 else 0
        _pivot(T, basis, row, col)


class LinearProgram:
    """A fixed feasible region ``{x : A x <= b, E x = f}``.

    Phase one runs once; :meth:`optimize` then re-uses the feasible basis for
    any number of objectives.
    """

    def __init__(self, n: int, A: Sequence[Sequence], b: Sequence,
                 E: Sequence[Sequence] = (), f: Sequence = ()):
        self.n = n
        for row in list(A) + list(E):
            if len(row) != n:
                raise ValueError(f"constraint row has length {len(row)}, expected {n}")
        if len(A) != len(b) or len(E) != len(f):
            raise ValueError("constraint matrix and right-hand side lengths differ")
        self._A = [[to_mpq(v) for v in row] for row in A]
        self._b = [to_mpq(v) for v in b]
        self._E = [[to_mpq(v) for v in row] for row in E]
        self._f = [to_mpq(v) for v in f]
        self._phase1_done = False
        self._infeasible = False

    def _setup(self):
        par = affine_parametrization(self._E, self._f, self.n)
        if par is None:
            self._infeasible = True
            return
        x0, N, free = par
        p = len(free)
        self._x0, self._N, self._p = x0, N, p
        # G z <= h
        G, h = [], []
        for row, bi in zip(self._A, self._b):
            g = [sum((row[i] * N[i][k] for i in range(self.n) if row[i] and N[i][k]), mpq(0))
                 for k in range(p)]
            hi = bi - sum((row[i] * x0[i] for i in range(self.n) if row[i]), mpq(0))
            if not any(g):
                if hi < 0:
                    self._infeasible = True
                    return
                continue
            G.append(g)
            h.append(hi)
        m = len(G)
        # columns: z+ (p), z- (p), slacks (m), artificials, rhs
        need_art = [i for i in range(m) if h[i] < 0]
        nart = len(need_art)
        ncols = 2 * p + m + nart
        T = []
        basis = []
        art_col = {i: 2 * p + m + k for k, i in enumerate(need_art)}
        for i in range(m):
            sign = -1 if h[i] < 0 else 1
            row = [mpq(0)] * (ncols + 1)
            for k in range(p):
                row[k] = sign * G[i][k]
                row[p + k] = -sign * G[i][k]
            row[2 * p + i] = mpq(sign)
            row[ncols] = sign * h[i]
            if i in art_col:
                row[art_col[i]] = mpq(1)
                basis.append(art_col[i])
            else:
                basis.append(2 * p + i)
            T.append(row)
        if nart:
            # phase one: maximize -sum(artificials)
            w = [mpq(0)] * (ncols + 1)
            for i in need_art:
                row = T[i]
                for j in range(ncols + 1):
                    if row[j]:
                        w[j] -= row[j]
            for i in need_art:
                w[art_col[i]] = mpq(0)
            T.append(w)
            _simplex(T, basis, m, ncols, range(2 * p + m))
            if T[m][ncols] != 0:
                self._infeasible = True
                return
            T.pop()
            art_set = set(art_col.values())
            keep = []
            for i in range(m):
                if basis[i] in art_set:
                    col = next((j for j in range(2 * p + m) if T[i][j] != 0), None)
                    if col is None:
                        continue  # redundant row
                    _pivot(T, basis, i, col)
                keep.append(i)
            T = [T[i] for i in keep]
            basis = [basis[i] for i in keep]
            T = [row[: 2 * p + m] + [row[ncols]] for row in T]
        self._T = T
        self._basis = basis
        self._ncols = 2 * p + m
        self._m_rows = len(T)

    def _ensure(self):
        if not self._phase1_done:
            self._setup()
            self._phase1_done = True

    @property
    def is_feasible(self) -> bool:
        self._ensure()
        return not self._infeasible

    def _point(self, T, basis):
        p = self._p
        vals = [mpq(0)] * self._ncols
        for i, bcol in enumerate(basis):
            vals[bcol] = T[i][self._ncols]
        z = [vals[k] - vals[p + k] for k in range(p)]
        return self._lift(z, self._x0)

    def _lift(self, z, base):
        x = list(base)
        for i in range(self.n):
            row = self._N[i]
            acc = x[i]
            for k in range(self._p):
                if row[k] and z[k]:
                    acc += row[k] * z[k]
            x[i] = acc
        return x

    def feasible_point(self):
        """Some basic feasible solution, or ``None`` if infeasible."""
        self._ensure()
        if self._infeasible:
            return None
        return tuple(to_fraction(v) for v in self._point(self._T, self._basis))

    def optimize(self, c: Sequence, sense: str = "max") -> LPResult:
        if len(c) != self.n:
            raise ValueError(f"objective has length {len(c)}, expected {self.n}")
        if sense not in ("max", "min"):
            raise ValueError(f"unknown sense {sense!r}")
        self._ensure()
        if self._infeasible:
            return LPResult("infeasible")
        sgn = 1 if sense == "max" else -1
        cq = [sgn * to_mpq(v) for v in c]
        p, ncols = self._p, self._ncols
        cz = [sum((cq[i] * self._N[i][k] for i in range(self.n) if cq[i] and self._N[i][k]), mpq(0))
              for k in range(p)]
        const = sum((cq[i] * self._x0[i] for i in range(self.n) if cq[i]), mpq(0))
        T = [list(row) for row in self._T]
        basis = list(self._basis)
        z = [mpq(0)] * (ncols + 1)
        for k in range(p):
            z[k] = -cz[k]
            z[p + k] = cz[k]
        for i, bcol in enumerate(basis):
            f = z[bcol]
            if f:
                row = T[i]
                for j in range(ncols + 1):
                    if row[j]:
                        z[j] -= f * row[j]
        T.append(z)
        status, col = _simplex(T, basis, len(basis), ncols, range(ncols))
        if status == "unbounded":
            dz = [mpq(0)] * ncols
            dz[col] = mpq(1)
            for i, bcol in enumerate(basis):
                dz[bcol] = -T[i][col]
            dirz = [dz[k] - dz[p + k] for k in range(p)]
            ray = self._lift(dirz, [mpq(0)] * self.n)
            return LPResult("unbounded", ray=tuple(to_fraction(v) for v in ray))
        x = self._point(T, basis)
        value = sum((to_mpq(ci) * xi for ci, xi in zip(c, x)), mpq(0))
        return LPResult("optimal", to_fraction(value), tuple(to_fraction(v) for v in x))


def lp_solve(c, A, b, E=(), f=(), sense: str = "max") -> LPResult:
    return LinearProgram(len(c), A, b, E, f).optimize(c, sense)
