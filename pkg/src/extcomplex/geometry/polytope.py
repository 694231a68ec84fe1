"""Exact V- and H-representations, LP wrapper, hull and vertex enumeration.

Both enumerations are brute force: facets come from hyperplanes through
affinely independent point subsets that leave every point on one side, and
vertices from nonsingular square subsystems of the inequalities.  That is fine
at the scale this package targets (dimension up to about six).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from math import gcd
from typing import Iterable, Sequence

from .lp import LinearProgram, LPResult
from .rational import (
    as_fraction,
    as_vector,
    mpq,
    nullspace,
    primitive_integer,
    rref,
    solve_square,
    affine_parametrization,
    to_fraction,
    to_mpq,
)

__all__ = [
    "VPolytope",
    "HPolyhedron",
    "AffineMap",
    "Inequality",
    "solve_lp",
    "is_bounded",
    "convex_hull_facets",
    "enumerate_vertices",
    "recession_direction",
    "affine_hull",
    "faces",
    "contains",
    "relative_interior",
    "UnboundedError",
]

Point = tuple[Fraction, ...]
Inequality = tuple[Point, Fraction]


class UnboundedError(ValueError):
    """Raised when an operation needs a bounded polyhedron."""


@dataclass(frozen=True)
class HPolyhedron:
    """``{x in R^dim : a·x <= b for (a, b) in ineqs, a·x = b for (a, b) in eqs}``."""

    dim: int
    ineqs: tuple[Inequality, ...] = ()
    eqs: tuple[Inequality, ...] = ()
    empty: bool = field(default=False, compare=False)

    def __post_init__(self):
        ineqs = tuple((as_vector(a), as_fraction(b)) for a, b in self.ineqs)
        eqs = tuple((as_vector(a), as_fraction(b)) for a, b in self.eqs)
        for a, _ in ineqs + eqs:
            if len(a) != self.dim:
                raise ValueError(f"constraint of length {len(a)} in a {self.dim}-dimensional polyhedron")
        object.__setattr__(self, "ineqs", ineqs)
        object.__setattr__(self, "eqs", eqs)
        trivially_empty = any(not any(a) and b < 0 for a, b in ineqs) or \
            any(not any(a) and b != 0 for a, b in eqs)
        if trivially_empty:
            object.__setattr__(self, "empty", True)

    def size(self) -> int:
        return len(self.ineqs)

    def contains(self, x: Sequence) -> bool:
        x = as_vector(x)
        if len(x) != self.dim:
            raise ValueError("dimension mismatch")
        return all(_dot(a, x) <= b for a, b in self.ineqs) and \
            all(_dot(a, x) == b for a, b in self.eqs)

    def lp(self) -> LinearProgram:
        return LinearProgram(self.dim, [a for a, _ in self.ineqs], [b for _, b in self.ineqs],
                             [a for a, _ in self.eqs], [b for _, b in self.eqs])

    @classmethod
    def box(cls, lower: Sequence, upper: Sequence) -> "HPolyhedron":
        d = len(lower)
        ineqs = []
        for i in range(d):
            e = [0] * d
            e[i] = 1
            ineqs.append((tuple(e), upper[i]))
            e = [0] * d
            e[i] = -1
            ineqs.append((tuple(e), -as_fraction(lower[i])))
        return cls(d, tuple(ineqs))


@dataclass(frozen=True)
class VPolytope:
    """Convex hull of ``vertices`` in ``R^dim``.

    Use :meth:`from_points` to build one from arbitrary points; it drops
    duplicates and non-extreme points and sorts the rest.  The raw constructor
    only sorts and deduplicates.
    """

    dim: int
    vertices: tuple[Point, ...]

    def __post_init__(self):
        verts = tuple(sorted(set(as_vector(v) for v in self.vertices)))
        for v in verts:
            if len(v) != self.dim:
                raise ValueError(f"vertex {v} does not live in R^{self.dim}")
        object.__setattr__(self, "vertices", verts)

    @classmethod
    def from_points(cls, points: Iterable[Sequence], dim: int | None = None) -> "VPolytope":
        pts = sorted(set(as_vector(p) for p in points))
        if dim is None:
            if not pts:
                raise ValueError("cannot infer the dimension of an empty point set")
            dim = len(pts[0])
        if len(pts) <= 2:
            return cls(dim, tuple(pts))
        hull = _hull(tuple(pts))
        return cls(dim, tuple(pts[i] for i in hull.vertex_indices))

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    def affine_dim(self) -> int:
        if not self.vertices:
            return -1
        return _hull(self.vertices).rank


@dataclass(frozen=True)
class AffineMap:
    """``x -> matrix @ x + offset`` from ``R^n`` to ``R^d``."""

    matrix: tuple[Point, ...]
    offset: Point
    n: int = -1

    def __post_init__(self):
        mat = tuple(as_vector(r) for r in self.matrix)
        off = as_vector(self.offset)
        if len(mat) != len(off):
            raise ValueError("matrix rows and offset length differ")
        widths = {len(r) for r in mat}
        if len(widths) > 1:
            raise ValueError("ragged matrix")
        n = self.n
        if widths:
            w = widths.pop()
            if n >= 0 and n != w:
                raise ValueError("declared source dimension disagrees with matrix")
            n = w
        if n < 0:
            raise ValueError("source dimension of an empty-target map must be given")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "offset", off)
        object.__setattr__(self, "n", n)

    @property
    def d(self) -> int:
        return len(self.offset)

    def apply(self, x: Sequence) -> Point:
        if len(x) != self.n:
            raise ValueError(f"point of length {len(x)} for a map from R^{self.n}")
        return tuple(_dot(row, x) + o for row, o in zip(self.matrix, self.offset))

    def column(self, j: int) -> Point:
        return tuple(row[j] for row in self.matrix)

    @classmethod
    def identity(cls, n: int) -> "AffineMap":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), (0,) * n, n)


def _dot(a, b):
    return sum((x * y for x, y in zip(a, b) if x and y), Fraction(0))


def solve_lp(objective: Sequence, feasible: HPolyhedron, sense: str = "max") -> LPResult:
    """Exact LP optimum of ``objective`` over ``feasible``."""
    if len(objective) != feasible.dim:
        raise ValueError(f"objective of length {len(objective)} for a {feasible.dim}-dimensional polyhedron")
    if feasible.empty:
        return LPResult("infeasible")
    return feasible.lp().optimize(as_vector(objective), sense)


def is_bounded(H: HPolyhedron, program: LinearProgram | None = None) -> bool:
    """LP in every ``±e_i`` direction; an empty polyhedron counts as bounded."""
    program = program or H.lp()
    if H.empty or not program.is_feasible:
        return True
    for i in range(H.dim):
        for s in (1, -1):
            c = [0] * H.dim
            c[i] = s
            if program.optimize(c).status == "unbounded":
                return False
    return True


# ---------------------------------------------------------------------------
# convex hull


@dataclass(frozen=True)
class _Hull:
    rank: int
    eqs: tuple[Inequality, ...]
    ineqs: tuple[Inequality, ...]
    tight: tuple[frozenset, ...]  # point indices on each facet, aligned with ineqs
    vertex_indices: tuple[int, ...]


def _det_int(M):
    """Bareiss determinant of a square integer matrix."""
    n = len(M)
    if n == 0:
        return 1
    A = [list(r) for r in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        akk = A[k][k]
        for i in range(k + 1, n):
            aik = A[i][k]
            row_i, row_k = A[i], A[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * A[n - 1][n - 1]


def _normal_through(pts):
    """Integer normal of the hyperplane through ``r`` points of ``Z^r``."""
    base = pts[0]
    r = len(base)
    diffs = [[p[j] - base[j] for j in range(r)] for p in pts[1:]]
    normal = []
    for j in range(r):
        minor = [row[:j] + row[j + 1:] for row in diffs]
        dj = _det_int(minor)
        normal.append(dj if j % 2 == 0 else -dj)
    return normal


def _to_integer_points(points):
    den = reduce(lambda a, b: a * b // gcd(a, b), (c.denominator for p in points for c in p), 1)
    return den, [tuple(int(c * den) for c in p) for p in points]


def _independent(Y, idx, k):
    """First ``k`` affinely independent points among ``Y[i]`` for ``i`` in ``idx``."""
    chosen = []
    basis = []
    for i in idx:
        if not chosen:
            chosen.append(i)
            if len(chosen) == k:
                break
            continue
        v = [mpq(a - b) for a, b in zip(Y[i], Y[chosen[0]])]
        for p, row in basis:
            f = v[p]
            if f:
                v = [a - f * b for a, b in zip(v, row)]
        p = next((j for j, a in enumerate(v) if a), None)
        if p is None:
            continue
        inv = 1 / v[p]
        basis.append((p, [a * inv for a in v]))
        chosen.append(i)
        if len(chosen) == k:
            break
    return chosen


def _wrap(Y, ridge, skip, q):
    """Supporting hyperplane through the ``r-1`` points ``ridge`` with ``Y[q]`` strictly inside.

    Gift wrapping: rotate about ``aff(ridge)`` whenever a point is outside.
    Points in ``skip`` lie on the starting hyperplane and are never pivots.
    """
    R = [Y[i] for i in ridge]
    cur = None
    for i, y in enumerate(Y):
        if i in skip:
            continue
        if cur is not None and sum(a * c for a, c in zip(cur[0], y)) <= cur[1]:
            continue
        normal = _normal_through(R + [y])
        beta = sum(a * c for a, c in zip(normal, y))
        side = sum(a * c for a, c in zip(normal, Y[q])) - beta
        if side == 0:
            continue
        if side > 0:
            normal = [-a for a in normal]
            beta = -beta
        cur = (normal, beta)
    normal, beta = cur
    tight = frozenset(i for i, y in enumerate(Y) if sum(a * c for a, c in zip(normal, y)) == beta)
    return normal, beta, tight


def _seed_facet(Y, r):
    """One facet of the full-rank point set ``Y ⊆ Z^r``."""
    m = len(Y)
    if r == 1:
        lo = min(y[0] for y in Y)
        return [-1], -lo, frozenset(i for i in range(m) if Y[i][0] == lo)
    # a facet of the shadow along the first axis lifts to a supporting hyperplane
    normal, beta, tight = _seed_facet([y[1:] for y in Y], r - 1)
    normal = [0] + list(normal)
    ridge = _independent(Y, sorted(tight), r)
    if len(ridge) == r:
        return normal, beta, tight
    q = next(i for i in range(m) if i not in tight)
    return _wrap(Y, ridge, tight, q)


def _facets_full_rank(Y, r):
    """All facets ``(normal, beta, tight)`` of ``conv(Y)``, ``Y ⊆ Z^r`` of full rank ``r >= 2``."""
    seed = _seed_facet(Y, r)
    facets = {seed[2]: seed}
    queue = [seed]
    done = set()
    while queue:
        normal, beta, tight = queue.pop()
        members = sorted(tight)
        sub = _hull(tuple(Y[i] for i in members))
        for ridge_local in sub.tight:
            ridge = frozenset(members[i] for i in ridge_local)
            if ridge in done:
                continue
            done.add(ridge)
            pivots = _independent(Y, sorted(ridge), r - 1)
            # a point of this facet off the ridge lies strictly inside the neighbour
            inner = next(i for i in members if i not in ridge)
            nb = _wrap(Y, pivots, tight, inner)
            if nb[2] not in facets:
                facets[nb[2]] = nb
                queue.append(nb)
    return list(facets.values())


@lru_cache(maxsize=4096)
def _hull(points: tuple[Point, ...]) -> _Hull:
    m = len(points)
    d = len(points[0])
    den, ipts = _to_integer_points(points)
    p0 = ipts[0]
    diffs = [[c - c0 for c, c0 in zip(p, p0)] for p in ipts[1:]]
    R, pivots = rref(diffs, d) if diffs else ([], [])
    r = len(pivots)

    # affine hull equations in RREF form (pivot entries one)
    eq_rows = []
    if r < d:
        normals = nullspace(R, d) if R else [[mpq(int(i == j)) for j in range(d)] for i in range(d)]
        origin = points[0]
        aug = [list(nv) + [sum(to_mpq(c) * v for c, v in zip(origin, nv))] for nv in normals]
        eq_rows, _ = rref(aug, d + 1)
    eq_pivots = [next(j for j in range(d) if row[j] != 0) for row in eq_rows]
    eqs = []
    for row in eq_rows:
        a, b = primitive_integer([to_fraction(v) for v in row[:d]], to_fraction(row[d]), fix_sign=True)
        eqs.append((a, b))

    if r == 0:
        return _Hull(0, tuple(eqs), (), (), (0,))

    Y = [tuple(p[j] for j in pivots) for p in ipts]
    raw: list[tuple[list[int], int, frozenset]] = []
    if r == 1:
        vals = [y[0] for y in Y]
        lo, hi = min(vals), max(vals)
        raw.append(([-1], -lo, frozenset(i for i, v in enumerate(vals) if v == lo)))
        raw.append(([1], hi, frozenset(i for i, v in enumerate(vals) if v == hi)))
    else:
        raw = _facets_full_rank(Y, r)

    ineqs = []
    for normal, beta, tight in raw:
        a = [Fraction(0)] * d
        for j, v in zip(pivots, normal):
            a[j] = Fraction(v)
        b = Fraction(beta, den)
        for row, p in zip(eq_rows, eq_pivots):
            f = a[p]
            if f:
                for j in range(d):
                    a[j] -= f * to_fraction(row[j])
                b -= f * to_fraction(row[d])
        a, b = primitive_integer(a, b)
        ineqs.append(((a, b), tight))
    ineqs.sort(key=lambda item: item[0])

    vertex_indices = []
    tights = [t for _, t in ineqs]
    for i in range(m):
        on = [t for t in tights if i in t]
        if on and frozenset.intersection(*on) == {i}:
            vertex_indices.append(i)
    return _Hull(r, tuple(eqs), tuple(ab for ab, _ in ineqs), tuple(tights), tuple(vertex_indices))


def convex_hull_facets(P: VPolytope) -> HPolyhedron:
    """Facet description of ``conv(P.vertices)``, canonicalized.

    Lower-dimensional input gets equations spanning its affine hull (in
    reduced row echelon form); facet normals are then reduced modulo those
    equations, scaled to primitive integers and sorted.
    """
    if P.is_empty:
        raise ValueError("convex hull of an empty point set")
    hull = _hull(P.vertices)
    return HPolyhedron(P.dim, hull.ineqs, hull.eqs)


def affine_hull(P: VPolytope) -> HPolyhedron:
    return HPolyhedron(P.dim, (), _hull(P.vertices).eqs)


def contains(P: VPolytope, x: Sequence) -> bool:
    return convex_hull_facets(P).contains(x)


@lru_cache(maxsize=4096)
def _faces(vertices: tuple[Point, ...]) -> tuple[frozenset, ...]:
    hull = _hull(vertices)
    everything = frozenset(range(len(vertices)))
    found = {everything}
    frontier = set(hull.tight)
    while frontier:
        found |= frontier
        new = set()
        for f in frontier:
            for g in hull.tight:
                h = f & g
                if h and h not in found:
                    new.add(h)
        frontier = new
    return tuple(sorted(found, key=lambda s: (len(s), sorted(s))))


def faces(P: VPolytope) -> list[tuple[Point, ...]]:
    """All non-empty faces of ``P`` as vertex tuples, smallest first."""
    if P.is_empty:
        return []
    return [tuple(P.vertices[i] for i in sorted(face)) for face in _faces(P.vertices)]


# ---------------------------------------------------------------------------
# vertex enumeration


def relative_interior(H: HPolyhedron) -> tuple[tuple[int, ...], Point] | None:
    """Implicit equalities of ``H`` and a point of its relative interior.

    Returns ``(indices, x)`` where ``indices`` lists the inequalities that
    hold with equality on all of ``H`` and ``x`` satisfies every other one
    strictly, or ``None`` when ``H`` is empty.  Each round maximizes the
    total (capped) slack of the undecided inequalities; the ones that become
    slack are settled, and a round with optimum zero proves the rest tight.
    """
    if H.empty:
        return None
    n = H.dim
    m = len(H.ineqs)
    undecided = list(range(m))
    points = []
    while undecided:
        k = len(undecided)
        slot = {i: j for j, i in enumerate(undecided)}
        A, b = [], []
        for i, (a, bi) in enumerate(H.ineqs):
            s_part = [0] * k
            if i in slot:
                s_part[slot[i]] = 1
            A.append(list(a) + s_part)
            b.append(bi)
        for j in range(k):
            e = [0] * (n + k)
            e[n + j] = 1
            A.append(e)
            b.append(1)
        E = [list(a) + [0] * k for a, _ in H.eqs]
        f = [bi for _, bi in H.eqs]
        res = LinearProgram(n + k, A, b, E, f).optimize([0] * n + [1] * k)
        if res.status == "infeasible":
            return None
        if res.value <= 0:
            break
        points.append(res.x[:n])
        undecided = [i for i in undecided if res.x[n + slot[i]] == 0]
    if not points:
        x = H.lp().feasible_point()
        if x is None:
            return None
        points.append(x)
    x = tuple(sum(c) / len(points) for c in zip(*points))
    return tuple(undecided), x


def enumerate_vertices(H: HPolyhedron) -> VPolytope:
    """Exact vertex set of a bounded polyhedron.

    Vertices are read off the polar: with ``z0`` in the relative interior,
    facets ``c·w <= beta`` of ``conv{g_i / (h_i - g_i·z0)}`` correspond to
    vertices ``z0 + c / beta``.
    """
    if H.empty:
        return VPolytope(H.dim, ())
    program = H.lp()
    if not program.is_feasible:
        return VPolytope(H.dim, ())
    if not is_bounded(H, program):
        raise UnboundedError("vertex enumeration needs a bounded polyhedron")
    implicit, xr = relative_interior(H)
    eqs = list(H.eqs) + [H.ineqs[i] for i in implicit]
    x0, N, free = affine_parametrization([[to_mpq(v) for v in a] for a, _ in eqs],
                                         [to_mpq(b) for _, b in eqs], H.dim)
    p = len(free)

    def lift(z):
        return tuple(to_fraction(x0[i] + sum((N[i][k] * z[k] for k in range(p) if N[i][k]), mpq(0)))
                     for i in range(H.dim))

    if p == 0:
        return VPolytope(H.dim, (lift([]),))
    z0 = [to_mpq(xr[c]) for c in free]
    polar = set()
    for a, b in H.ineqs:
        aq = [to_mpq(v) for v in a]
        g = [sum((aq[i] * N[i][k] for i in range(H.dim) if aq[i] and N[i][k]), mpq(0)) for k in range(p)]
        if not any(g):
            continue
        slack = to_mpq(b) - sum((aq[i] * x0[i] for i in range(H.dim) if aq[i]), mpq(0)) \
            - sum((gk * zk for gk, zk in zip(g, z0)), mpq(0))
        polar.add(tuple(to_fraction(gk / slack) for gk in g))
    hull = _hull(tuple(sorted(polar)))
    verts = []
    for c, beta in hull.ineqs:
        verts.append(lift([z + to_mpq(ck / beta) for z, ck in zip(z0, c)]))
    return VPolytope(H.dim, tuple(verts))


def recession_direction(C: HPolyhedron) -> Point | None:
    """A nonzero ``u`` with ``C + R_{>=0} u ⊆ C``, or ``None`` when ``C`` is bounded."""
    if C.empty or not C.lp().is_feasible:
        raise ValueError("recession direction of an empty polyhedron")
    n = C.dim
    cone_ineqs = [a for a, _ in C.ineqs]
    cone_eqs = [a for a, _ in C.eqs]
    for i in range(n):
        for s in (1, -1):
            e = [0] * n
            e[i] = s
            program = LinearProgram(n, cone_ineqs + [e], [0] * len(cone_ineqs) + [1],
                                    cone_eqs, [0] * len(cone_eqs))
            res = program.optimize(e)
            if res.optimal and res.value > 0:
                return res.x
    return None
