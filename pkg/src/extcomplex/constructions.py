"""Builders for linear extended formulations.

``trivial_vrep_ef`` lifts a point set to the simplex of convex weights,
``balas_union`` describes the convex hull of a union of bounded pieces,
``product_ef`` handles Cartesian products, and ``shannon_01_ef`` combines
the three into a formulation of any 0/1-polytope in ``R^d`` whose size is at
most ``2^(d-s) + 2^(2^s) (2^s + 1)``.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .extform import LinearEF
from .geometry.polytope import AffineMap, HPolyhedron, UnboundedError, VPolytope, is_bounded

__all__ = [
    "ShannonPlan",
    "trivial_vrep_ef",
    "balas_union",
    "product_ef",
    "shannon_01_plan",
    "shannon_01_ef",
    "default_suffix_width",
    "shannon_declared_bound",
]


def _unit(n: int, i: int, value=1) -> tuple:
    return tuple(value if j == i else 0 for j in range(n))


def trivial_vrep_ef(V: VPolytope) -> LinearEF:
    """Convex weights ``lam >= 0, sum lam = 1`` mapped to ``sum lam_i v_i``."""
    if V.is_empty:
        raise ValueError("trivial formulation of an empty point set")
    k = len(V.vertices)
    ineqs = tuple((_unit(k, i, -1), 0) for i in range(k))
    eqs = (((1,) * k, 1),)
    matrix = tuple(tuple(v[r] for v in V.vertices) for r in range(V.dim))
    return LinearEF(HPolyhedron(k, ineqs, eqs), AffineMap(matrix, (0,) * V.dim, k))


def _check_bounded(ef: LinearEF):
    if not is_bounded(ef.lifted):
        raise UnboundedError("disjunctive union needs bounded lifted sets")


def balas_union(efs: Sequence[LinearEF]) -> LinearEF:
    """Formulation of ``conv(P_1 ∪ ... ∪ P_l)`` of size ``l + sum size(P_i)``.

    Variables are ``(z^1, ..., z^l, lam)``; piece ``i`` is homogenized to
    ``A_i z^i <= lam_i b_i`` and ``E_i z^i = lam_i f_i``, and the image is
    ``sum_i C_i z^i + lam_i g_i``.  Homogenizing is only sound for bounded
    pieces, which is checked.
    """
    efs = list(efs)
    if not efs:
        raise ValueError("union of no formulations")
    d = efs[0].d
    if any(ef.d != d for ef in efs):
        raise ValueError("all pieces must project into the same space")
    for ef in efs:
        _check_bounded(ef)
    l = len(efs)  # noqa: E741
    offsets = []
    total = 0
    for ef in efs:
        offsets.append(total)
        total += ef.n
    N = total + l

    def embed(i, a, lam_coeff):
        row = [0] * N
        row[offsets[i]:offsets[i] + efs[i].n] = a
        row[total + i] = lam_coeff
        return tuple(row)

    ineqs, eqs = [], []
    for i, ef in enumerate(efs):
        ineqs += [(embed(i, a, -b), 0) for a, b in ef.lifted.ineqs]
        eqs += [(embed(i, a, -f), 0) for a, f in ef.lifted.eqs]
    ineqs += [(_unit(N, total + i, -1), 0) for i in range(l)]
    eqs.append((tuple([0] * total + [1] * l), 1))
    matrix = []
    for r in range(d):
        row = []
        for ef in efs:
            row += list(ef.proj.matrix[r])
        row += [ef.proj.offset[r] for ef in efs]
        matrix.append(tuple(row))
    return LinearEF(HPolyhedron(N, tuple(ineqs), tuple(eqs)), AffineMap(tuple(matrix), (0,) * d, N))


def product_ef(ef1: LinearEF, ef2: LinearEF) -> LinearEF:
    """Formulation of ``P_1 × P_2`` with the two lifts side by side."""
    n1, n2 = ef1.n, ef2.n
    N = n1 + n2

    def left(a):
        return tuple(a) + (0,) * n2

    def right(a):
        return (0,) * n1 + tuple(a)

    ineqs = [(left(a), b) for a, b in ef1.lifted.ineqs] + [(right(a), b) for a, b in ef2.lifted.ineqs]
    eqs = [(left(a), b) for a, b in ef1.lifted.eqs] + [(right(a), b) for a, b in ef2.lifted.eqs]
    matrix = [left(r) for r in ef1.proj.matrix] + [right(r) for r in ef2.proj.matrix]
    offset = tuple(ef1.proj.offset) + tuple(ef2.proj.offset)
    empty = ef1.lifted.empty or ef2.lifted.empty
    lifted = HPolyhedron(N, tuple(ineqs), tuple(eqs), empty)
    return LinearEF(lifted, AffineMap(tuple(matrix), offset, N))


# ---------------------------------------------------------------------------
# 0/1-polytopes


@dataclass(frozen=True)
class ShannonPlan:
    """Grouping of a 0/1 point set by suffix fibers.

    Each group ``(Y, X)`` holds one suffix pattern ``Y ⊆ {0,1}^s`` and every
    prefix ``x`` whose fiber ``{y : (x, y) in V}`` equals ``Y``.
    """

    d: int
    s: int
    groups: tuple[tuple[tuple[tuple[int, ...], ...], tuple[tuple[int, ...], ...]], ...]
    declared_bound: int

    def points(self) -> set[tuple[int, ...]]:
        return {x + y for Y, X in self.groups for x in X for y in Y}

    def size(self) -> int:
        """Size of the formulation this plan yields."""
        return sum(1 + len(X) + len(Y) for Y, X in self.groups)


def default_suffix_width(d: int) -> int:
    return int(math.floor(math.log2(d / 4))) if d >= 4 else 0


def shannon_declared_bound(d: int, s: int) -> int:
    return 2 ** (d - s) + 2 ** (2 ** s) * (2 ** s + 1)


def _zero_one_points(V) -> tuple[int, list[tuple[int, ...]]]:
    if isinstance(V, VPolytope):
        d, pts = V.dim, list(V.vertices)
    else:
        pts = [tuple(p) for p in V]
        if not pts:
            raise ValueError("empty 0/1 point set")
        d = len(pts[0])
    out = set()
    for p in pts:
        if len(p) != d:
            raise ValueError("points of different lengths")
        if any(c not in (0, 1) for c in p):
            raise ValueError(f"{p} is not a 0/1 point")
        out.add(tuple(int(c) for c in p))
    if not out:
        raise ValueError("empty 0/1 point set")
    return d, sorted(out)


def shannon_01_plan(V: VPolytope | Iterable[Sequence[int]], s: int | None = None) -> ShannonPlan:
    d, pts = _zero_one_points(V)
    if s is None:
        s = default_suffix_width(d)
    if not 0 <= s <= d:
        raise ValueError(f"suffix width {s} outside 0..{d}")
    fibers: dict[tuple, list] = defaultdict(list)
    for p in pts:
        fibers[p[: d - s]].append(p[d - s:])
    by_pattern: dict[tuple, list] = defaultdict(list)
    for x, ys in fibers.items():
        by_pattern[tuple(sorted(ys))].append(x)
    groups = tuple((Y, tuple(sorted(X))) for Y, X in sorted(by_pattern.items()))
    return ShannonPlan(d, s, groups, shannon_declared_bound(d, s))


def shannon_01_ef(V: VPolytope | Iterable[Sequence[int]], s: int | None = None,
                  plan: ShannonPlan | None = None) -> LinearEF:
    """Formulation of ``conv(V)`` for ``V ⊆ {0,1}^d`` via suffix-fiber grouping.

    Every group contributes ``conv(X) × conv(Y)`` (trivial lifts joined by a
    product) and the pieces are merged with ``balas_union``.
    """
    default = s is None
    plan = plan or shannon_01_plan(V, s)
    d, s = plan.d, plan.s
    pieces = []
    for Y, X in plan.groups:
        ex = trivial_vrep_ef(VPolytope(d - s, tuple(tuple(Fraction(c) for c in x) for x in X)))
        ey = trivial_vrep_ef(VPolytope(s, tuple(tuple(Fraction(c) for c in y) for y in Y)))
        pieces.append(product_ef(ex, ey))
    ef = balas_union(pieces)
    if ef.size() != plan.size():
        raise RuntimeError(f"size accounting mismatch: {ef.size()} vs {plan.size()}")
    if ef.size() > plan.declared_bound:
        raise RuntimeError(f"size {ef.size()} exceeds the declared bound {plan.declared_bound}")
    if default and d >= 4 and ef.size() > math.ceil(9 * 2 ** d / d):
        raise RuntimeError(f"size {ef.size()} exceeds 9·2^d/d for d={d}")
    return ef
