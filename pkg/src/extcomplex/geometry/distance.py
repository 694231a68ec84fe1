"""Exact squared Euclidean and Hausdorff distances between polytopes.

Squared distances are the currency here: they stay rational.  Square roots
are only taken when a caller asks for a float.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .polytope import VPolytope, _faces, _hull
from .rational import as_vector, mpq, solve_square, to_fraction, to_mpq

__all__ = ["point_polytope_distance_sq", "hausdorff_distance_sq", "hausdorff_distance"]


def _project_onto_affine_hull(p, pts):
    """Orthogonal projection of ``p`` onto ``aff(pts)`` (all mpq)."""
    base = pts[0]
    dirs = []
    for q in pts[1:]:
        v = [a - b for a, b in zip(q, base)]
        candidate = dirs + [v]
        gram = [[sum(x * y for x, y in zip(u, w)) for w in candidate] for u in candidate]
        if solve_square(gram, [0] * len(candidate)) is not None:
            dirs = candidate
    if not dirs:
        return list(base)
    gram = [[sum(x * y for x, y in zip(u, w)) for w in dirs] for u in dirs]
    rhs = [sum(x * (a - b) for x, a, b in zip(u, p, base)) for u in dirs]
    lam = solve_square(gram, rhs)
    return [b + sum(l * u[i] for l, u in zip(lam, dirs)) for i, b in enumerate(base)]


@lru_cache(maxsize=200_000)
def _distance_sq(p: tuple, vertices: tuple) -> Fraction:
    hull = _hull(vertices)
    ineqs = [([to_mpq(v) for v in a], to_mpq(b)) for a, b in hull.ineqs]
    eqs = [([to_mpq(v) for v in a], to_mpq(b)) for a, b in hull.eqs]
    pq = [to_mpq(v) for v in p]

    def inside(y, with_eqs):
        if with_eqs and any(sum(a_i * y_i for a_i, y_i in zip(a, y)) != b for a, b in eqs):
            return False
        return all(sum(a_i * y_i for a_i, y_i in zip(a, y) if a_i) <= b for a, b in ineqs)

    if inside(pq, True):
        return Fraction(0)
    verts = [[to_mpq(v) for v in vert] for vert in vertices]
    best = None
    for face in _faces(vertices):
        pts = [verts[i] for i in sorted(face)]
        y = pts[0] if len(pts) == 1 else _project_onto_affine_hull(pq, pts)
        if len(pts) > 1 and not inside(y, False):
            continue
        dist = sum((a - b) ** 2 for a, b in zip(pq, y))
        if best is None or dist < best:
            best = dist
    return to_fraction(best)


def point_polytope_distance_sq(p: Sequence, P: VPolytope) -> Fraction:
    """Squared Euclidean distance from ``p`` to ``P``.

    Brute force over all faces: the nearest point lies in the relative
    interior of some face, where it is the projection onto that face's affine
    hull.  A projection lying in ``P`` is a point of that face, so taking the
    minimum over feasible projections is exact.
    """
    if P.is_empty:
        raise ValueError("distance to an empty polytope")
    p = as_vector(p)
    if len(p) != P.dim:
        raise ValueError(f"point in R^{len(p)} vs polytope in R^{P.dim}")
    return _distance_sq(p, P.vertices)


def hausdorff_distance_sq(P: VPolytope, Q: VPolytope) -> Fraction:
    """Squared Hausdorff distance.

    The distance to a convex set is a convex function, so each directed
    supremum is attained at a vertex.
    """
    if P.dim != Q.dim:
        raise ValueError(f"polytopes live in R^{P.dim} and R^{Q.dim}")
    if P.is_empty or Q.is_empty:
        raise ValueError("Hausdorff distance needs non-empty polytopes")
    best = Fraction(0)
    shared = set(P.vertices) & set(Q.vertices)
    for v in P.vertices:
        if v not in shared:
            best = max(best, _distance_sq(v, Q.vertices))
    for v in Q.vertices:
        if v not in shared:
            best = max(best, _distance_sq(v, P.vertices))
    return best


def hausdorff_distance(P: VPolytope, Q: VPolytope) -> float:
    return math.sqrt(hausdorff_distance_sq(P, Q))
