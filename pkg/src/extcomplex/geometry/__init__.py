"""Exact geometry: rationals, linear programming, hulls, distances, ellipsoids."""
from .distance import hausdorff_distance, hausdorff_distance_sq, point_polytope_distance_sq
from .ellipsoid import Ellipsoid, EllipsoidError, john_ellipsoid
from .lp import LinearProgram, LPResult, lp_solve
from .polytope import (
    AffineMap,
    HPolyhedron,
    UnboundedError,
    VPolytope,
    affine_hull,
    contains,
    convex_hull_facets,
    enumerate_vertices,
    faces,
    is_bounded,
    recession_direction,
    relative_interior,
    solve_lp,
)
from .rational import as_fraction, format_rational, is_psd, ldl_pivoted

__all__ = [
    "AffineMap",
    "Ellipsoid",
    "EllipsoidError",
    "HPolyhedron",
    "LPResult",
    "LinearProgram",
    "UnboundedError",
    "VPolytope",
    "affine_hull",
    "as_fraction",
    "contains",
    "convex_hull_facets",
    "enumerate_vertices",
    "faces",
    "format_rational",
    "hausdorff_distance",
    "hausdorff_distance_sq",
    "is_bounded",
    "is_psd",
    "john_ellipsoid",
    "ldl_pivoted",
    "lp_solve",
    "point_polytope_distance_sq",
    "recession_direction",
    "relative_interior",
    "solve_lp",
]
