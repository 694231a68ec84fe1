"""Extended formulations of polytopes: construction, verification, normalization and lower bounds."""
from .bounds import (
    BoundInputs,
    FamilySpec,
    certify_family_bound,
    circumradius_sq,
    corollary41_thresholds,
    corollary42_bounds,
    generate_family,
    min_pairwise_separation_sq,
    theorem1_bound,
)
from .constructions import balas_union, product_ef, shannon_01_ef, shannon_01_plan, trivial_vrep_ef
from .extform import (
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
from .geometry import HPolyhedron, VPolytope, AffineMap, hausdorff_distance_sq, john_ellipsoid
from .normalization import (
    NormalizationError,
    bounded_section,
    helton_vinnikov_reduce,
    normalize,
    sandwich_transform,
)

__version__ = "0.1.0"
