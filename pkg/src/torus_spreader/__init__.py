"""Spreader constructions for lifts of torus homeomorphisms, with numerical verification."""
from .dynamics import (
    ConjugatedTranslation, FundamentalDomain, LiftWord, Linear, RescaledLift, Shear, Translation,
    apply, compose, inverse, phi, power,
)
from .errors import (
    ConstructionError, DegenerateInput, DegenerateNormalization, InvalidInput, LargeApproxFailure,
    ShapeMismatch, TooSmall,
)
from .geom import ConvexPolygon, Mat2Z, PointCloud, Segment, convex_hull, hausdorff, minkowski_zonogon
from .homothety import large_approx_check, linear_map_bound, normalize, perturbation_bound
from .rotation import (
    deviation_profile, generalized_rot_estimate, rigidity_profile, rotation_set_estimate,
    weak_spreading_probe,
)
from .spreader import build_commuting_family, build_spreader, factors, target_sequence, verify_stages

__all__ = [
    "ConjugatedTranslation", "FundamentalDomain", "LiftWord", "Linear", "RescaledLift", "Shear",
    "Translation", "apply", "compose", "inverse", "phi", "power",
    "ConstructionError", "DegenerateInput", "DegenerateNormalization", "InvalidInput",
    "LargeApproxFailure", "ShapeMismatch", "TooSmall",
    "ConvexPolygon", "Mat2Z", "PointCloud", "Segment", "convex_hull", "hausdorff", "minkowski_zonogon",
    "large_approx_check", "linear_map_bound", "normalize", "perturbation_bound",
    "deviation_profile", "generalized_rot_estimate", "rigidity_profile", "rotation_set_estimate",
    "weak_spreading_probe",
    "build_commuting_family", "build_spreader", "factors", "target_sequence", "verify_stages",
]

__version__ = "0.1.0"
