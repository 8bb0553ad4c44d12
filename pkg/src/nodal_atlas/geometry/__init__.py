"""Planar domain geometry: presets, quasiconvexity modulus, flat spots,
convex-hull gaps, the pathological curve and cuboid decompositions."""
from .curves import CircleArc, PiecewiseQuadratic, Polynomial, piecewise_linear
from .decompose import (Cuboid, Decomposition, boundary_cuboid, check_decomposition,
                        decompose_cuboid)
from .domain import GraphPatch, PlanarDomain
from .flatspot import FlatSpot, SupportPlane, find_flat_spot, support_violation
from .hull import HullGap, convex_hull_gap
from .modulus import QuasiconvexityModulus, estimate_modulus
from .pathological import (PathologicalCurve, enumerate_rationals, pathological_curve,
                           second_derivative_measure)
from .presets import PRESETS, get_domain

__all__ = [
    "CircleArc", "PiecewiseQuadratic", "Polynomial", "piecewise_linear",
    "Cuboid", "Decomposition", "boundary_cuboid", "check_decomposition", "decompose_cuboid",
    "GraphPatch", "PlanarDomain", "FlatSpot", "SupportPlane", "find_flat_spot",
    "support_violation", "HullGap", "convex_hull_gap", "QuasiconvexityModulus",
    "estimate_modulus", "PathologicalCurve", "enumerate_rationals", "pathological_curve",
    "second_derivative_measure", "PRESETS", "get_domain",
]
