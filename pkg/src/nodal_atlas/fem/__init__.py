"""P1 finite elements: meshes, coefficients, assembly, eigen-solves and
region quadrature."""
from .assemble import assemble, element_matrices, mass_matrix
from .coefficients import ANALYTIC_PRESETS, CoefficientField, constant, identity
from .fields import AnalyticField, ScalarField, harmonic_combination, homogeneous_harmonic, square_mode
from .mesh import Mesh, mesh_domain
from .quadrature import (BallContext, ConvexPolygon, Disk, Ellipse, QuadOrder, QuadResult, integrate_circle,
                         integrate_polygon, integrate_region)
from .solve import EigenSolution, align_to_reference, rayleigh_quotient, solve_aharmonic, solve_eigs

__all__ = [
    "assemble", "element_matrices", "mass_matrix", "ANALYTIC_PRESETS", "CoefficientField", "constant",
    "identity", "AnalyticField", "ScalarField", "harmonic_combination", "homogeneous_harmonic",
    "square_mode", "Mesh", "mesh_domain", "BallContext", "ConvexPolygon", "Disk", "Ellipse", "QuadOrder",
    "QuadResult", "integrate_circle", "integrate_polygon", "integrate_region", "EigenSolution",
    "align_to_reference", "rayleigh_quotient", "solve_aharmonic", "solve_eigs",
]
