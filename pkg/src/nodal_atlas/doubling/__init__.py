"""Frequency function, weighted doubling index and the audits built on them."""
from .audits import (CenterShift, MonotonicityReport, StarShift, ThreeBall, center_shift_check,
                     monotonicity_audit, star_center_shift, three_ball_residual)
from .cuboid_index import CuboidIndex, DropAudit, drop_audit, maximal_index
from .extension import ExtensionDoubling, extension_doubling, extension_residual
from .profiles import (DoublingProfile, Ellipsoid, FrequencyProfile, doubling_profile, dyadic_ladder,
                       frequency_profile, mu_bounds_check)
from .sqrt import matrix_sqrt

__all__ = [
    "CenterShift", "MonotonicityReport", "StarShift", "ThreeBall", "center_shift_check",
    "monotonicity_audit", "star_center_shift", "three_ball_residual", "CuboidIndex", "DropAudit",
    "drop_audit", "maximal_index", "ExtensionDoubling", "extension_doubling", "extension_residual",
    "DoublingProfile", "Ellipsoid", "FrequencyProfile", "doubling_profile", "dyadic_ladder",
    "frequency_profile", "mu_bounds_check", "matrix_sqrt",
]
