"""Nodal sets of P1 fields and the nodal-length scaling fit."""
from .extract import (NodalSet, ScalingFit, ZeroFreeReport, extract_nodal, nodal_domain_count, nodal_length,
                      scaling_fit, zero_free_audit)
from .regions import DiskRegion, PolygonRegion, as_region

__all__ = [
    "NodalSet", "ScalingFit", "ZeroFreeReport", "extract_nodal", "nodal_domain_count", "nodal_length",
    "scaling_fit", "zero_free_audit", "DiskRegion", "PolygonRegion", "as_region",
]
