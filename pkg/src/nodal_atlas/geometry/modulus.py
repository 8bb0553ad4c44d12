"""Estimate the quasiconvexity modulus omega(r) of a planar domain.

omega(r) is taken as the smallest w such that, for every sampled boundary
point x0, the cap Omega cap B_r(x0) lies in some half-plane
{ (y - x0).n <= r w }.  The max of a linear function over the cap is attained
on its boundary, which consists of boundary samples inside B_r and circle
samples inside Omega, so only those points are tested.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from .domain import PlanarDomain

ZERO_CLAMP = 1e-12


@dataclass(frozen=True)
class QuasiconvexityModulus:
    radii: np.ndarray
    values: np.ndarray
    raw_values: np.ndarray      # before the isotonic pass
    worst_anchor: np.ndarray    # boundary point attaining the max per radius

    def __call__(self, r):
        """Piecewise-linear interpolation, constant beyond the grid ends."""
        return np.interp(r, self.radii, self.values)


def _directions(count):
    th = 2 * np.pi * np.arange(count) / count
    return np.column_stack([np.cos(th), np.sin(th)])


def estimate_modulus(domain: PlanarDomain, radii, direction_samples=720, anchors=None,
                     spacing=None, circle_samples=720):
    """Return the estimated modulus on ``radii``.

    ``anchors`` optionally restricts the boundary points x0 (an (m, 2) array
    of points on the polyline); by default every boundary sample is used.
    ``spacing`` is the boundary sampling distance (default min(radii)/8).
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or len(radii) == 0 or np.any(radii <= 0):
        raise InputError("radii must be a non-empty list of positive values")
    if np.any(np.diff(radii) <= 0):
        raise InputError("radii must be strictly increasing")
    if radii[-1] > domain.r0 * (1 + 1e-12):
        raise InputError(f"radius {radii[-1]} exceeds r0 = {domain.r0}")
    if radii[-1] > domain.diameter():
        raise InputError("radius exceeds the domain diameter")
    spacing = radii[0] / 8 if spacing is None else float(spacing)
    pts, edge_idx, t = domain.sample_boundary(spacing)
    if len(pts) == 0:
        raise InputError("empty boundary sampling")
    normals = domain.outward_normals()
    n_edges = len(normals)
    if anchors is None:
        # anchors at roughly twice the sampling distance, every vertex kept
        keep = (t == 0) | (np.arange(len(pts)) % 2 == 0)
        anc = pts[keep]
        anc_edges = edge_idx[keep]
        at_vertex = t[keep] == 0
    else:
        anc = np.atleast_2d(np.asarray(anchors, dtype=float))
        if len(anc) == 0:
            raise InputError("empty anchor set")
        a, b = domain.edges()
        from .domain import point_segment_distance
        dist = point_segment_distance(anc, a, b)
        anc_edges = np.argmin(dist, axis=1)
        at_vertex = np.min(np.hypot(*(anc[:, None, :] - a[None]).transpose(2, 0, 1)), axis=1) < 1e-12
    base_dirs = _directions(direction_samples)
    circle = _directions(circle_samples)
    raw = np.zeros(len(radii))
    worst = np.zeros((len(radii), 2))
    for ir, r in enumerate(radii):
        best = -1.0
        for ia in range(len(anc)):
            x0 = anc[ia]
            e = anc_edges[ia]
            extra = [normals[e]]
            if at_vertex[ia]:
                extra.append(normals[(e - 1) % n_edges])
            dirs = np.vstack([base_dirs, extra])
            d = pts - x0
            near = np.einsum("ij,ij->i", d, d) <= r * r
            ring = x0 + r * circle
            ring = ring[domain.contains(ring)]
            cap = np.vstack([d[near], ring - x0, np.zeros((1, 2))])
            w = float(np.min(np.max(cap @ dirs.T, axis=0))) / r
            if w > best:
                best = w
                worst[ir] = x0
        raw[ir] = best
    raw = np.where(raw <= ZERO_CLAMP, 0.0, raw)
    values = np.maximum.accumulate(raw)
    return QuasiconvexityModulus(radii, values, raw, worst)
