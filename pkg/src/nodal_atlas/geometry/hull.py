"""Distance between a boundary cap B_r(x) cap Omega and its convex hull."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

from ..errors import InputError
from .domain import PlanarDomain, point_segment_distance


@dataclass(frozen=True)
class HullGap:
    gap: float
    resolution: float
    samples: np.ndarray
    hull: np.ndarray  # hull polygon vertices, counter-clockwise


def _circle_crossings(a, b, x, r):
    """Points where segments a->b cross the circle |y - x| = r."""
    d = b - a
    f = a - x
    A = np.sum(d * d, axis=1)
    B = 2 * np.sum(f * d, axis=1)
    C = np.sum(f * f, axis=1) - r * r
    disc = B * B - 4 * A * C
    out = []
    ok = disc >= 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    for sign in (-1.0, 1.0):
        t = (-B + sign * sq) / (2 * A)
        m = ok & (t >= 0) & (t <= 1)
        out.append(a[m] + t[m, None] * d[m])
    return np.vstack(out) if out else np.zeros((0, 2))


def _runs(mask):
    """Number of maximal cyclic runs of True in a boolean array."""
    if mask.all():
        return 1
    if not mask.any():
        return 0
    return int(np.sum(mask & ~np.roll(mask, 1)))


def cap_boundary_samples(domain: PlanarDomain, x, r, spacing=None):
    """Sample the boundary of B_r(x) cap Omega at arc spacing r/200.

    Raises InputError when the cap is not a single connected piece.
    """
    x = np.asarray(x, dtype=float)
    spacing = r / 200 if spacing is None else spacing
    pts, _, _ = domain.sample_boundary(spacing)
    inside_ball = np.hypot(*(pts - x).T) <= r
    n_circle = int(np.ceil(2 * np.pi * r / spacing))
    th = 2 * np.pi * np.arange(n_circle) / n_circle
    ring = x + r * np.column_stack([np.cos(th), np.sin(th)])
    ring_in = domain.contains(ring)
    if _runs(inside_ball) > 1 or _runs(ring_in) > 1:
        raise InputError("B_r(x) cap Omega is not connected at this scale")
    a, b = domain.edges()
    cross = _circle_crossings(a, b, x, r)
    samples = np.vstack([pts[inside_ball], ring[ring_in], cross])
    return samples, spacing


def convex_hull_gap(domain: PlanarDomain, x, r, spacing=None) -> HullGap:
    """Max distance from sampled points of the cap boundary to the boundary of
    its convex hull."""
    if r <= 0:
        raise InputError("r must be positive")
    if r >= domain.r0 / 2:
        raise InputError(f"need r < r0/2 = {domain.r0 / 2}")
    samples, res = cap_boundary_samples(domain, x, r, spacing)
    if len(samples) < 3:
        raise InputError("B_r(x) cap Omega is empty at this resolution")
    hull = ConvexHull(samples)
    poly = samples[hull.vertices]
    a = poly
    b = np.roll(poly, -1, axis=0)
    dist = np.zeros(len(samples))
    chunk = 2048
    for i in range(0, len(samples), chunk):
        dist[i:i + chunk] = point_segment_distance(samples[i:i + chunk], a, b).min(axis=1)
    return HullGap(float(dist.max()), float(res), samples, poly)
