"""Clip regions for nodal measurements: convex polygons (with a half-open
boundary convention) and closed disks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from ..fem.quadrature import ConvexPolygon, Disk
from ..geometry.decompose import Cuboid

PARALLEL_TOL = 1e-13


@dataclass(frozen=True, eq=False)
class PolygonRegion:
    """Convex polygon, counter-clockwise.

    Points on an edge belong to the region iff the edge's outward normal
    points in the negative x direction, or straight down.  With this rule a
    partition of a polygon into convex pieces assigns every boundary
    segment to exactly one piece, which makes clipped lengths additive.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise InputError("polygon region needs at least three 2D vertices")
        area = 0.5 * np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
        if area < 0:
            v = v[::-1].copy()
        elif area == 0:
            raise InputError("degenerate polygon region")
        object.__setattr__(self, "vertices", v)

    def edges(self):
        a = self.vertices
        b = np.roll(a, -1, axis=0)
        d = b - a
        n = np.column_stack([d[:, 1], -d[:, 0]])
        n = n / np.hypot(*n.T)[:, None]
        closed = (n[:, 0] < -PARALLEL_TOL) | ((np.abs(n[:, 0]) <= PARALLEL_TOL) & (n[:, 1] < 0))
        return a, n, closed

    @property
    def bbox(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


@dataclass(frozen=True)
class DiskRegion:
    center: tuple
    r: float

    @property
    def bbox(self):
        c = np.asarray(self.center, dtype=float)
        return c - self.r, c + self.r


def as_region(region):
    """Normalise None, Cuboid, Disk, ConvexPolygon, vertex arrays and
    (x0, x1, y0, y1) boxes to PolygonRegion / DiskRegion."""
    if region is None or isinstance(region, (PolygonRegion, DiskRegion)):
        return region
    if isinstance(region, Cuboid):
        return PolygonRegion(region.corners())
    if isinstance(region, Disk):
        return DiskRegion(tuple(region.center), float(region.r))
    if isinstance(region, ConvexPolygon):
        return PolygonRegion(region.vertices)
    arr = np.asarray(region, dtype=float)
    if arr.shape == (4,):
        x0, x1, y0, y1 = arr
        return PolygonRegion(np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]]))
    return PolygonRegion(arr)


def clip_segments(region, a, b):
    """Clip segments a->b (each (n, 2)) to the region; returns (a', b', keep)."""
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    if region is None:
        return a, b, np.ones(len(a), dtype=bool)
    if isinstance(region, DiskRegion):
        return _clip_disk(region, a, b)
    return _clip_polygon(region, a, b)


def _clip_polygon(region: PolygonRegion, a, b):
    t0 = np.zeros(len(a))
    t1 = np.ones(len(a))
    keep = np.ones(len(a), dtype=bool)
    d = b - a
    scale = np.maximum(np.hypot(*d.T), 1e-300)
    verts, normals, closed = region.edges()
    for v, n, cl in zip(verts, normals, closed):
        num = (a - v) @ n          # signed distance of a (positive = outside)
        den = d @ n
        par = np.abs(den) <= PARALLEL_TOL * scale
        on_line = np.abs(num) <= 1e-12
        # parallel segments: outside, or on an open edge -> rejected
        reject = par & ((num > 1e-12) | (on_line & (not cl)))
        keep &= ~reject
        nz = ~par
        t = np.where(nz, -num / np.where(nz, den, 1.0), 0.0)
        entering = nz & (den < 0)
        leaving = nz & (den > 0)
        t0 = np.where(entering, np.maximum(t0, t), t0)
        t1 = np.where(leaving, np.minimum(t1, t), t1)
    keep &= t1 > t0
    return a + t0[:, None] * d, a + t1[:, None] * d, keep


def _clip_disk(region: DiskRegion, a, b):
    c = np.asarray(region.center, dtype=float)
    d = b - a
    f = a - c
    A = np.sum(d * d, axis=1)
    B = 2 * np.sum(f * d, axis=1)
    C = np.sum(f * f, axis=1) - region.r**2
    disc = B * B - 4 * A * C
    ok = (disc > 0) & (A > 0)
    sq = np.sqrt(np.where(ok, disc, 0.0))
    Az = np.where(A > 0, A, 1.0)
    lo = np.clip((-B - sq) / (2 * Az), 0.0, 1.0)
    hi = np.clip((-B + sq) / (2 * Az), 0.0, 1.0)
    keep = ok & (hi > lo)
    return a + lo[:, None] * d, a + hi[:, None] * d, keep


def triangles_meeting(region, P):
    """Mask of triangles (P: (nt, 3, 2)) whose closure meets the region with
    positive area or touches it (conservative)."""
    if region is None:
        return np.ones(len(P), dtype=bool)
    lo, hi = region.bbox
    mask = np.all(P.max(axis=1) >= lo - 1e-14, axis=1) & np.all(P.min(axis=1) <= hi + 1e-14, axis=1)
    idx = np.flatnonzero(mask)
    Q = P[idx]
    if isinstance(region, DiskRegion):
        c = np.asarray(region.center, dtype=float)
        inside = _point_in_triangles(Q, c)
        dist = np.full(len(Q), np.inf)
        for i in range(3):
            p, q = Q[:, i], Q[:, (i + 1) % 3]
            e = q - p
            t = np.clip(np.sum((c - p) * e, axis=1) / np.maximum(np.sum(e * e, axis=1), 1e-300), 0, 1)
            dist = np.minimum(dist, np.hypot(*(p + t[:, None] * e - c).T))
        hit = inside | (dist <= region.r)
    else:
        hit = np.ones(len(Q), dtype=bool)
        V = region.vertices
        axes = []
        for i in range(len(V)):
            e = V[(i + 1) % len(V)] - V[i]
            axes.append(np.broadcast_to(np.array([e[1], -e[0]]), (len(Q), 2)))
        for i in range(3):
            e = Q[:, (i + 1) % 3] - Q[:, i]
            axes.append(np.column_stack([e[:, 1], -e[:, 0]]))
        for ax in axes:
            pt = np.einsum("tka,ta->tk", Q, ax)
            pv = V @ ax.T  # (nv, t)
            sep = (pt.max(axis=1) < pv.min(axis=0) - 1e-14) | (pt.min(axis=1) > pv.max(axis=0) + 1e-14)
            hit &= ~sep
    mask[idx] = hit
    return mask


def _point_in_triangles(Q, c):
    s = []
    for i in range(3):
        p, q = Q[:, i], Q[:, (i + 1) % 3]
        s.append((q[:, 0] - p[:, 0]) * (c[1] - p[:, 1]) - (q[:, 1] - p[:, 1]) * (c[0] - p[:, 0]))
    s = np.array(s)
    return np.all(s >= 0, axis=0) | np.all(s <= 0, axis=0)


def points_in_region(region, pts):
    """Closed membership test."""
    pts = np.atleast_2d(pts)
    if region is None:
        return np.ones(len(pts), dtype=bool)
    if isinstance(region, DiskRegion):
        return np.hypot(*(pts - np.asarray(region.center)).T) <= region.r
    verts, normals, _ = region.edges()
    out = np.ones(len(pts), dtype=bool)
    for v, n in zip(verts, normals):
        out &= (pts - v) @ n <= 1e-12
    return out
