"""Planar Lipschitz domains described by a boundary polyline plus local graphs."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from matplotlib.path import Path as MplPath

from ..errors import InputError
from .curves import curve_from_dict

KINDS = ("convex", "quasiconvex", "generic-lipschitz")


@dataclass(frozen=True, eq=False)
class GraphPatch:
    """Local description of the boundary near ``anchor`` as a graph.

    The patch frame has tangent ``e1 = (cos angle, sin angle)`` and inward
    normal ``e2 = (-sin angle, cos angle)``.  A world point is
    ``anchor + s*e1 + t*e2`` and the domain lies above the graph,
    ``t > phi(s)`` for ``|s| <= half_width``.
    """

    anchor: tuple
    angle: float
    half_width: float
    phi: object
    lipschitz: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "anchor", tuple(float(v) for v in self.anchor))
        if self.half_width <= 0:
            raise InputError("patch half_width must be positive")
        if abs(float(self.phi(0.0))) > 1e-12:
            raise InputError("patch graph must satisfy phi(0) = 0")

    @property
    def e1(self):
        return np.array([np.cos(self.angle), np.sin(self.angle)])

    @property
    def e2(self):
        return np.array([-np.sin(self.angle), np.cos(self.angle)])

    def to_world(self, s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        a = np.asarray(self.anchor)
        return a + s[..., None] * self.e1 + t[..., None] * self.e2

    def to_local(self, pts):
        d = np.asarray(pts, dtype=float) - np.asarray(self.anchor)
        return d @ self.e1, d @ self.e2

    def graph_points(self, n=1001, s_range=None):
        lo, hi = s_range if s_range is not None else (-self.half_width, self.half_width)
        s = np.linspace(lo, hi, n)
        return self.to_world(s, self.phi(s))

    def measured_lipschitz(self, n=4001):
        s = np.linspace(-self.half_width, self.half_width, n)
        v = self.phi(s)
        return float(np.max(np.abs(np.diff(v) / np.diff(s))))

    def to_dict(self):
        return {
            "anchor": list(self.anchor),
            "angle": float(self.angle),
            "half_width": float(self.half_width),
            "phi": self.phi.to_dict(),
            "lipschitz": float(self.lipschitz),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["anchor"]), float(d["angle"]), float(d["half_width"]),
                   curve_from_dict(d["phi"]), float(d.get("lipschitz", 0.0)))


@dataclass(frozen=True, eq=False)
class PlanarDomain:
    """Bounded planar domain.

    ``boundary`` is a closed counter-clockwise polyline stored without the
    repeated closing vertex.  ``hausdorff`` records the distance between the
    polyline and the curved boundary it approximates (0 for polygons).
    """

    boundary: np.ndarray
    patches: tuple = ()
    lipschitz_L: float = 0.0
    r0: float = 1.0
    kind: str = "generic-lipschitz"
    name: str = ""
    hausdorff: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        b = np.asarray(self.boundary, dtype=float)
        if b.ndim != 2 or b.shape[1] != 2 or len(b) < 3:
            raise InputError("boundary must be an (n>=3, 2) array")
        if np.allclose(b[0], b[-1]):
            b = b[:-1]
        object.__setattr__(self, "boundary", b)
        object.__setattr__(self, "patches", tuple(self.patches))
        if self.kind not in KINDS:
            raise InputError(f"kind must be one of {KINDS}")
        if self.lipschitz_L < 0 or self.r0 <= 0:
            raise InputError("need L >= 0 and r0 > 0")
        if self.signed_area() <= 0:
            raise InputError("boundary polyline must be counter-clockwise")
        if np.min(self.edge_lengths()) <= 0:
            raise InputError("degenerate polyline: repeated vertex")
        if not self._is_simple():
            raise InputError("boundary polyline self-intersects")
        if self.kind == "convex" and not self.is_convex_position():
            raise InputError("kind='convex' but polyline vertices are not in convex position")
        for p in self.patches:
            if p.measured_lipschitz() > max(self.lipschitz_L, p.lipschitz) * (1 + 1e-6) + 1e-9:
                raise InputError("patch graph exceeds the Lipschitz bound")

    # -- basic geometry -------------------------------------------------
    @property
    def n_vertices(self):
        return len(self.boundary)

    def edges(self):
        """Return (start, end) arrays of the polyline edges."""
        return self.boundary, np.roll(self.boundary, -1, axis=0)

    def edge_lengths(self):
        a, b = self.edges()
        return np.hypot(*(b - a).T)

    def outward_normals(self):
        a, b = self.edges()
        d = b - a
        n = np.column_stack([d[:, 1], -d[:, 0]])
        return n / np.hypot(*n.T)[:, None]

    def signed_area(self):
        x, y = self.boundary.T
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def diameter(self):
        b = self.boundary
        if len(b) > 3:
            from scipy.spatial import ConvexHull
            b = b[ConvexHull(b).vertices]
        d = b[:, None, :] - b[None, :, :]
        return float(np.sqrt(np.max(np.sum(d * d, axis=-1))))

    def is_convex_position(self, tol=1e-12):
        a = self.boundary
        d1 = np.roll(a, -1, axis=0) - a
        d0 = a - np.roll(a, 1, axis=0)
        cross = d0[:, 0] * d1[:, 1] - d0[:, 1] * d1[:, 0]
        scale = np.hypot(*d0.T) * np.hypot(*d1.T)
        return bool(np.all(cross >= -tol * scale))

    def _is_simple(self, chunk=512):
        a, b = self.edges()
        n = len(a)
        if n <= 3:
            return True
        for i0 in range(0, n, chunk):
            sl = slice(i0, min(n, i0 + chunk))
            hit = _segments_intersect_block(a[sl], b[sl], a, b)
            if np.any(hit):
                return False
        return True

    def contains(self, pts):
        """Strict-interior test (points on the polyline may go either way)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return MplPath(self.boundary).contains_points(pts)

    def distance_to_boundary(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        a, b = self.edges()
        return point_segment_distance(pts, a, b).min(axis=1)

    def sample_boundary(self, spacing):
        """Densify the polyline so consecutive samples are at most ``spacing``
        apart.  Returns (points, edge_index, parameter along edge)."""
        if spacing <= 0:
            raise InputError("spacing must be positive")
        a, b = self.edges()
        lengths = self.edge_lengths()
        counts = np.maximum(1, np.ceil(lengths / spacing).astype(int))
        edge_idx = np.repeat(np.arange(len(a)), counts)
        start = np.repeat(np.cumsum(counts) - counts, counts)
        t = (np.arange(counts.sum()) - start) / np.repeat(counts, counts)
        pts = a[edge_idx] + t[:, None] * (b - a)[edge_idx]
        return pts, edge_idx, t

    def patch_for(self, point, tol=1e-9):
        """Return the first patch whose graph passes through ``point``."""
        for p in self.patches:
            s, t = p.to_local(np.asarray(point, dtype=float))
            if abs(s) <= p.half_width and abs(t - float(p.phi(s))) <= tol:
                return p
        return None

    # -- serialisation --------------------------------------------------
    def to_dict(self):
        return {
            "polyline": self.boundary.tolist(),
            "patches": [p.to_dict() for p in self.patches],
            "L": float(self.lipschitz_L),
            "r0": float(self.r0),
            "kind": self.kind,
            "name": self.name,
            "hausdorff": float(self.hausdorff),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            np.array(d["polyline"], dtype=float),
            tuple(GraphPatch.from_dict(p) for p in d.get("patches", [])),
            float(d.get("L", 0.0)),
            float(d.get("r0", 1.0)),
            d.get("kind", "generic-lipschitz"),
            d.get("name", ""),
            float(d.get("hausdorff", 0.0)),
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


def _segments_intersect_block(p1, q1, p2, q2, tol=1e-13):
    """Proper crossings between segments (p1,q1)[i] and (p2,q2)[j].

    Segments sharing an endpoint (adjacent polyline edges) are not counted.
    """
    def orient(a, b, c):
        return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (
            b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])

    A, B = p1[:, None, :], q1[:, None, :]
    C, D = p2[None, :, :], q2[None, :, :]
    scale = tol * (np.hypot(*(q1 - p1).T)[:, None] * np.hypot(*(q2 - p2).T)[None, :])
    d1 = orient(A, B, C)
    d2 = orient(A, B, D)
    d3 = orient(C, D, A)
    d4 = orient(C, D, B)
    proper = (d1 * d2 < 0) & (d3 * d4 < 0)
    proper &= (np.abs(d1) > scale) & (np.abs(d2) > scale) & (np.abs(d3) > scale) & (np.abs(d4) > scale)
    return proper


def point_segment_distance(pts, a, b):
    """Distance matrix (n_points, n_segments) from points to segments a->b."""
    pts = np.asarray(pts, dtype=float)
    d = b - a
    dd = np.sum(d * d, axis=1)
    dd = np.where(dd > 0, dd, 1.0)
    rel = pts[:, None, :] - a[None, :, :]
    t = np.clip(np.sum(rel * d[None], axis=2) / dd[None], 0.0, 1.0)
    proj = a[None] + t[..., None] * d[None]
    return np.hypot(pts[:, None, 0] - proj[..., 0], pts[:, None, 1] - proj[..., 1])
