"""Triangular meshes of planar domains."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError
from ..geometry.domain import PlanarDomain


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming P1 mesh.

    ``boundary_edges`` lists vertex pairs on the domain polyline; every
    vertex on such an edge is a Dirichlet vertex (marker 1).
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    h: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=float)
        t = np.ascontiguousarray(self.triangles, dtype=np.int64)
        # orient every triangle counter-clockwise
        p = v[t]
        cross = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (
            p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
        flip = cross < 0
        if flip.any():
            t = t.copy()
            t[flip, 1], t[flip, 2] = t[flip, 2].copy(), t[flip, 1].copy()
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        object.__setattr__(self, "boundary_edges", np.asarray(self.boundary_edges, dtype=np.int64).reshape(-1, 2))
        if np.any(self.areas <= 0):
            raise InputError("mesh has degenerate triangles")
        mask = np.zeros(len(v), dtype=bool)
        mask[self.boundary_edges.ravel()] = True
        object.__setattr__(self, "_dirichlet", mask)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def areas(self):
        cached = self.__dict__.get("_areas")
        if cached is None:
            p = self.vertices[self.triangles]
            cached = 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                            - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0]))
            cached.setflags(write=False)
            object.__setattr__(self, "_areas", cached)
        return cached

    @property
    def dirichlet(self):
        """Boolean mask of boundary (Dirichlet) vertices."""
        return self._dirichlet

    @property
    def interior(self):
        return np.flatnonzero(~self._dirichlet)

    @property
    def centroids(self):
        return self.vertices[self.triangles].mean(axis=1)

    def gradients(self):
        """Per-triangle gradients of the three barycentric functions, (nt, 3, 2)."""
        cached = self.__dict__.get("_grads")
        if cached is None:
            cached = self._gradients()
            cached.setflags(write=False)
            object.__setattr__(self, "_grads", cached)
        return cached

    def _gradients(self):
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        inv = np.empty((len(p), 2, 2))
        inv[:, 0, 0] = e2[:, 1] / det
        inv[:, 0, 1] = -e2[:, 0] / det
        inv[:, 1, 0] = -e1[:, 1] / det
        inv[:, 1, 1] = e1[:, 0] / det
        g = np.empty((len(p), 3, 2))
        g[:, 1] = inv[:, 0, :]
        g[:, 2] = inv[:, 1, :]
        g[:, 0] = -g[:, 1] - g[:, 2]
        return g

    def edges(self):
        e = np.vstack([self.triangles[:, [0, 1]], self.triangles[:, [1, 2]], self.triangles[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def max_edge(self):
        e = self.edges()
        return float(np.max(np.hypot(*(self.vertices[e[:, 1]] - self.vertices[e[:, 0]]).T)))

    def min_angle_deg(self):
        p = self.vertices[self.triangles]
        ang = []
        for i in range(3):
            a = p[:, (i + 1) % 3] - p[:, i]
            b = p[:, (i + 2) % 3] - p[:, i]
            c = np.sum(a * b, axis=1) / (np.hypot(*a.T) * np.hypot(*b.T))
            ang.append(np.degrees(np.arccos(np.clip(c, -1, 1))))
        return float(np.min(ang))

    def to_dict(self):
        return {"vertices": self.vertices.tolist(), "triangles": self.triangles.tolist(),
                "boundary": self.boundary_edges.tolist(), "h": self.h}


def _structured_square(n):
    """Criss-cross mesh of [0,1]^2 with n x n cells: diagonals alternate with
    the parity of i + j so the mesh is symmetric under both axis reflections
    (n even) and the diagonal swap."""
    x = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(x, x, indexing="xy")
    verts = np.column_stack([X.ravel(), Y.ravel()])
    idx = lambda i, j: j * (n + 1) + i  # noqa: E731
    tris = []
    for j in range(n):
        for i in range(n):
            a, b, c, d = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
            if (i + j) % 2 == 0:
                tris += [(a, b, c), (a, c, d)]
            else:
                tris += [(a, b, d), (b, c, d)]
    bnd = []
    for i in range(n):
        bnd += [(idx(i, 0), idx(i + 1, 0)), (idx(n, i), idx(n, i + 1)),
                (idx(i + 1, n), idx(i, n)), (idx(0, i + 1), idx(0, i))]
    return verts, np.array(tris), np.array(bnd)


def mesh_domain(domain: PlanarDomain, h: float, min_angle=20.0) -> Mesh:
    """Boundary-conforming triangulation with target edge length ``h``."""
    h = float(h)
    if h <= 0:
        raise InputError("mesh size h must be positive")
    shortest = float(np.min(domain.edge_lengths()))
    if h > shortest * (1 + 1e-9):
        raise InputError(f"h = {h} exceeds the shortest polyline edge {shortest:.6g}")
    if domain.name == "unit-square":
        n = int(np.ceil(1.0 / h - 1e-9))
        v, t, b = _structured_square(n)
        return Mesh(v, t, b, 1.0 / n * np.sqrt(2.0), {"structured": True, "target_h": h})
    import triangle

    nb = domain.n_vertices
    segs = np.column_stack([np.arange(nb), (np.arange(nb) + 1) % nb])
    area = np.sqrt(3.0) / 4.0 * h * h
    out = triangle.triangulate({"vertices": domain.boundary, "segments": segs},
                               f"pq{min_angle:g}a{area:.20f}Q")
    v = out["vertices"]
    t = out["triangles"]
    b = out["segments"]
    mesh = Mesh(v, t, b, 0.0, {"structured": False, "target_h": h})
    object.__setattr__(mesh, "h", mesh.max_edge())
    return mesh
