"""Dyadic decomposition of boundary cuboids.

A cuboid is a translated and rescaled copy of Q0 = [-1/2, 1/2) x (1+L)[-1, 1)
expressed in the frame of a boundary patch (tangent e1, inward normal e2).
Splitting the base of Q into 2^k intervals and stacking cuboids of the same
side in each column, one of them centred on the boundary graph, yields the
boundary cuboids B_k(Q) and the interior cuboids I_k(Q).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError
from .domain import GraphPatch, PlanarDomain


@dataclass(frozen=True, eq=False)
class Cuboid:
    center: np.ndarray
    side: float
    angle: float
    L: float
    kind: str = "boundary"

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.side <= 0:
            raise InputError("cuboid side must be positive")

    @property
    def half_height(self):
        return (1.0 + self.L) * self.side

    @property
    def diag(self):
        """ell(Q) = s(Q) sqrt(1 + 4 (1+L)^2) (full diagonal of the 2D cuboid)."""
        return self.side * np.sqrt(1.0 + 4.0 * (1.0 + self.L) ** 2)

    @property
    def e1(self):
        return np.array([np.cos(self.angle), np.sin(self.angle)])

    @property
    def e2(self):
        return np.array([-np.sin(self.angle), np.cos(self.angle)])

    def local(self, pts):
        d = np.atleast_2d(np.asarray(pts, dtype=float)) - self.center
        return d @ self.e1, d @ self.e2

    def contains(self, pts):
        """Half-open membership u in [-s/2, s/2), v in [-hh, hh)."""
        u, v = self.local(pts)
        hs, hh = self.side / 2, self.half_height
        return (u >= -hs) & (u < hs) & (v >= -hh) & (v < hh)

    def corners(self):
        hs, hh = self.side / 2, self.half_height
        loc = np.array([[-hs, -hh], [hs, -hh], [hs, hh], [-hs, hh]])
        return self.center + loc[:, :1] * self.e1 + loc[:, 1:] * self.e2

    def to_dict(self):
        return {"center": self.center.tolist(), "side": self.side, "angle": self.angle,
                "L": self.L, "kind": self.kind}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["center"]), float(d["side"]), float(d["angle"]), float(d["L"]),
                   d.get("kind", "boundary"))


def boundary_cuboid(domain: PlanarDomain, patch: GraphPatch, s_center, side):
    """Boundary cuboid of side ``side`` centred on the graph at parameter s_center."""
    c = patch.to_world(np.array(s_center), np.array(float(patch.phi(s_center))))
    return Cuboid(c, float(side), patch.angle, domain.lipschitz_L, "boundary")


@dataclass(frozen=True, eq=False)
class Decomposition:
    parent: Cuboid
    level: int
    boundary_cuboids: list
    interior_cuboids: list
    exterior_cuboids: list
    columns: list = field(default_factory=list)  # per column: list of cuboids, bottom to top
    patch: GraphPatch = None


def _find_patch(domain, Q, tol=1e-9):
    for p in domain.patches:
        if abs(np.angle(np.exp(1j * (p.angle - Q.angle)))) > 1e-12:
            continue
        s, t = p.to_local(Q.center)
        if abs(s) <= p.half_width and abs(t - float(p.phi(s))) <= tol:
            return p, float(s), float(t)
    return None, None, None


def decompose_cuboid(domain: PlanarDomain, Q: Cuboid, k: int, patch: GraphPatch = None) -> Decomposition:
    if k < 3:
        raise InputError("decomposition level k must be >= 3")
    if patch is None:
        patch, s_c, t_c = _find_patch(domain, Q)
        if patch is None:
            raise InputError("Q is not centred on the graph of a boundary patch with its frame")
    else:
        s_c, t_c = (float(v) for v in patch.to_local(Q.center))
    if s_c - Q.side / 2 < -patch.half_width - 1e-12 or s_c + Q.side / 2 > patch.half_width + 1e-12:
        raise InputError("Q straddles the end of its boundary patch")
    L = Q.L
    n = 2**k
    w = Q.side / n
    hh = (1.0 + L) * w
    t_lo = t_c - (1.0 + L) * Q.side
    t_hi = t_c + (1.0 + L) * Q.side
    B, I, E, cols = [], [], [], []
    for j in range(n):
        s_j = s_c - Q.side / 2 + (j + 0.5) * w
        t_b = float(patch.phi(s_j))
        column = []
        m = 1
        below = []
        while t_b - 2 * hh * m + hh > t_lo:
            below.append(t_b - 2 * hh * m)
            m += 1
        above = []
        m = 1
        while t_b + 2 * hh * m - hh < t_hi:
            above.append(t_b + 2 * hh * m)
            m += 1
        for t in reversed(below):
            q = Cuboid(patch.to_world(np.array(s_j), np.array(t)), w, patch.angle, L, "exterior")
            E.append(q)
            column.append(q)
        qb = Cuboid(patch.to_world(np.array(s_j), np.array(t_b)), w, patch.angle, L, "boundary")
        B.append(qb)
        column.append(qb)
        for t in above:
            q = Cuboid(patch.to_world(np.array(s_j), np.array(t)), w, patch.angle, L, "interior")
            I.append(q)
            column.append(q)
        cols.append(column)
    return Decomposition(Q, int(k), B, I, E, cols, patch)


@dataclass(frozen=True)
class DecompositionCheck:
    boundary_count_ok: bool
    max_column: int
    column_ok: bool
    min_interior_distance_ratio: float  # min dist(q, graph) / s(q)
    distance_ok: bool
    coverage_ok: bool

    @property
    def ok(self):
        return self.boundary_count_ok and self.column_ok and self.distance_ok and self.coverage_ok


def _rect_distance(q: Cuboid, pts):
    u, v = q.local(pts)
    du = np.maximum(np.abs(u) - q.side / 2, 0.0)
    dv = np.maximum(np.abs(v) - q.half_height, 0.0)
    return np.hypot(du, dv)


def check_decomposition(dec: Decomposition, graph_samples=4001, coverage_samples=20000, seed=0):
    """Numerically verify the decomposition invariants."""
    Q, k, patch = dec.parent, dec.level, dec.patch
    n = 2**k
    s_c, t_c = (float(v) for v in patch.to_local(Q.center))
    s = np.linspace(s_c - Q.side / 2, s_c + Q.side / 2, graph_samples)
    graph = patch.to_world(s, patch.phi(s))
    ratio = np.inf
    for q in dec.interior_cuboids:
        ratio = min(ratio, float(_rect_distance(q, graph).min()) / q.side)
    max_col = max(len(c) for c in dec.columns)
    rng = np.random.default_rng(seed)
    su = rng.uniform(s_c - Q.side / 2, s_c + Q.side / 2, coverage_samples)
    top = t_c + (1 + Q.L) * Q.side
    tv = rng.uniform(0.0, 1.0, coverage_samples)
    tt = patch.phi(su) + tv * (top - patch.phi(su))
    pts = patch.to_world(su, tt)
    pts = pts[Q.contains(pts)]
    covered = np.zeros(len(pts), dtype=bool)
    for q in dec.boundary_cuboids + dec.interior_cuboids:
        covered |= q.contains(pts)
    return DecompositionCheck(
        len(dec.boundary_cuboids) == n, max_col, max_col <= n + 1,
        ratio, ratio >= 0.5 - 1e-12, bool(covered.all()))
