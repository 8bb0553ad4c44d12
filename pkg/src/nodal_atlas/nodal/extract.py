"""Zero sets of P1 fields: extraction, length, components and audits."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..errors import InputError
from ..fem.fields import ScalarField
from .regions import as_region, clip_segments, points_in_region, triangles_meeting

SNAP = 1e-9          # |u| <= SNAP * max|u| counts as an exact zero
T_QUANTUM = 2.0**-32  # crossing parameters are rounded to this grid
MIN_LENGTH = 1e-12   # segments shorter than MIN_LENGTH * h are dropped
BOUNDARY_EPS = 1e-30  # relative size of the extrapolated Dirichlet values


@dataclass(frozen=True, eq=False)
class NodalSet:
    """Segments (n, 2, 2) of the zero set of a P1 field, one or two per
    triangle, sorted by triangle index.  ``keys`` identify each endpoint
    topologically (a mesh vertex or a mesh edge) for component counting."""

    segments: np.ndarray
    triangle_ids: np.ndarray
    keys: np.ndarray
    region: object = None
    meta: dict = field(default_factory=dict)

    @property
    def lengths(self):
        if len(self.segments) == 0:
            return np.zeros(0)
        d = self.segments[:, 1] - self.segments[:, 0]
        return np.hypot(d[:, 0], d[:, 1])

    @property
    def length(self):
        return float(np.sum(self.lengths))

    @property
    def component_count(self):
        if len(self.segments) == 0:
            return 0
        uniq, inv = np.unique(self.keys.ravel(), return_inverse=True)
        inv = inv.reshape(-1, 2)
        n = len(uniq)
        g = coo_matrix((np.ones(len(inv)), (inv[:, 0], inv[:, 1])), shape=(n, n))
        return int(connected_components(g, directed=False)[0])

    def rows(self):
        """(x1, y1, x2, y2, triangle_id) rows for CSV export."""
        return [(*s[0], *s[1], int(t)) for s, t in zip(self.segments, self.triangle_ids)]

    def __len__(self):
        return len(self.segments)


def _normalised(u: ScalarField, snap):
    v = np.asarray(u.values, dtype=float)
    scale = float(np.max(np.abs(v))) if len(v) else 0.0
    if scale == 0.0:
        raise InputError("field is identically zero; nodal set degenerate")
    q = v / scale
    q[np.abs(q) <= snap] = 0.0
    return q, scale


def _with_boundary_signs(mesh, q):
    """Replace zero Dirichlet values by BOUNDARY_EPS times the mean of the
    interior neighbours, so boundary vertices carry the sign of the field
    just inside.  Linear in q, hence consistent under q -> c q."""
    e = mesh.edges()
    d = mesh.dirichlet
    n = mesh.n_vertices
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    w = (~d[cols]).astype(float)
    total = np.bincount(rows, weights=w * q[cols], minlength=n)
    count = np.bincount(rows, weights=w, minlength=n)
    out = q.copy()
    fix = d & (q == 0) & (count > 0)
    out[fix] = BOUNDARY_EPS * total[fix] / count[fix]
    return out


def _crossing(vi, vj, xi, xj):
    """Zero of the linear interpolant on the edge i->j, measured from the
    endpoint listed first; t is rounded so the result does not depend on the
    field's scale or sign.  Edges without a sign change give NaN, which
    callers mask out."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t = vi / (vi - vj)
        t = np.round(t / T_QUANTUM) * T_QUANTUM
        return xi + t[:, None] * (xj - xi), t


def _crossing_key(t, a, b, ekey):
    """Topological key of a crossing: the vertex itself when t rounds to an
    endpoint, otherwise the edge."""
    return np.where(t == 0, a, np.where(t == 1, b, ekey))


def extract_nodal(u: ScalarField, region=None, snap=SNAP) -> NodalSet:
    """Marching-triangles zero set of the P1 interpolant of ``u``.

    Rules per triangle, with z zero vertices after snapping:

    * z = 0 and mixed signs: the chord joining the two edge crossings;
    * z = 1 and the other two of opposite sign: zero vertex to the crossing
      on the opposite edge;
    * z >= 2: each zero edge, emitted once by the lowest-index triangle
      that contains it;
    * otherwise nothing.

    Values with |u| <= snap max|u| count as zeros.  Zero Dirichlet values
    are first replaced by a tiny multiple of the mean of their interior
    neighbours, so the boundary inherits the sign of the field next to it.
    Segments along the boundary itself and segments shorter than 1e-12 h
    are dropped.  Every rule is invariant under u -> c u, so Z(c u) = Z(u)
    for every c != 0.
    """
    mesh = u.mesh
    q, _ = _normalised(u, snap)
    q = _with_boundary_signs(mesh, q)
    reg = as_region(region)
    T = mesh.triangles
    X = mesh.vertices
    tri_mask = triangles_meeting(reg, X[T])
    tids = np.flatnonzero(tri_mask)
    Tm = T[tids]
    V = q[Tm]
    sgn = np.sign(V).astype(int)
    zeros = (sgn == 0).sum(axis=1)
    pos = (sgn > 0).sum(axis=1)
    neg = (sgn < 0).sum(axis=1)
    nv = mesh.n_vertices

    seg_a, seg_b, seg_t, key_a, key_b = [], [], [], [], []

    def edge_key(i, j):
        lo, hi = np.minimum(i, j), np.maximum(i, j)
        return nv + lo * nv + hi

    # -- z = 0, mixed signs: exactly two sign-changing edges
    sel = (zeros == 0) & (pos > 0) & (neg > 0)
    if sel.any():
        Ts, Vs = Tm[sel], V[sel]
        pts, keys = [], []
        for (k0, k1) in ((0, 1), (1, 2), (2, 0)):
            i, j = Ts[:, k0], Ts[:, k1]
            a = np.minimum(i, j)
            b = np.maximum(i, j)
            va = q[a]
            vb = q[b]
            cross = np.sign(va) != np.sign(vb)
            p, t = _crossing(va, vb, X[a], X[b])
            pts.append(np.where(cross[:, None], p, np.nan))
            keys.append(np.where(cross, _crossing_key(t, a, b, edge_key(a, b)), -1))
        pts = np.stack(pts, axis=1)    # (m, 3, 2)
        keys = np.stack(keys, axis=1)  # (m, 3)
        ok = keys >= 0
        order = np.argsort(~ok, axis=1, kind="stable")[:, :2]
        r = np.arange(len(Ts))[:, None]
        seg_a.append(pts[r[:, 0], order[:, 0]])
        seg_b.append(pts[r[:, 0], order[:, 1]])
        key_a.append(keys[r[:, 0], order[:, 0]])
        key_b.append(keys[r[:, 0], order[:, 1]])
        seg_t.append(tids[sel])

    # -- z = 1, the two others of opposite sign
    sel = (zeros == 1) & (pos == 1) & (neg == 1)
    if sel.any():
        Ts, Vs = Tm[sel], V[sel]
        kz = np.argmax(Vs == 0, axis=1)
        r = np.arange(len(Ts))
        z = Ts[r, kz]
        i = Ts[r, (kz + 1) % 3]
        j = Ts[r, (kz + 2) % 3]
        a, b = np.minimum(i, j), np.maximum(i, j)
        p, t = _crossing(q[a], q[b], X[a], X[b])
        seg_a.append(X[z])
        seg_b.append(p)
        key_a.append(z)
        key_b.append(_crossing_key(t, a, b, edge_key(a, b)))
        seg_t.append(tids[sel])

    # -- z >= 2: zero edges, owned by the lowest-index triangle containing them
    sel = zeros >= 2
    if sel.any():
        zmask = q[T] == 0
        owner = {}
        cand = []
        for k0, k1 in ((0, 1), (1, 2), (2, 0)):
            ids = np.flatnonzero(zmask[:, k0] & zmask[:, k1])
            ea = np.minimum(T[ids, k0], T[ids, k1])
            eb = np.maximum(T[ids, k0], T[ids, k1])
            for t_, x_, y_ in zip(ids.tolist(), ea.tolist(), eb.tolist()):
                if owner.get((x_, y_), t_ + 1) > t_:
                    owner[(x_, y_)] = t_
                cand.append((t_, x_, y_))
        in_region = set(tids[sel].tolist())
        mine = sorted(c for c in cand if c[0] in in_region and owner[(c[1], c[2])] == c[0])
        if mine:
            mine = np.array(mine, dtype=np.int64)
            seg_a.append(X[mine[:, 1]])
            seg_b.append(X[mine[:, 2]])
            key_a.append(mine[:, 1])
            key_b.append(mine[:, 2])
            seg_t.append(mine[:, 0])

    if seg_a:
        A_ = np.vstack(seg_a)
        B_ = np.vstack(seg_b)
        KA = np.concatenate(key_a)
        KB = np.concatenate(key_b)
        TT = np.concatenate(seg_t)
    else:
        A_ = B_ = np.zeros((0, 2))
        KA = KB = TT = np.zeros(0, dtype=np.int64)

    # drop segments lying on the boundary itself: both endpoints are
    # Dirichlet vertices or crossings on boundary edges
    dir_ = mesh.dirichlet
    be = np.sort(mesh.boundary_edges, axis=1)
    bkeys = nv + be[:, 0] * nv + be[:, 1]

    def on_boundary(k):
        return np.where(k < nv, dir_[np.clip(k, 0, nv - 1)], np.isin(k, bkeys))

    keep = ~(on_boundary(KA) & on_boundary(KB))
    A_, B_, KA, KB, TT = A_[keep], B_[keep], KA[keep], KB[keep], TT[keep]

    if reg is not None:
        A_, B_, ok = clip_segments(reg, A_, B_)
        # a clipped endpoint is no longer topologically shared
        A_, B_, KA, KB, TT = A_[ok], B_[ok], KA[ok], KB[ok], TT[ok]
    L = np.hypot(*(B_ - A_).T) if len(A_) else np.zeros(0)
    keep = L > MIN_LENGTH * mesh.h
    A_, B_, KA, KB, TT = A_[keep], B_[keep], KA[keep], KB[keep], TT[keep]

    # canonical endpoint order and segment order
    swap = (A_[:, 0] > B_[:, 0]) | ((A_[:, 0] == B_[:, 0]) & (A_[:, 1] > B_[:, 1]))
    A2 = np.where(swap[:, None], B_, A_)
    B2 = np.where(swap[:, None], A_, B_)
    K2 = np.column_stack([np.where(swap, KB, KA), np.where(swap, KA, KB)])
    order = np.lexsort((B2[:, 1], B2[:, 0], A2[:, 1], A2[:, 0], TT))
    segs = np.stack([A2[order], B2[order]], axis=1) if len(order) else np.zeros((0, 2, 2))
    return NodalSet(segs, TT[order], K2[order], reg, {"snap": snap})


def nodal_length(Z: NodalSet, region=None) -> float:
    """Total length of Z inside ``region`` (half-open polygons / closed disks)."""
    reg = as_region(region)
    if len(Z.segments) == 0:
        return 0.0
    if reg is None:
        return Z.length
    a, b, ok = clip_segments(reg, Z.segments[:, 0], Z.segments[:, 1])
    d = (b - a)[ok]
    return float(np.sum(np.hypot(d[:, 0], d[:, 1])))


def nodal_domain_count(u: ScalarField, snap=SNAP) -> int:
    """Number of connected components of {u > 0} and {u < 0} for the P1
    interpolant: vertices of equal strict sign joined by mesh edges."""
    q, _ = _normalised(u, snap)
    e = u.mesh.edges()
    s = np.sign(q)
    same = (s[e[:, 0]] == s[e[:, 1]]) & (s[e[:, 0]] != 0)
    n = len(q)
    g = coo_matrix((np.ones(int(same.sum())), (e[same, 0], e[same, 1])), shape=(n, n))
    _, lab = connected_components(g, directed=False)
    return int(len(np.unique(lab[s != 0])))


@dataclass(frozen=True)
class ZeroFreeReport:
    is_zero_free: bool
    min_abs: float
    nearest_zero_distance_to_boundary: float
    vertices: int


def _segments_distance(P0, P1, Q0, Q1):
    """Min distance between two sets of segments (dense; chunked)."""
    best = np.inf
    for s in range(0, len(P0), 256):
        p0, p1 = P0[s:s + 256, None, :], P1[s:s + 256, None, :]
        q0, q1 = Q0[None], Q1[None]
        d = np.minimum.reduce([_pt_seg(p0, q0, q1), _pt_seg(p1, q0, q1),
                               _pt_seg(q0, p0, p1), _pt_seg(q1, p0, p1)])
        inter = _intersects(p0, p1, q0, q1)
        d = np.where(inter, 0.0, d)
        best = min(best, float(d.min()))
    return best


def _pt_seg(p, a, b):
    ab = b - a
    t = np.clip(np.sum((p - a) * ab, axis=-1) / np.maximum(np.sum(ab * ab, axis=-1), 1e-300), 0, 1)
    return np.linalg.norm(p - (a + t[..., None] * ab), axis=-1)


def _intersects(p0, p1, q0, q1):
    def orient(a, b, c):
        return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])
    d1, d2 = orient(q0, q1, p0), orient(q0, q1, p1)
    d3, d4 = orient(p0, p1, q0), orient(p0, p1, q1)
    return (d1 * d2 < 0) & (d3 * d4 < 0)


def zero_free_audit(u: ScalarField, region, tol=None, snap=SNAP) -> ZeroFreeReport:
    """Zero-free test on region cap Omega.

    All non-Dirichlet vertices of triangles meeting the region must share a
    strict sign with |u| > tol (default: the snapping threshold times
    max|u|).  Otherwise the distance from Z(u) cap region to the mesh
    boundary is reported (inf when the region holds no zero segment).
    """
    mesh = u.mesh
    reg = as_region(region)
    q, scale = _normalised(u, snap)
    tol = snap * scale if tol is None else float(tol)
    mask = triangles_meeting(reg, mesh.vertices[mesh.triangles])
    vid = np.unique(mesh.triangles[mask].ravel())
    vid = vid[~mesh.dirichlet[vid]]
    if len(vid) == 0:
        return ZeroFreeReport(True, float("inf"), float("inf"), 0)
    vals = np.asarray(u.values)[vid]
    min_abs = float(np.min(np.abs(vals)))
    free = bool((np.all(vals > 0) or np.all(vals < 0)) and min_abs > tol)
    if free:
        return ZeroFreeReport(True, min_abs, float("inf"), len(vid))
    Z = extract_nodal(u, reg, snap)
    if len(Z) == 0:
        rho = float("inf")
    else:
        be = mesh.boundary_edges
        X = mesh.vertices
        rho = _segments_distance(Z.segments[:, 0], Z.segments[:, 1], X[be[:, 0]], X[be[:, 1]])
    return ZeroFreeReport(False, min_abs, rho, len(vid))


def zero_points_inside(Z: NodalSet, region) -> bool:
    reg = as_region(region)
    if len(Z) == 0:
        return False
    mid = 0.5 * (Z.segments[:, 0] + Z.segments[:, 1])
    return bool(points_in_region(reg, mid).any())


@dataclass(frozen=True)
class ScalingFit:
    points: list
    C: float
    alpha: float
    residual: float
    dropped: int = 0

    def to_dict(self):
        return {"points": [list(map(float, p)) for p in self.points], "C": self.C,
                "alpha": self.alpha, "residual": self.residual}


def scaling_fit(points) -> ScalingFit:
    """Least-squares fit of log(length) = log(C) + alpha log(lambda)."""
    pts = [(float(l), float(s)) for l, s in points]
    if len(pts) < 2:
        raise InputError("scaling fit needs at least two points")
    arr = np.array(pts)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise InputError("scaling fit needs positive finite (lambda, length) pairs")
    if len(np.unique(arr[:, 0])) < 2:
        raise InputError("scaling fit needs at least two distinct lambda values")
    x = np.log(arr[:, 0])
    y = np.log(arr[:, 1])
    M = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(M, y, rcond=None)
    res = float(np.sqrt(np.mean((M @ coef - y) ** 2)))
    return ScalingFit(pts, float(np.exp(coef[0])), float(coef[1]), res)
