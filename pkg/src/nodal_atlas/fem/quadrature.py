"""Integration of mesh fields over disks, ellipses, circles and convex polygons.

Ellipses E = x0 + S(B_r) are handled by mapping mesh vertices to
z = S^{-1}(x - x0), which turns E into the disk B_r and keeps P1 fields
piecewise linear.  Each triangle meeting the disk is intersected with it
exactly: the piece T cap B_r is bounded by straight segments and true circular
arcs.  The integral over the piece uses the cone (divergence) rule

    int_P f = sum over boundary pieces of int ((y - c) x dy) int_0^1 f(c + t(y - c)) t dt,

with c the triangle centroid, Gauss-Legendre nodes in t and along segments,
and Gauss panels of angular width <= theta_tol along arcs.  For P1 fields and
constant weights the rule is exact on segments; arcs converge spectrally.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientField
from .fields import AnalyticField, ScalarField
from .mesh import Mesh

THETA_TOL = 2 * np.pi / 512


@dataclass(frozen=True)
class QuadOrder:
    seg: int = 2
    t: int = 2
    arc: int = 4
    panel: float = THETA_TOL

    def raised(self, k=2):
        return QuadOrder(self.seg + k, self.t + k, self.arc + k, self.panel / 2)


LOW = QuadOrder()
HIGH = QuadOrder(8, 8, 6)


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    empty: bool = False


def _gauss01(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


# ----------------------------------------------------------------------------
# geometry of triangle cap disk
# ----------------------------------------------------------------------------
@dataclass
class DiskPieces:
    inside: np.ndarray        # triangle ids fully inside the disk
    seg_tri: np.ndarray       # segment pieces of cut triangles
    seg_a: np.ndarray
    seg_b: np.ndarray
    arc_tri: np.ndarray       # arc pieces (angles, counter-clockwise)
    arc_t0: np.ndarray
    arc_t1: np.ndarray

    @property
    def empty(self):
        return len(self.inside) == 0 and len(self.seg_tri) == 0 and len(self.arc_tri) == 0


ROOT_TOL = 1e-10


def _inside_triangle(P, q, tol=1e-13):
    """P: (m,3,2) CCW triangles, q: (m,k,2) points -> (m,k) bool."""
    ok = np.ones(q.shape[:2], dtype=bool)
    for i in range(3):
        a = P[:, i][:, None, :]
        b = P[:, (i + 1) % 3][:, None, :]
        e = b - a
        scale = np.hypot(e[..., 0], e[..., 1])
        cr = e[..., 0] * (q[..., 1] - a[..., 1]) - e[..., 1] * (q[..., 0] - a[..., 0])
        ok &= cr >= -tol * scale
    return ok


def disk_pieces(Z, tris, r, candidates=None):
    """Decompose B_r(0) cap (union of triangles) into per-triangle pieces.

    ``Z`` are vertex coordinates centred on the disk, ``tris`` the (nt, 3)
    CCW connectivity.  ``candidates`` optionally restricts the triangles.
    """
    ids = np.arange(len(tris)) if candidates is None else np.asarray(candidates)
    P = Z[tris[ids]]
    d2 = np.sum(P * P, axis=2)
    r2 = r * r
    all_in = np.all(d2 <= r2, axis=1)
    # distance from origin to each triangle
    E = np.roll(P, -1, axis=1) - P
    EE = np.sum(E * E, axis=2)
    s = np.clip(-np.sum(P * E, axis=2) / np.where(EE > 0, EE, 1.0), 0.0, 1.0)
    close = P + s[..., None] * E
    dist = np.sqrt(np.min(np.sum(close * close, axis=2), axis=1))
    cr = E[..., 0] * (-P[..., 1]) - E[..., 1] * (-P[..., 0])
    origin_in = np.all(cr >= 0, axis=1)
    dist = np.where(origin_in, 0.0, dist)
    cut = ~all_in & (dist < r)
    inside = ids[all_in]
    cid = ids[cut]
    Pc = P[cut]
    Ec = E[cut]
    m = len(cid)
    if m == 0:
        z = np.zeros(0)
        return DiskPieces(inside, z.astype(int), np.zeros((0, 2)), np.zeros((0, 2)),
                          z.astype(int), z, z)
    # edge / circle intersections: |p + s e|^2 = r^2
    A = np.sum(Ec * Ec, axis=2)
    B = 2 * np.sum(Pc * Ec, axis=2)
    C = np.sum(Pc * Pc, axis=2) - r2
    disc = B * B - 4 * A * C
    sq = np.sqrt(np.maximum(disc, 0.0))
    s1 = (-B - sq) / (2 * A)
    s2 = (-B + sq) / (2 * A)
    lo = np.maximum(s1, 0.0)
    hi = np.minimum(s2, 1.0)
    has_seg = (disc > 0) & (hi > lo)
    ti, ei = np.nonzero(has_seg)
    seg_a = Pc[ti, ei] + lo[ti, ei, None] * Ec[ti, ei]
    seg_b = Pc[ti, ei] + hi[ti, ei, None] * Ec[ti, ei]
    seg_tri = cid[ti]
    # crossing angles
    roots = np.concatenate([s1, s2], axis=1)  # (m, 6)
    # a vertex lying on the circle up to rounding must yield a crossing on
    # both of its edges, so roots are accepted with a small tolerance
    valid = np.concatenate([disc > 0, disc > 0], axis=1) & (roots >= -ROOT_TOL) & (roots <= 1 + ROOT_TOL)
    roots = np.clip(roots, 0.0, 1.0)
    Pr = np.concatenate([Pc, Pc], axis=1)
    Er = np.concatenate([Ec, Ec], axis=1)
    pts = Pr + roots[..., None] * Er
    ang = np.where(valid, np.arctan2(pts[..., 1], pts[..., 0]), np.nan)
    ang = np.sort(ang, axis=1)
    nval = np.sum(valid, axis=1)
    k = ang.shape[1]
    start = ang
    nxt = np.roll(ang, -1, axis=1)
    j = np.arange(k)[None, :]
    last = j == (nval[:, None] - 1)
    end = np.where(last, ang[:, :1] + 2 * np.pi, nxt)
    ok = (j < nval[:, None]) & (end > start + 1e-15)
    mid = 0.5 * (start + end)
    midpts = r * np.stack([np.cos(mid), np.sin(mid)], axis=-1)
    ok &= _inside_triangle(Pc, np.where(ok[..., None], midpts, 0.0))
    ai, aj = np.nonzero(ok)
    arc_tri = [cid[ai]]
    arc_t0 = [start[ai, aj]]
    arc_t1 = [end[ai, aj]]
    # circle entirely inside a triangle (no crossings)
    none = nval == 0
    if none.any():
        probe = np.zeros((m, 1, 2))
        probe[:, 0, 0] = r
        full = none & _inside_triangle(Pc, probe)[:, 0]
        arc_tri.append(cid[full])
        arc_t0.append(np.zeros(full.sum()))
        arc_t1.append(np.full(full.sum(), 2 * np.pi))
    return DiskPieces(inside, seg_tri, seg_a, seg_b, np.concatenate(arc_tri),
                      np.concatenate(arc_t0), np.concatenate(arc_t1))


def _arc_panels(tri, t0, t1, panel):
    n = np.maximum(1, np.ceil((t1 - t0) / panel).astype(int))
    idx = np.repeat(np.arange(len(tri)), n)
    k = np.arange(n.sum()) - np.repeat(np.cumsum(n) - n, n)
    w = (t1 - t0)[idx] / n[idx]
    a = t0[idx] + k * w
    return tri[idx], a, a + w


# ----------------------------------------------------------------------------
# integrands
# ----------------------------------------------------------------------------
_P1_CACHE = weakref.WeakKeyDictionary()


def _p1_data(field: ScalarField, A: CoefficientField):
    """Per-triangle data of a P1 field that does not depend on the centre."""
    per_field = _P1_CACHE.setdefault(field, {})
    key = id(A)
    if key in per_field and per_field[key][0] is A:
        return per_field[key][1]
    mesh = field.mesh
    t = mesh.triangles
    u = field.values[t]
    gx = field.triangle_gradients()
    Ac = A(mesh.centroids)
    data = {
        "u0": u[:, 0].copy(),
        "gx": gx,
        "int_u2": mesh.areas * (np.sum(u * u, axis=1) + np.sum(u, axis=1) ** 2) / 12.0,
        "int_u": mesh.areas * np.sum(u, axis=1) / 3.0,
        "energy": np.einsum("ta,tab,tb->t", gx, Ac, gx),
    }
    per_field[key] = (A, data)
    return data


class BallContext:
    """Field, coefficients and a centre x0 with shape S, ready for repeated
    disk / circle integrals over a ladder of radii."""

    def __init__(self, mesh: Mesh, field, A: CoefficientField, x0, S=None):
        self.mesh = mesh
        self.field = field
        self.A = A
        self.x0 = np.asarray(x0, dtype=float)
        self.S = np.eye(2) if S is None else np.asarray(S, dtype=float)
        self.Sinv = np.linalg.inv(self.S)
        self.detS = float(np.linalg.det(self.S))
        self.Z = (mesh.vertices - self.x0) @ self.Sinv.T
        self.tris = mesh.triangles
        self.zc = self.Z[self.tris].mean(axis=1)
        self.constant_metric = A.is_constant
        self.is_p1 = isinstance(field, ScalarField)
        if self.is_p1:
            data = _p1_data(field, A)
            self.u0 = data["u0"]
            self.z0 = self.Z[self.tris[:, 0]]
            self.gx = data["gx"]
            self.gz = self.gx @ self.S.T
            self.int_u2 = data["int_u2"]
            self.int_u = data["int_u"]
            self.energy_density_c = data["energy"]

    # -- pointwise pieces -------------------------------------------------
    def to_x(self, z):
        return self.x0 + z @ self.S.T

    def u(self, tri, z):
        if self.is_p1:
            return self.u0[tri] + np.sum(self.gz[tri] * (z - self.z0[tri]), axis=-1)
        return self.field.value(self.to_x(z))

    def mu(self, z):
        """mu(z) = z.At(z) z / |z|^2 with At = S^{-1} A(x0 + S z) S^{-1}."""
        if self.constant_metric:
            # At is constant; equal to I when S^2 = A(x0)
            At = self.Sinv @ self.A(self.x0[None])[0] @ self.Sinv
            if np.allclose(At, np.eye(2), atol=1e-12):
                return np.ones(len(z))
            At = np.broadcast_to(At, (len(z), 2, 2))
        else:
            At = self.Sinv[None] @ self.A(self.to_x(z), check=False) @ self.Sinv[None]
        zz = np.sum(z * z, axis=1)
        num = np.einsum("na,nab,nb->n", z, At, z)
        return np.where(zz > 0, num / np.where(zz > 0, zz, 1.0), 1.0)

    def energy(self, tri, z):
        """A grad u . grad u at z (x-coordinates quantity)."""
        if self.is_p1:
            if self.constant_metric:
                return self.energy_density_c[tri]
            g = self.gx[tri]
            return np.einsum("na,nab,nb->n", g, self.A(self.to_x(z), check=False), g)
        x = self.to_x(z)
        g = self.field.grad(x)
        return np.einsum("na,nab,nb->n", g, self.A(x, check=False), g)

    def integrand(self, kind):
        if callable(kind):
            return kind
        if kind == "one":
            return lambda tri, z: np.ones(len(z))
        if kind == "u":
            return self.u
        if kind == "u2":
            return lambda tri, z: self.u(tri, z) ** 2
        if kind == "mu_u2":
            return lambda tri, z: self.mu(z) * self.u(tri, z) ** 2
        if kind == "grad":
            return self.energy
        raise ValueError(f"unknown integrand {kind!r}")

    def _needs_pointwise(self, kind):
        if callable(kind) or not self.is_p1:
            return True
        if kind == "mu_u2":
            return not (self.constant_metric and np.allclose(self.mu(np.array([[1.0, 0.0], [0.3, 0.7]])), 1.0))
        if kind == "grad":
            return not self.constant_metric
        return False

    def _fast_inside(self, kind, tri):
        """Exact per-triangle integrals (in z measure) for fully inside triangles."""
        a = self.mesh.areas[tri] / self.detS
        if kind == "one":
            return float(np.sum(a))
        if kind == "u":
            return float(np.sum(self.int_u[tri]) / self.detS)
        if kind in ("u2", "mu_u2"):
            return float(np.sum(self.int_u2[tri]) / self.detS)
        if kind == "grad":
            return float(np.sum(a * self.energy_density_c[tri]))
        raise ValueError(kind)

    # -- integrals ----------------------------------------------------------
    def _cone_segments(self, f, tri, a, b, order, apex=None):
        if len(tri) == 0:
            return 0.0
        sg, sw = _gauss01(order.seg)
        tg, tw = _gauss01(order.t)
        c = self.zc[tri] if apex is None else apex
        W = (a[:, 0] - c[:, 0]) * (b[:, 1] - a[:, 1]) - (a[:, 1] - c[:, 1]) * (b[:, 0] - a[:, 0])
        y = a[:, None, :] + sg[None, :, None] * (b - a)[:, None, :]          # (m, ns, 2)
        q = c[:, None, None, :] + tg[None, None, :, None] * (y - c[:, None, :])[:, :, None, :]
        wq = W[:, None, None] * sw[None, :, None] * (tw * tg)[None, None, :]
        tq = np.broadcast_to(tri[:, None, None], q.shape[:3])
        vals = f(tq.ravel(), q.reshape(-1, 2))
        return float(np.sum(wq.ravel() * vals))

    def _cone_arcs(self, f, tri, t0, t1, r, order, apex=None):
        if len(tri) == 0:
            return 0.0
        n = np.maximum(1, np.ceil((t1 - t0) / order.panel).astype(int))
        tri, t0, t1 = _arc_panels(tri, t0, t1, order.panel)
        g, gw = _gauss01(order.arc)
        tg, tw = _gauss01(order.t)
        th = t0[:, None] + g[None, :] * (t1 - t0)[:, None]                  # (m, na)
        y = r * np.stack([np.cos(th), np.sin(th)], axis=-1)
        c = self.zc[tri] if apex is None else np.repeat(apex, n, axis=0)
        W = (r * r - r * (c[:, None, 0] * np.cos(th) + c[:, None, 1] * np.sin(th))) * (
            (t1 - t0)[:, None] * gw[None, :])
        q = c[:, None, None, :] + tg[None, None, :, None] * (y - c[:, None, :])[:, :, None, :]
        wq = W[:, :, None] * (tw * tg)[None, None, :]
        tq = np.broadcast_to(tri[:, None, None], q.shape[:3])
        vals = f(tq.ravel(), q.reshape(-1, 2))
        return float(np.sum(wq.ravel() * vals))

    def _inside_as_segments(self, tri):
        P = self.Z[self.tris[tri]]
        a = P.reshape(-1, 2)
        b = np.roll(P, -1, axis=1).reshape(-1, 2)
        return np.repeat(tri, 3), a, b

    def _piece_apex(self, pieces, r):
        """Per cut piece, the mean of its boundary points: a point inside the
        convex set triangle cap disk, so the cone rule has no cancelling
        contributions from outside the piece."""
        mids = 0.5 * (pieces.arc_t0 + pieces.arc_t1)
        tri = np.concatenate([pieces.seg_tri, pieces.seg_tri, pieces.arc_tri])
        pts = np.vstack([pieces.seg_a, pieces.seg_b, r * np.column_stack([np.cos(mids), np.sin(mids)])])
        uniq, inv = np.unique(tri, return_inverse=True)
        acc = np.zeros((len(uniq), 2))
        np.add.at(acc, inv, pts)
        cnt = np.bincount(inv, minlength=len(uniq))
        apex = acc / cnt[:, None]
        # a whole circle inside one triangle: the disk centre is the natural apex
        seg_tris = np.unique(pieces.seg_tri)
        full = np.isin(uniq, pieces.arc_tri[(pieces.arc_t1 - pieces.arc_t0) >= 2 * np.pi - 1e-12])
        apex[full & ~np.isin(uniq, seg_tris)] = 0.0
        return (apex[np.searchsorted(uniq, pieces.seg_tri)], apex[np.searchsorted(uniq, pieces.arc_tri)])

    def _cut(self, f, pieces, r, order, apex):
        return self._cone_segments(f, pieces.seg_tri, pieces.seg_a, pieces.seg_b, order, apex[0]) + \
            self._cone_arcs(f, pieces.arc_tri, pieces.arc_t0, pieces.arc_t1, r, order, apex[1])

    def candidates(self, r):
        """Triangles that may meet B_r (bounding-box prefilter)."""
        P = self.Z[self.tris]
        lo = P.min(axis=1)
        hi = P.max(axis=1)
        return np.flatnonzero(np.all(lo <= r, axis=1) & np.all(hi >= -r, axis=1))

    def disk(self, r, kind="mu_u2", order=None, error=True) -> QuadResult:
        """Integral over B_r(0) in z-coordinates of the chosen integrand."""
        pw = self._needs_pointwise(kind)
        order = (HIGH if pw else LOW) if order is None else order
        pieces = disk_pieces(self.Z, self.tris, r, self.candidates(r))
        if pieces.empty:
            return QuadResult(0.0, 0.0, True)
        f = self.integrand(kind)
        if pw:
            st, sa, sb = self._inside_as_segments(pieces.inside)
            inside = self._cone_segments(f, st, sa, sb, order)
        else:
            inside = self._fast_inside(kind, pieces.inside)
        apex = self._piece_apex(pieces, r)
        cut = self._cut(f, pieces, r, order, apex)
        err = 0.0
        if error:
            if pw:
                lo = QuadOrder(max(1, order.seg - 2), max(1, order.t - 2), max(1, order.arc - 2), order.panel * 2)
            else:  # segment and cone rules are exact for P1 data; only arcs are approximate
                lo = QuadOrder(order.seg, order.t, max(1, order.arc - 2), order.panel * 2)
            cut_lo = self._cut(f, pieces, r, lo, apex)
            err = abs(cut - cut_lo)
            if pw:
                ilo = self._cone_segments(f, *self._inside_as_segments(pieces.inside), lo)
                err += abs(inside - ilo)
        return QuadResult(inside + cut, err, False)

    def circle(self, r, kind="mu_u2", order=None, error=True) -> QuadResult:
        """Line integral over the circle |z| = r restricted to the mesh."""
        order = HIGH if order is None else order
        pieces = disk_pieces(self.Z, self.tris, r, self.candidates(r))
        if len(pieces.arc_tri) == 0:
            return QuadResult(0.0, 0.0, True)
        f = self.integrand(kind)

        def run(o):
            tri, t0, t1 = _arc_panels(pieces.arc_tri, pieces.arc_t0, pieces.arc_t1, o.panel)
            g, gw = _gauss01(o.arc)
            th = t0[:, None] + g[None, :] * (t1 - t0)[:, None]
            y = r * np.stack([np.cos(th), np.sin(th)], axis=-1)
            w = r * (t1 - t0)[:, None] * gw[None, :]
            tq = np.broadcast_to(tri[:, None], th.shape)
            return float(np.sum(w.ravel() * f(tq.ravel(), y.reshape(-1, 2))))

        val = run(order)
        err = abs(val - run(QuadOrder(order.seg, order.t, max(1, order.arc - 2), order.panel * 2))) if error else 0.0
        return QuadResult(val, err, False)


# ----------------------------------------------------------------------------
# public operations
# ----------------------------------------------------------------------------
@dataclass(frozen=True)
class Disk:
    center: tuple
    r: float


@dataclass(frozen=True)
class Ellipse:
    center: tuple
    S: np.ndarray
    r: float


@dataclass(frozen=True)
class ConvexPolygon:
    vertices: np.ndarray  # counter-clockwise


def _clip_polygon(poly, a, b):
    """Sutherland-Hodgman: keep the left side of the directed line a->b."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        sp = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
        sq = (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0])
        if sp >= 0:
            out.append(p)
        if (sp >= 0) != (sq >= 0):
            t = sp / (sp - sq)
            out.append(p + t * (q - p))
    return out


def integrate_polygon(mesh: Mesh, field, A: CoefficientField, polygon, kind="u2", order=None) -> QuadResult:
    """Integral over a convex polygon cap the mesh (exact polygon clipping)."""
    poly = np.asarray(polygon, dtype=float)
    ctx = BallContext(mesh, field, A, np.zeros(2))
    pw = ctx._needs_pointwise(kind)
    order = (HIGH if pw else LOW) if order is None else order
    P = mesh.vertices[mesh.triangles]
    inside = np.ones(len(P), dtype=bool)
    touch = np.ones(len(P), dtype=bool)
    nP = len(poly)
    for i in range(nP):
        a, b = poly[i], poly[(i + 1) % nP]
        s = (b[0] - a[0]) * (P[..., 1] - a[1]) - (b[1] - a[1]) * (P[..., 0] - a[0])
        inside &= np.all(s >= 0, axis=1)
        touch &= np.any(s > 0, axis=1)
    lo, hi = poly.min(axis=0), poly.max(axis=0)
    touch &= np.all(P.max(axis=1) >= lo, axis=1) & np.all(P.min(axis=1) <= hi, axis=1)
    cut = np.flatnonzero(touch & ~inside)
    ins = np.flatnonzero(inside)
    f = ctx.integrand(kind)
    if pw:
        total = ctx._cone_segments(f, *ctx._inside_as_segments(ins), order)
    else:
        total = ctx._fast_inside(kind, ins)
    st, sa, sb = [], [], []
    for t in cut:
        piece = [p for p in P[t]]
        for i in range(nP):
            piece = _clip_polygon(piece, poly[i], poly[(i + 1) % nP])
            if len(piece) < 3:
                break
        if len(piece) < 3:
            continue
        piece = np.asarray(piece)
        st.append(np.full(len(piece), t))
        sa.append(piece)
        sb.append(np.roll(piece, -1, axis=0))
    if st:
        total += ctx._cone_segments(f, np.concatenate(st), np.vstack(sa), np.vstack(sb), order)
    empty = len(ins) == 0 and not st
    return QuadResult(total, 0.0, empty)


def integrate_region(mesh: Mesh, field, A: CoefficientField, region, kind="u2", order=None) -> QuadResult:
    """Integral of ``kind`` in {'one', 'u', 'u2', 'mu_u2', 'grad'} over
    region cap Omega.  Disk/ellipse integrals are reported in the measure of
    the x-coordinates (so 'one' over a disk is its area)."""
    if isinstance(region, ConvexPolygon):
        return integrate_polygon(mesh, field, A, region.vertices, kind, order)
    if isinstance(region, Disk):
        ctx = BallContext(mesh, field, A, region.center)
        return ctx.disk(region.r, kind, order)
    if isinstance(region, Ellipse):
        ctx = BallContext(mesh, field, A, region.center, region.S)
        res = ctx.disk(region.r, kind, order)
        return QuadResult(res.value * ctx.detS, res.error * ctx.detS, res.empty)
    raise TypeError(f"unsupported region {type(region).__name__}")


def integrate_circle(mesh: Mesh, field, A: CoefficientField, center, r, kind="u2", order=None) -> QuadResult:
    """Line integral over the circle |x - center| = r inside the mesh."""
    ctx = BallContext(mesh, field, A, center)
    return ctx.circle(r, kind, order)


def p1_or_analytic(field):
    return isinstance(field, (ScalarField, AnalyticField))
