"""Maximal doubling index of a cuboid and the drop / zero-free audit."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError
from ..fem.coefficients import CoefficientField
from ..fem.quadrature import BallContext
from ..geometry.decompose import Cuboid, decompose_cuboid
from ..geometry.domain import PlanarDomain
from ..nodal.extract import zero_free_audit
from .sqrt import matrix_sqrt

DEFAULT_DENSITY = (9, 5)


@dataclass
class CuboidIndex:
    """N*(Q) as the max of N(x, r) over a product sample grid.

    ``samples`` rows are (x, y, r, N); ``density`` is (spatial points per
    side, radii).  ``value`` is the sample maximum, so a refined (superset)
    grid never lowers it."""

    cuboid: Cuboid
    value: float
    samples: np.ndarray
    argmax: int
    density: tuple
    meta: dict = field(default_factory=dict)

    @property
    def value_plus_one(self):
        return self.value + 1.0

    def refined(self):
        return (2 * self.density[0] - 1, 2 * self.density[1] - 1)


def _fractions(n):
    """i/(n-1) for i = 0..n-1; the grid for 2n-1 contains this one exactly."""
    if n < 2:
        return np.array([0.5])
    return np.arange(n) / (n - 1)


def sample_points(Q: Cuboid, n, domain: PlanarDomain = None, mesh=None):
    """Grid points of the closed cuboid inside Omega, plus boundary-graph
    points of Q's patch (when Q is a boundary cuboid of ``domain``)."""
    f = _fractions(n)
    s = Q.side * (f - 0.5)
    v = Q.half_height * (2 * f - 1)
    S, V = np.meshgrid(s, v, indexing="ij")
    pts = Q.center + S.ravel()[:, None] * Q.e1 + V.ravel()[:, None] * Q.e2
    if domain is not None:
        inside = domain.contains(pts)
    else:
        from matplotlib.tri import Triangulation
        tri = Triangulation(mesh.vertices[:, 0], mesh.vertices[:, 1], mesh.triangles)
        inside = tri.get_trifinder()(pts[:, 0], pts[:, 1]) >= 0
    pts = pts[inside]
    if domain is not None and Q.kind == "boundary":
        patch = domain.patch_for(Q.center)
        if patch is not None:
            s0, _ = patch.to_local(Q.center)
            sg = s0 + s
            ok = np.abs(sg) <= patch.half_width
            g = patch.to_world(sg[ok], np.asarray(patch.phi(sg[ok]), dtype=float))
            gu, gv = Q.local(g)
            g = g[(np.abs(gu) <= Q.side / 2 + 1e-12) & (np.abs(gv) <= Q.half_height + 1e-12)]
            pts = np.vstack([pts, g])
    return pts


def sample_radii(ell, m):
    return 0.5 * ell * 2.0 ** _fractions(m) if m >= 2 else np.array([0.75 * ell])


def maximal_index(u, A: CoefficientField, Q: Cuboid, density=DEFAULT_DENSITY, domain=None,
                  mesh=None) -> CuboidIndex:
    """sup of N(x, r) = log(J(x, 2r)/J(x, r)) over x in Q cap closure(Omega)
    and r in [ell(Q)/2, ell(Q)], on an n x n spatial grid times m radii."""
    mesh = mesh if mesh is not None else u.mesh
    n, m = (int(density[0]), int(density[1]))
    if n < 1 or m < 1:
        raise InputError("density entries must be positive")
    ell = Q.diag
    pts = sample_points(Q, n, domain, mesh)
    radii = sample_radii(ell, m)
    rows = []
    for x in pts:
        ctx = BallContext(mesh, u, A, x, matrix_sqrt(A(x[None])[0]))
        cache = {}

        def J(r):
            if r not in cache:
                cache[r] = ctx.disk(r, "mu_u2", error=False).value
            return cache[r]

        for r in radii:
            j1, j2 = J(r), J(2 * r)
            N = float(np.log(j2 / j1)) if j1 > 0 and j2 > 0 else np.nan
            rows.append((x[0], x[1], r, N))
    samples = np.array(rows, dtype=float).reshape(-1, 4)
    if len(samples) == 0 or np.all(np.isnan(samples[:, 3])):
        return CuboidIndex(Q, float("nan"), samples, -1, (n, m), {"ell": ell})
    k = int(np.nanargmax(samples[:, 3]))
    return CuboidIndex(Q, float(samples[k, 3]), samples, k, (n, m), {"ell": ell, "points": len(pts)})


@dataclass
class DropAudit:
    parent: CuboidIndex
    k: int
    N0: float
    rows: list
    drop_witnessed: bool
    zero_free_witnessed: bool
    branch: str
    meta: dict = field(default_factory=dict)

    @property
    def ratios(self):
        return np.array([r["ratio"] for r in self.rows], dtype=float)

    def summary(self):
        ratios = self.ratios
        fin = ratios[np.isfinite(ratios)]
        return {
            "N_star_Q": self.parent.value, "k": self.k, "N0": self.N0, "branch": self.branch,
            "drop_witnessed": self.drop_witnessed, "zero_free_witnessed": self.zero_free_witnessed,
            "zero_free_count": int(sum(r["zero_free"] for r in self.rows)),
            "boundary_cuboids": len(self.rows),
            "ratio_min": float(fin.min()) if len(fin) else float("nan"),
            "ratio_median": float(np.median(fin)) if len(fin) else float("nan"),
            "ratio_max": float(fin.max()) if len(fin) else float("nan"),
        }


def drop_audit(u, A: CoefficientField, Q: Cuboid, k: int, N0: float, domain: PlanarDomain,
               density=DEFAULT_DENSITY, sub_density=(3, 3), mesh=None) -> DropAudit:
    """Per boundary cuboid q of B_k(Q): N*(q), N*(q)/N*(Q) and the zero-free
    audit of q cap Omega.

    Branches: when N*(Q) > N0 the drop branch is witnessed by some q with
    N*(q) <= N*(Q)/2; otherwise the zero-free branch is witnessed by some
    zero-free q.  Both witness flags are always reported; nothing is
    asserted when a witness is absent.
    """
    mesh = mesh if mesh is not None else u.mesh
    dec = decompose_cuboid(domain, Q, k)
    parent = maximal_index(u, A, Q, density, domain, mesh)
    rows = []
    for i, q in enumerate(dec.boundary_cuboids):
        ci = maximal_index(u, A, q, sub_density, domain, mesh)
        zf = zero_free_audit(u, q)
        rows.append({
            "index": i, "center_x": float(q.center[0]), "center_y": float(q.center[1]),
            "side": q.side, "N_star": ci.value,
            "ratio": ci.value / parent.value if parent.value and np.isfinite(parent.value) else float("nan"),
            "zero_free": bool(zf.is_zero_free), "min_abs": zf.min_abs,
            "rho": zf.nearest_zero_distance_to_boundary,
        })
    half = parent.value / 2
    drop = any(np.isfinite(r["N_star"]) and r["N_star"] <= half for r in rows)
    zfree = any(r["zero_free"] for r in rows)
    branch = "drop" if parent.value > N0 else "zero-free"
    return DropAudit(parent, int(k), float(N0), rows, bool(drop), bool(zfree), branch)
