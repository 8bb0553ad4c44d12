"""Frequency function and ellipsoid-weighted doubling index.

Both quantities are evaluated after the affine change of variable
x = x0 + S z with S = A(x0)^{1/2}.  In z-coordinates the ellipsoid
E(x0, r) becomes the disk B_r, the weight is

    mu(z) = z . At(z) z / |z|^2,   At(z) = S^{-1} A(x0 + S z) S^{-1},

and the Dirichlet energy density A grad u . grad u is invariant.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError
from ..fem.coefficients import CoefficientField
from ..fem.quadrature import BallContext
from .sqrt import matrix_sqrt

DEGENERATE_H = 1e-14
LOG_STEP = 1e-3


@dataclass(frozen=True)
class Ellipsoid:
    """E(x0, r) = x0 + S(B_r(0)) with S = A(x0)^{1/2}."""

    center: np.ndarray
    S: np.ndarray
    r: float

    @classmethod
    def at(cls, A: CoefficientField, x0, r, method="spectral"):
        x0 = np.asarray(x0, dtype=float)
        S = matrix_sqrt(A(x0[None])[0], method=method)
        return cls(x0, S, float(r))

    def contains(self, pts):
        z = (np.atleast_2d(pts) - self.center) @ np.linalg.inv(self.S).T
        return np.sum(z * z, axis=1) <= self.r**2

    def boundary(self, n=256):
        th = np.linspace(0, 2 * np.pi, n, endpoint=False)
        return self.center + self.r * np.column_stack([np.cos(th), np.sin(th)]) @ self.S.T


def _check_radii(radii):
    r = np.asarray(radii, dtype=float).ravel()
    if len(r) == 0 or np.any(~np.isfinite(r)) or np.any(r <= 0):
        raise InputError("radii must be positive and finite")
    if np.any(np.diff(r) <= 0):
        raise InputError("radii must be strictly increasing")
    return r


def dyadic_ladder(r_max, count):
    """{r_max 2^-j : j = count-1, ..., 0}, increasing."""
    return float(r_max) * 2.0 ** -np.arange(count - 1, -1, -1, dtype=float)


def _context(u, A, x0):
    mesh = getattr(u, "mesh", None)
    if mesh is None:
        raise InputError("field must carry a mesh (or pass mesh= explicitly)")
    x0 = np.asarray(x0, dtype=float)
    S = matrix_sqrt(A(x0[None])[0])
    return BallContext(mesh, u, A, x0, S)


@dataclass
class FrequencyProfile:
    center: np.ndarray
    radii: np.ndarray
    H: np.ndarray
    D: np.ndarray
    N: np.ndarray
    log_residual: np.ndarray
    errors: np.ndarray
    flags: list
    S: np.ndarray
    meta: dict = field(default_factory=dict)

    def mu_weight(self, A: CoefficientField, pts):
        """mu at world points ``pts`` for this profile's centre."""
        Sinv = np.linalg.inv(self.S)
        z = (np.atleast_2d(pts) - self.center) @ Sinv.T
        At = Sinv[None] @ A(np.atleast_2d(pts)) @ Sinv[None]
        zz = np.sum(z * z, axis=1)
        return np.where(zz > 0, np.einsum("na,nab,nb->n", z, At, z) / np.where(zz > 0, zz, 1), 1.0)

    @property
    def tolerance(self):
        """Propagated quadrature uncertainty of N, per radius."""
        return self.errors


def frequency_profile(u, A: CoefficientField, center, radii, mesh=None, d=2) -> FrequencyProfile:
    """H(r), D(r), N(r) = r D / H on a radius grid.

    ``u`` is a ScalarField (P1) or AnalyticField (then ``mesh`` fixes the
    integration region).  The logarithmic-derivative residual
    |H'/H - (d-1)/r - 2N/r| uses a central difference of H with relative
    step 1e-3.
    """
    r = _check_radii(radii)
    if mesh is not None:
        x0 = np.asarray(center, dtype=float)
        ctx = BallContext(mesh, u, A, x0, matrix_sqrt(A(x0[None])[0]))
    else:
        ctx = _context(u, A, center)
    scale = _field_scale(u, ctx)
    H = np.empty(len(r))
    D = np.empty(len(r))
    N = np.full(len(r), np.nan)
    res = np.full(len(r), np.nan)
    err = np.full(len(r), np.nan)
    flags = []
    for i, ri in enumerate(r):
        h = ctx.circle(ri, "mu_u2")
        dd = ctx.disk(ri, "grad")
        H[i], D[i] = h.value, dd.value
        if h.empty or H[i] <= DEGENERATE_H * scale**2 * ri:
            flags.append("degenerate-H")
            continue
        flags.append("")
        N[i] = ri * D[i] / H[i]
        err[i] = N[i] * (h.error / H[i] + dd.error / max(D[i], 1e-300))
        hp = ctx.circle(ri * (1 + LOG_STEP), "mu_u2", error=False).value
        hm = ctx.circle(ri * (1 - LOG_STEP), "mu_u2", error=False).value
        dlog = (np.log(hp) - np.log(hm)) / (2 * LOG_STEP * ri) if hp > 0 and hm > 0 else np.nan
        res[i] = abs(dlog - (d - 1) / ri - 2 * N[i] / ri)
    return FrequencyProfile(ctx.x0.copy(), r, H, D, N, res, err, flags, ctx.S.copy())


def _field_scale(u, ctx):
    vals = getattr(u, "values", None)
    if vals is not None:
        return float(np.max(np.abs(vals))) if len(vals) else 0.0
    return float(np.max(np.abs(u(ctx.mesh.vertices))))


@dataclass
class DoublingProfile:
    center: np.ndarray
    radii: np.ndarray
    J: np.ndarray
    J2: np.ndarray
    N: np.ndarray
    errors: np.ndarray
    monotone: bool
    S: np.ndarray
    flags: list
    meta: dict = field(default_factory=dict)

    def J_at(self, r):
        """J on the union grid radii cup 2*radii."""
        grid = np.concatenate([self.radii, 2 * self.radii])
        vals = np.concatenate([self.J, self.J2])
        idx = np.flatnonzero(np.isclose(grid, r, rtol=1e-12, atol=0))
        if len(idx) == 0:
            raise KeyError(r)
        return float(vals[idx[0]])


def weighted_mass(ctx: BallContext, r):
    """J(x0, r) for a prepared context; in z-measure so the det A(x0)^{-1/2}
    prefactor is already absorbed."""
    return ctx.disk(r, "mu_u2")


def doubling_profile(u, A: CoefficientField, x0, radii, mesh=None, mono_tol=1e-10) -> DoublingProfile:
    """J(x0, r), J(x0, 2r) and N(x0, r) = log(J(2r)/J(r)) on a radius grid."""
    r = _check_radii(radii)
    x0 = np.asarray(x0, dtype=float)
    if mesh is not None:
        ctx = BallContext(mesh, u, A, x0, matrix_sqrt(A(x0[None])[0]))
    else:
        ctx = _context(u, A, x0)
    grid = np.unique(np.concatenate([r, 2 * r]))
    vals, errs = {}, {}
    for g in grid:
        q = weighted_mass(ctx, g)
        vals[g], errs[g] = q.value, q.error
    top = vals[grid[-1]]
    if not top > 0:
        raise InputError("u vanishes on the largest ellipsoid; doubling index undefined")
    J = np.array([vals[g] for g in r])
    J2 = np.array([vals[g] for g in 2 * r])
    E1 = np.array([errs[g] for g in r])
    E2 = np.array([errs[g] for g in 2 * r])
    flags = []
    N = np.full(len(r), np.nan)
    for i in range(len(r)):
        if J[i] > 0:
            N[i] = float(np.log(J2[i] / J[i]))
            flags.append("")
        else:
            flags.append("zero-J")
    err = np.where(J > 0, E1 / np.where(J > 0, J, 1) + E2 / np.where(J2 > 0, J2, 1), np.nan)
    seq = np.array([vals[g] for g in grid])
    monotone = bool(np.all(np.diff(seq) >= -mono_tol * max(abs(top), 1e-300)))
    return DoublingProfile(x0.copy(), r, J, J2, N, err, monotone, ctx.S.copy(), flags)


def mu_bounds_check(A: CoefficientField, x0, pts):
    """(min, max) of mu(x0, y) over ``pts`` together with whether it lies
    in [1/Lambda, Lambda]."""
    x0 = np.asarray(x0, dtype=float)
    S = matrix_sqrt(A(x0[None])[0])
    Sinv = np.linalg.inv(S)
    pts = np.atleast_2d(pts)
    z = (pts - x0) @ Sinv.T
    At = Sinv[None] @ A(pts) @ Sinv[None]
    zz = np.sum(z * z, axis=1)
    keep = zz > 0
    m = np.einsum("na,nab,nb->n", z[keep], At[keep], z[keep]) / zz[keep]
    lo, hi = float(m.min()), float(m.max())
    lam = A.Lambda
    return lo, hi, bool(lo >= 1 / lam * (1 - 1e-12) and hi <= lam * (1 + 1e-12))
