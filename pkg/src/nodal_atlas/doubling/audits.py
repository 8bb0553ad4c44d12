"""Audits of the analytic inequalities: centre shifts, starshape, almost
monotonicity and the three-ball inequality."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError
from ..fem.coefficients import CoefficientField
from ..fem.quadrature import BallContext
from ..geometry.domain import PlanarDomain
from ..geometry.modulus import estimate_modulus
from .profiles import DoublingProfile, FrequencyProfile
from .sqrt import matrix_sqrt


# ----------------------------------------------------------------------------
# centre shift
# ----------------------------------------------------------------------------
@dataclass(frozen=True)
class CenterShift:
    lhs: float
    mid: float
    rhs: float
    C: float
    C_min: float
    theta: float
    holds: bool


def _ctx(u, A, x, mesh):
    x = np.asarray(x, dtype=float)
    return BallContext(mesh if mesh is not None else u.mesh, u, A, x, matrix_sqrt(A(x[None])[0]))


def center_shift_check(u, A: CoefficientField, x0, x1, r, C=1.0, mesh=None, bisect_steps=60):
    """Sandwich (1 - C g th) J(x1, r - C th) <= J(x0, r) <= (1 + C g th) J(x1, r + C th).

    Returns the three numbers at the given ``C`` and the smallest C >= 0 for
    which both inequalities hold (inf if none below r/theta does).
    """
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    theta = float(np.hypot(*(x1 - x0)))
    if r <= 0:
        raise InputError("r must be positive")
    if theta > 0 and not theta < r / C:
        raise InputError(f"theta = {theta:.4g} must be < r/C = {r / C:.4g}")
    g = A.gamma
    c0 = _ctx(u, A, x0, mesh)
    c1 = _ctx(u, A, x1, mesh)
    mid = c0.disk(r, "mu_u2").value
    cache = {}

    def J1(rho):
        if rho not in cache:
            cache[rho] = c1.disk(rho, "mu_u2").value if rho > 0 else 0.0
        return cache[rho]

    def sides(c):
        return (1 - c * g * theta) * J1(r - c * theta), (1 + c * g * theta) * J1(r + c * theta)

    lhs, rhs = sides(C)
    tol = 1e-12 * max(abs(mid), 1e-300)

    def ok(c):
        lo, hi = sides(c)
        return lo <= mid + tol and mid <= hi + tol

    if theta == 0:
        c_min = 0.0
    elif ok(0.0):
        c_min = 0.0
    else:
        top = (r / theta) * (1 - 1e-9)
        if not ok(top):
            c_min = float("inf")
        else:
            lo_c, hi_c = 0.0, top
            for _ in range(bisect_steps):
                m = 0.5 * (lo_c + hi_c)
                if ok(m):
                    hi_c = m
                else:
                    lo_c = m
            c_min = hi_c
    return CenterShift(lhs, mid, rhs, float(C), c_min, theta, bool(lhs <= mid + tol and mid <= rhs + tol))


# ----------------------------------------------------------------------------
# starshape centre
# ----------------------------------------------------------------------------
@dataclass(frozen=True)
class StarShift:
    x1: np.ndarray
    k: float
    defect: float
    defect_wide: float
    samples: int
    C: float
    omega_2r: float
    smallness: float
    k_le_r: bool


def _boundary_with_normals(domain: PlanarDomain, center, radius, samples):
    spacing = max(2.0 * radius / samples, 1e-6)
    pts, eidx, t = domain.sample_boundary(spacing)
    normals = domain.outward_normals()
    d = np.hypot(*(pts - center).T)
    keep = d <= radius
    pts, eidx, t = pts[keep], eidx[keep], t[keep]
    n1 = normals[eidx]
    # at polyline vertices also test the normal of the previous edge
    prev = normals[(eidx - 1) % len(normals)]
    return pts, n1, np.where((t == 0)[:, None], prev, n1)


def _starshape_defect(A, x1, pts, n1, n2):
    if len(pts) == 0:
        return float("inf")
    M = A(pts) @ np.linalg.inv(A(np.asarray(x1)[None])[0])[None]
    v = np.einsum("nab,nb->na", M, pts - x1)
    return float(min(np.min(np.sum(n1 * v, axis=1)), np.min(np.sum(n2 * v, axis=1))))


def star_center_shift(domain: PlanarDomain, A: CoefficientField, x0, r, omega=None,
                      samples=1000, strict=True) -> StarShift:
    """Shifted centre x1 = x0 + C (r omega(2r) + gamma r^2) e2 with C = 9 Lambda (1 + L),
    e2 the inward normal of the boundary patch through x0, and the starshape
    defect min n(x) . A(x) A(x1)^{-1} (x - x1) over boundary samples in B_r(x1).

    ``omega`` is a callable, a number (taken as omega(2r)), or None (then
    estimated from boundary points within 2r of x0).  The smallness
    condition C (omega(2r) + gamma r) <= 1 is always reported; with
    ``strict`` it raises when violated.  ``defect_wide`` is the same minimum
    over B_{r+k}(x1), which contains B_r(x0).
    """
    x0 = np.asarray(x0, dtype=float)
    patch = domain.patch_for(x0)
    if patch is None:
        raise InputError(f"x0 = {x0.tolist()} is not on a boundary patch")
    L = max(patch.lipschitz, 0.0)
    C = 9.0 * A.Lambda * (1.0 + L)
    if omega is None:
        if 2 * r > domain.r0:
            raise InputError(f"2r = {2 * r} exceeds r0 = {domain.r0}")
        pts, _, _ = domain.sample_boundary(r / 16)
        anchors = pts[np.hypot(*(pts - x0).T) <= 2 * r]
        w = float(estimate_modulus(domain, [2 * r], anchors=anchors)(2 * r))
    elif callable(omega):
        w = float(omega(2 * r))
    else:
        w = float(omega)
    small = C * (w + A.gamma * r)
    if strict and small > 1:
        raise InputError(f"smallness condition violated: C (omega(2r) + gamma r) = {small:.4g} > 1")
    k = C * (r * w + A.gamma * r * r)
    x1 = x0 + k * patch.e2
    pts, n1, n2 = _boundary_with_normals(domain, x1, r, samples)
    defect = _starshape_defect(A, x1, pts, n1, n2)
    wp, wn1, wn2 = _boundary_with_normals(domain, x1, r + k, samples)
    wide = _starshape_defect(A, x1, wp, wn1, wn2)
    return StarShift(x1, float(k), defect, wide, int(len(pts)), C, w, float(small), bool(k <= r))


# ----------------------------------------------------------------------------
# almost monotonicity
# ----------------------------------------------------------------------------
@dataclass
class MonotonicityReport:
    kind: str
    violations: list
    epsilon: float
    pairs: int
    tolerance: float
    meta: dict = field(default_factory=dict)

    @property
    def ok(self):
        return not self.violations


def _omega_fn(omega):
    if omega is None:
        return lambda r: 0.0
    if callable(omega):
        return omega
    return lambda r: float(omega)


def _dyadic_pairs(radii):
    pairs = []
    for i, r in enumerate(radii):
        j = np.flatnonzero(np.isclose(radii, 2 * r, rtol=1e-9, atol=0))
        if len(j):
            pairs.append((i, int(j[0])))
    return pairs


def monotonicity_audit(profile, gamma=0.0, omega_at_scale=None, C=1.0, tol=None) -> MonotonicityReport:
    """Check the almost monotonicity inequality on a profile.

    Frequency profiles: e^{C gamma r} N(r) must be nondecreasing between
    adjacent radii.  Doubling profiles: for each pair (r, 2r) on the grid,
    N(r) <= (1 + C s) N(2r) + C s with s = gamma r + omega(16 r).  In both
    cases epsilon is the smallest value with N(r) + 1 <= (1 + eps)(N(2r) + 1)
    over the available (r, 2r) pairs (adjacent pairs when the grid has none).
    ``tol`` defaults to ten times the profile's quadrature error estimate.
    """
    w = _omega_fn(omega_at_scale)
    radii = np.asarray(profile.radii, dtype=float)
    if isinstance(profile, DoublingProfile):
        N = np.asarray(profile.N, dtype=float)
        # J(r) and J(2r) come from the same context, so the profile error
        # is a relative error on the ratio
        errs = np.asarray(profile.errors, dtype=float)
        base_tol = 10 * float(np.nanmax(errs)) if np.any(np.isfinite(errs)) else 0.0
        kind = "doubling"
        # N(r) pairs with N(2r): both must be on the grid
        pairs = _dyadic_pairs(radii) or [(i, i + 1) for i in range(len(radii) - 1)]
    elif isinstance(profile, FrequencyProfile):
        N = np.asarray(profile.N, dtype=float)
        errs = np.asarray(profile.errors, dtype=float)
        base_tol = 10 * float(np.nanmax(errs)) if np.any(np.isfinite(errs)) else 0.0
        kind = "frequency"
        pairs = [(i, i + 1) for i in range(len(radii) - 1)]
    else:
        raise InputError("profile must be a FrequencyProfile or DoublingProfile")
    tol = base_tol if tol is None else float(tol)
    violations = []
    eps = 0.0
    used = 0
    for i, j in pairs:
        a, b = N[i], N[j]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        used += 1
        ri, rj = radii[i], radii[j]
        if kind == "frequency":
            lhs = np.exp(C * gamma * ri) * a
            rhs = np.exp(C * gamma * rj) * b
        else:
            s = gamma * ri + w(16 * ri)
            lhs = a
            rhs = (1 + C * s) * b + C * s
        if lhs > rhs + tol:
            violations.append({"r": float(ri), "r_next": float(rj), "lhs": float(lhs),
                               "rhs": float(rhs), "excess": float(lhs - rhs)})
        if b + 1 > 0:
            eps = max(eps, (a + 1) / (b + 1) - 1)
    if kind == "frequency":
        # epsilon from exact dyadic pairs (r, 2r) when the grid has them
        dp = _dyadic_pairs(radii)
        if dp:
            eps = 0.0
            for i, j in dp:
                if np.isfinite(N[i]) and np.isfinite(N[j]) and N[j] + 1 > 0:
                    eps = max(eps, (N[i] + 1) / (N[j] + 1) - 1)
    return MonotonicityReport(kind, violations, float(max(eps, 0.0)), used, tol)


# ----------------------------------------------------------------------------
# three-ball inequality
# ----------------------------------------------------------------------------
@dataclass(frozen=True)
class ThreeBall:
    residual: float
    beta: float


def three_ball_residual(J1, J2, J3, r1, r2, r3, gamma=0.0, d=2, C=1.0) -> ThreeBall:
    """beta log(J3/J2) + d log(r2^{1+beta} / (r3^beta r1)) + C gamma r3 - log(J2/J1)
    with beta = e^{C gamma r3} log(r2/r1) / log(r3/r2)."""
    r1, r2, r3 = float(r1), float(r2), float(r3)
    if not (0 < r1 < r2 < r3):
        raise InputError("radii must satisfy 0 < r1 < r2 < r3")
    if not (J1 > 0 and J2 > 0 and J3 > 0):
        raise InputError("J values must be positive")
    if not (J1 <= J2 <= J3):
        raise InputError("J must be nondecreasing in r")
    beta = np.exp(C * gamma * r3) * np.log(r2 / r1) / np.log(r3 / r2)
    res = (beta * np.log(J3 / J2) + d * ((1 + beta) * np.log(r2) - beta * np.log(r3) - np.log(r1))
           + C * gamma * r3 - np.log(J2 / J1))
    return ThreeBall(float(res), float(beta))
