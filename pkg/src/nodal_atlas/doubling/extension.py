"""Doubling index of the harmonic extension u(x, t) = e^{t sqrt(lambda)} phi(x).

On the cylinder Omega x R the coefficients are At = diag(A, 1), so
At^{1/2}(x0, t0) = diag(S, 1) with S = A(x0)^{1/2}.  In the rescaled
variables (z, tau) the ellipsoid becomes the ball |z|^2 + tau^2 < r^2 and

    J(r) = int_{-r}^{r} e^{2 (t0 + tau) sqrt(lambda)}
           int_{|z| < sqrt(r^2 - tau^2)} mu(z, tau) phi(x0 + S z)^2 dz dtau,

    mu(z, tau) = (z . At(z) z + tau^2) / (|z|^2 + tau^2).

The tau integral uses tau = r sin(psi) and Gauss-Legendre nodes in psi,
which removes the square-root endpoint behaviour of the slice radius.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from ..fem.assemble import assemble
from ..fem.coefficients import CoefficientField
from ..fem.quadrature import BallContext
from .sqrt import matrix_sqrt

DEFAULT_NODES = 64


@dataclass(frozen=True)
class ExtensionDoubling:
    J: float
    J2: float
    N: float
    truncation: float
    nodes: int


def _slice_integral(ctx: BallContext, rho, tau, variable):
    if rho <= 0:
        return 0.0
    if not variable:
        return ctx.disk(rho, "u2", error=False).value
    Sinv = ctx.Sinv

    def f(tri, z):
        At = Sinv[None] @ ctx.A(ctx.to_x(z), check=False) @ Sinv[None]
        num = np.einsum("na,nab,nb->n", z, At, z) + tau * tau
        den = np.sum(z * z, axis=1) + tau * tau
        mu = np.where(den > 0, num / np.where(den > 0, den, 1.0), 1.0)
        return mu * ctx.u(tri, z) ** 2

    return ctx.disk(rho, f, error=False).value


def _J(ctx, lam, t0, r, nodes, variable):
    x, w = np.polynomial.legendre.leggauss(nodes)
    psi = 0.5 * np.pi * x
    wpsi = 0.5 * np.pi * w
    total = 0.0
    k = np.sqrt(lam)
    for p, wp in zip(psi, wpsi):
        tau = r * np.sin(p)
        rho = r * np.cos(p)
        total += wp * r * np.cos(p) * np.exp(2 * (t0 + tau) * k) * _slice_integral(ctx, rho, tau, variable)
    return total


def extension_doubling(phi, lam, A: CoefficientField, center, r, nodes=DEFAULT_NODES,
                       mesh=None) -> ExtensionDoubling:
    """J(r), J(2r) and N = log(J(2r)/J(r)) for the extension of ``phi``.

    ``center`` is (x0, t0) with x0 a point of the closed domain.  The
    truncation estimate is |N(nodes) - N(nodes/2)|.
    """
    if nodes < 64:
        raise InputError("at least 64 Gauss nodes are required in t")
    if lam <= 0 or r <= 0:
        raise InputError("lambda and r must be positive")
    (x0, t0) = center
    x0 = np.asarray(x0, dtype=float)
    mesh = mesh if mesh is not None else phi.mesh
    from matplotlib.tri import Triangulation

    tri = Triangulation(mesh.vertices[:, 0], mesh.vertices[:, 1], mesh.triangles)
    if tri.get_trifinder()(x0[0:1], x0[1:2])[0] < 0:
        d = np.min(np.hypot(*(mesh.vertices[mesh.dirichlet] - x0).T))
        if d > 1e-9:
            raise InputError(f"slice centre {x0.tolist()} lies outside the mesh")
    ctx = BallContext(mesh, phi, A, x0, matrix_sqrt(A(x0[None])[0]))
    variable = not A.is_constant
    J1 = _J(ctx, lam, float(t0), r, nodes, variable)
    J2 = _J(ctx, lam, float(t0), 2 * r, nodes, variable)
    if not (J1 > 0 and J2 > 0):
        raise InputError("extension mass vanishes; doubling undefined")
    N = float(np.log(J2 / J1))
    half = nodes // 2
    Nh = float(np.log(_J(ctx, lam, float(t0), 2 * r, half, variable) / _J(ctx, lam, float(t0), r, half, variable)))
    return ExtensionDoubling(float(J1), float(J2), N, abs(N - Nh), int(nodes))


def extension_residual(mesh, A: CoefficientField, phi_values, lam, ops=None):
    """Relative discrete residual |(K - lam M) phi| / |lam M phi| on interior
    vertices.  For the extension e^{t sqrt(lam)} phi this is the residual of
    the cylinder equation after the t-derivatives cancel -lam."""
    K, M = assemble(mesh, A) if ops is None else ops
    phi = np.asarray(phi_values, dtype=float)
    free = mesh.interior
    res = (K @ phi - lam * (M @ phi))[free]
    ref = (lam * (M @ phi))[free]
    return float(np.linalg.norm(res) / max(np.linalg.norm(ref), 1e-300))
