"""Dirichlet eigenproblems and A-harmonic extensions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from ..errors import ConvergenceError, InputError
from .assemble import assemble
from .coefficients import CoefficientField
from .fields import ScalarField
from .mesh import Mesh

DENSE_LIMIT = 1500


@dataclass(frozen=True, eq=False)
class EigenSolution:
    lambdas: np.ndarray
    fields: list
    residuals: np.ndarray

    def __len__(self):
        return len(self.lambdas)

    @property
    def mesh(self):
        return self.fields[0].mesh

    def matrix(self):
        return np.column_stack([f.values for f in self.fields])


def _sign_fix(v, tol=1e-8):
    big = np.flatnonzero(np.abs(v) > tol * np.max(np.abs(v)))
    if len(big) and v[big[0]] < 0:
        return -v
    return v


def solve_eigs(mesh: Mesh, A: CoefficientField, count: int, ops=None) -> EigenSolution:
    """Smallest ``count`` Dirichlet eigenpairs of -div(A grad) on P1 elements.

    Eigenvalues are returned as Rayleigh quotients of the returned vectors,
    modes are M-normalised and extended by zero to Dirichlet vertices.
    """
    K, M = assemble(mesh, A) if ops is None else ops
    free = mesh.interior
    n = len(free)
    if count < 1 or count > n:
        raise InputError(f"count must be in [1, {n}] (interior DOF)")
    Kf = K[free][:, free].tocsc()
    Mf = M[free][:, free].tocsc()
    if n <= DENSE_LIMIT:
        w, V = sla.eigh(Kf.toarray(), Mf.toarray(), subset_by_index=[0, count - 1])
    else:
        v0 = np.ones(n) + np.linspace(0.0, 1.0, n)
        try:
            w, V = spla.eigsh(Kf, k=count, M=Mf, sigma=0.0, which="LM", v0=v0, tol=1e-12)
        except spla.ArpackNoConvergence as exc:
            res = [float(np.linalg.norm(Kf @ x - lam * (Mf @ x)))
                   for lam, x in zip(exc.eigenvalues, exc.eigenvectors.T)]
            raise ConvergenceError("eigen-solver did not converge", res) from exc
    order = np.argsort(w, kind="stable")
    w, V = w[order], V[:, order]
    lambdas, fields, res = [], [], []
    for i in range(count):
        x = V[:, i]
        x = x / np.sqrt(x @ (Mf @ x))
        x = _sign_fix(x)
        Kx, Mx = Kf @ x, Mf @ x
        lam = float(x @ Kx) / float(x @ Mx)
        r = float(np.linalg.norm(Kx - lam * Mx) / (abs(lam) * np.linalg.norm(Mx)))
        if r > 1e-6:
            raise ConvergenceError(f"eigenpair {i} residual {r:.2e} too large", [r])
        full = np.zeros(mesh.n_vertices)
        full[free] = x
        lambdas.append(lam)
        fields.append(ScalarField(mesh, full, f"mode{i + 1}", {"lambda": lam, "index": i + 1}))
        res.append(r)
    order = np.argsort(lambdas, kind="stable")
    return EigenSolution(np.asarray(lambdas)[order], [fields[i] for i in order], np.asarray(res)[order])


def rayleigh_quotient(field: ScalarField, K, M):
    v = field.values
    return float(v @ (K @ v)) / float(v @ (M @ v))


def align_to_reference(sol: EigenSolution, indices, reference, M):
    """M-orthogonal projection of ``reference`` (vertex values) onto the span
    of the eigenfields ``indices``, renormalised.  Used to fix a basis inside
    a degenerate eigenspace."""
    V = np.column_stack([sol.fields[i].values for i in indices])
    G = V.T @ (M @ V)
    b = V.T @ (M @ reference)
    c = np.linalg.solve(G, b)
    u = V @ c
    u = u / np.sqrt(u @ (M @ u))
    return ScalarField(sol.mesh, u, "aligned", {"lambda": float(np.mean(sol.lambdas[list(indices)]))})


def solve_aharmonic(mesh: Mesh, A: CoefficientField, g, ops=None) -> ScalarField:
    """Discrete A-harmonic extension of Dirichlet data ``g``.

    ``g`` may be a callable of (n, 2) points, an array over all vertices, or
    an array over the Dirichlet vertices (in index order).
    """
    K = assemble(mesh, A)[0] if ops is None else ops[0]
    bnd = np.flatnonzero(mesh.dirichlet)
    free = mesh.interior
    if len(free) == 0:
        raise InputError("mesh has no interior vertices")
    if callable(g):
        gb = np.asarray(g(mesh.vertices[bnd]), dtype=float)
    else:
        g = np.asarray(g, dtype=float)
        gb = g[bnd] if g.shape == (mesh.n_vertices,) else g
    if gb.shape != (len(bnd),) or not np.all(np.isfinite(gb)):
        raise InputError("boundary data must be finite, one value per Dirichlet vertex")
    u = np.zeros(mesh.n_vertices)
    u[bnd] = gb
    Kff = K[free][:, free].tocsc()
    rhs = -(K[free][:, bnd] @ gb)
    if np.any(rhs):
        u[free] = spla.splu(Kff).solve(rhs)
    res = np.linalg.norm(Kff @ u[free] - rhs)
    scale = max(np.linalg.norm(rhs), 1e-300)
    if np.any(rhs) and res > 1e-10 * scale:
        raise ConvergenceError(f"A-harmonic solve residual {res / scale:.2e}", [res / scale])
    return ScalarField(mesh, u, "a-harmonic")
