"""P1 stiffness and mass matrices for -div(A grad) with centroid evaluation of A."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .coefficients import CoefficientField
from .mesh import Mesh


def element_matrices(mesh: Mesh, A: CoefficientField):
    """Return (Ke, Me), each (nt, 3, 3)."""
    g = mesh.gradients()
    area = mesh.areas
    Ac = A(mesh.centroids)
    Ke = area[:, None, None] * np.einsum("tia,tab,tjb->tij", g, Ac, g)
    base = (np.ones((3, 3)) + np.eye(3)) / 12.0
    Me = area[:, None, None] * base[None]
    return Ke, Me


def assemble(mesh: Mesh, A: CoefficientField):
    """Global (K, M) as CSR matrices on all vertices (no boundary conditions)."""
    Ke, Me = element_matrices(mesh, A)
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    n = mesh.n_vertices
    K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((Me.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    # exact symmetry (summation order can differ by an ulp)
    K = 0.5 * (K + K.T)
    M = 0.5 * (M + M.T)
    return K.tocsr(), M.tocsr()


def mass_matrix(mesh: Mesh, triangle_mask=None):
    """Consistent mass matrix, optionally restricted to a subset of triangles."""
    area = mesh.areas
    if triangle_mask is not None:
        area = np.where(triangle_mask, area, 0.0)
    base = (np.ones((3, 3)) + np.eye(3)) / 12.0
    Me = area[:, None, None] * base[None]
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    n = mesh.n_vertices
    return sp.coo_matrix((Me.ravel(), (rows, cols)), shape=(n, n)).tocsr()
