"""Square roots of 2x2 symmetric positive definite matrices."""
from __future__ import annotations

import numpy as np

from ..errors import InputError

METHODS = ("spectral", "series")


def _validate(A0):
    A0 = np.asarray(A0, dtype=float)
    if A0.shape != (2, 2):
        raise InputError("matrix_sqrt expects a 2x2 matrix")
    if not np.allclose(A0, A0.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A0).max())):
        raise InputError("matrix is not symmetric")
    ev = np.linalg.eigvalsh(0.5 * (A0 + A0.T))
    if ev[0] <= 0:
        raise InputError(f"matrix is not positive definite (eigenvalues {ev.tolist()})")
    return 0.5 * (A0 + A0.T), ev


def matrix_sqrt(A0, method="spectral", Lambda=None, tol=1e-12, max_terms=100000):
    """Symmetric square root S with S @ S = A0.

    ``series`` sums Lambda^{1/2} sum_n binom(1/2, n) (-1)^n (I - A0/Lambda)^n,
    stopping once the term norm drops below ``tol``.  ``Lambda`` defaults to
    the smallest admissible ellipticity bound max(lambda_max, 1/lambda_min, 1).
    """
    A0, ev = _validate(A0)
    if method == "spectral":
        w, V = np.linalg.eigh(A0)
        S = (V * np.sqrt(w)) @ V.T
        return 0.5 * (S + S.T)
    if method != "series":
        raise InputError(f"method must be one of {METHODS}")
    lam = max(ev[1], 1.0 / ev[0], 1.0) if Lambda is None else float(Lambda)
    if ev[1] > lam * (1 + 1e-12) or ev[0] < (1 / lam) * (1 - 1e-12):
        raise InputError("eigenvalues outside [1/Lambda, Lambda]")
    B = np.eye(2) - A0 / lam
    term = np.eye(2)
    total = np.eye(2)
    coef = 1.0
    for n in range(1, max_terms):
        coef *= (0.5 - (n - 1)) / n  # binom(1/2, n)
        term = term @ B
        inc = coef * (-1) ** n * term
        total = total + inc
        if np.linalg.norm(inc, 2) < tol:
            break
    S = np.sqrt(lam) * total
    return 0.5 * (S + S.T)
