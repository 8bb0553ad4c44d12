"""Discrete (P1) and analytic scalar fields."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .mesh import Mesh


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Piecewise-linear field given by one value per mesh vertex."""

    mesh: Mesh
    values: np.ndarray
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.mesh.n_vertices,):
            raise ValueError("one value per mesh vertex required")
        object.__setattr__(self, "values", v)

    @property
    def scale(self):
        return float(np.max(np.abs(self.values))) if len(self.values) else 0.0

    def triangle_gradients(self):
        """Per-triangle constant gradient, (nt, 2)."""
        g = self.mesh.gradients()
        return np.einsum("tia,ti->ta", g, self.values[self.mesh.triangles])

    def __call__(self, pts):
        """Evaluate the P1 interpolant; NaN outside the mesh."""
        from matplotlib.tri import LinearTriInterpolator, Triangulation

        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        tri = Triangulation(self.mesh.vertices[:, 0], self.mesh.vertices[:, 1], self.mesh.triangles)
        interp = LinearTriInterpolator(tri, self.values)
        out = interp(pts[:, 0], pts[:, 1])
        return np.ma.filled(out, np.nan)

    def scaled(self, c):
        return ScalarField(self.mesh, c * self.values, self.label, dict(self.meta))


@dataclass(frozen=True, eq=False)
class AnalyticField:
    """Closed-form field with value and gradient callables of (n, 2) points."""

    value: Callable
    grad: Callable
    label: str = ""

    def __call__(self, pts):
        return self.value(np.atleast_2d(np.asarray(pts, dtype=float)))

    def interpolate(self, mesh: Mesh) -> ScalarField:
        return ScalarField(mesh, self.value(mesh.vertices), self.label)


def homogeneous_harmonic(n, part="im", center=(0.0, 0.0), angle=0.0):
    """Re or Im of ((x - c) e^{-i angle})^n, a harmonic polynomial of degree n."""
    c = np.asarray(center, dtype=float)
    rot = np.exp(-1j * angle)

    def val(p):
        z = ((p[:, 0] - c[0]) + 1j * (p[:, 1] - c[1])) * rot
        w = z**n
        return w.imag if part == "im" else w.real

    def grad(p):
        z = ((p[:, 0] - c[0]) + 1j * (p[:, 1] - c[1])) * rot
        dw = n * z ** (n - 1) * rot if n > 0 else np.zeros_like(z)
        # f = Re w or Im w; for analytic w, grad Re w = (Re w', -Im w'), grad Im w = (Im w', Re w')
        if part == "im":
            return np.column_stack([dw.imag, dw.real])
        return np.column_stack([dw.real, -dw.imag])

    return AnalyticField(val, grad, f"{part}(z^{n})")


def harmonic_combination(coeffs, center=(0.0, 0.0), angle=0.0):
    """sum_n (a_n Re + b_n Im) of ((x - c) e^{-i angle})^n for coeffs[n] = (a_n, b_n).

    Evaluated as Re P(z) with P(z) = sum_n (a_n - i b_n) z^n by Horner's rule."""
    c = np.asarray(center, dtype=float)
    rot = np.exp(-1j * angle)
    poly = np.array([complex(a, -b) for a, b in coeffs], dtype=complex)[::-1]
    dpoly = np.polyder(poly) if len(poly) > 1 else np.zeros(1, dtype=complex)

    def z_of(p):
        return ((p[:, 0] - c[0]) + 1j * (p[:, 1] - c[1])) * rot

    def val(p):
        return np.polyval(poly, z_of(p)).real if len(poly) else np.zeros(len(p))

    def grad(p):
        # d/dx Re P = Re(P' rot), d/dy Re P = Re(i P' rot)
        d = np.polyval(dpoly, z_of(p)) * rot
        return np.column_stack([d.real, -d.imag])

    return AnalyticField(val, grad, "harmonic-combination")


def square_mode(m, n):
    """2 sin(m pi x) sin(n pi y), L2-normalised Dirichlet mode of the unit square."""
    def val(p):
        return 2 * np.sin(m * np.pi * p[:, 0]) * np.sin(n * np.pi * p[:, 1])

    def grad(p):
        return 2 * np.pi * np.column_stack([
            m * np.cos(m * np.pi * p[:, 0]) * np.sin(n * np.pi * p[:, 1]),
            n * np.sin(m * np.pi * p[:, 0]) * np.cos(n * np.pi * p[:, 1])])

    return AnalyticField(val, grad, f"square-mode({m},{n})")
