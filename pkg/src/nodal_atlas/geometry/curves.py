"""One-dimensional graph functions used by boundary patches.

Every curve is a callable ``phi(s)`` accepting scalars or arrays, has an
exact ``derivative`` where one exists, and serialises to a small dict.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Polynomial:
    """phi(s) = sum_k coeffs[k] * s**k."""

    coeffs: tuple

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return np.polynomial.polynomial.polyval(s, np.asarray(self.coeffs, dtype=float))

    def derivative(self, s):
        c = np.polynomial.polynomial.polyder(np.asarray(self.coeffs, dtype=float))
        return np.polynomial.polynomial.polyval(np.asarray(s, dtype=float), c)

    def to_dict(self):
        return {"type": "polynomial", "coeffs": [float(c) for c in self.coeffs]}


@dataclass(frozen=True)
class CircleArc:
    """Lower arc of a circle of radius R touching the origin:
    phi(s) = R - sqrt(R^2 - s^2)."""

    radius: float

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return self.radius - np.sqrt(np.maximum(self.radius**2 - s * s, 0.0))

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        return s / np.sqrt(np.maximum(self.radius**2 - s * s, 1e-300))

    def to_dict(self):
        return {"type": "circle", "radius": float(self.radius)}


@dataclass(frozen=True, eq=False)
class PiecewiseQuadratic:
    """Exact piecewise quadratic on breakpoints ``b_0 < ... < b_n``.

    On ``[b_i, b_{i+1})`` the value is ``c0 + c1*(s-b_i) + c2*(s-b_i)**2``.
    Outside ``[b_0, b_n]`` the first/last piece is extended.
    """

    breaks: np.ndarray
    coeffs: np.ndarray  # shape (n, 3)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        b = np.asarray(self.breaks, dtype=float)
        c = np.asarray(self.coeffs, dtype=float).reshape(-1, 3)
        if b.ndim != 1 or len(b) != len(c) + 1:
            raise ValueError("need len(breaks) == len(coeffs) + 1")
        if np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "coeffs", c)

    def _locate(self, s):
        i = np.searchsorted(self.breaks, s, side="right") - 1
        return np.clip(i, 0, len(self.coeffs) - 1)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        i = self._locate(s)
        d = s - self.breaks[i]
        c = self.coeffs[i]
        return c[..., 0] + d * (c[..., 1] + d * c[..., 2])

    def derivative(self, s):
        """Right derivative (the pieces are left-closed)."""
        s = np.asarray(s, dtype=float)
        i = self._locate(s)
        d = s - self.breaks[i]
        c = self.coeffs[i]
        return c[..., 1] + 2.0 * d * c[..., 2]

    def shifted(self, s0):
        """Return psi(s) = phi(s + s0) - phi(s0), normalised so psi(0) = 0."""
        c = self.coeffs.copy()
        c[:, 0] -= float(self(s0))
        return PiecewiseQuadratic(self.breaks - s0, c, dict(self.meta))

    def to_dict(self):
        return {
            "type": "piecewise-quadratic",
            "breaks": self.breaks.tolist(),
            "coeffs": self.coeffs.tolist(),
            "meta": self.meta,
        }


def curve_from_dict(d):
    kind = d["type"]
    if kind == "polynomial":
        return Polynomial(tuple(d["coeffs"]))
    if kind == "circle":
        return CircleArc(float(d["radius"]))
    if kind == "piecewise-quadratic":
        return PiecewiseQuadratic(np.array(d["breaks"]), np.array(d["coeffs"]), d.get("meta", {}))
    raise ValueError(f"unknown curve type {kind!r}")


def piecewise_linear(knots, values):
    """Piecewise-linear interpolant through (knots, values) as a PiecewiseQuadratic."""
    knots = np.asarray(knots, dtype=float)
    values = np.asarray(values, dtype=float)
    slopes = np.diff(values) / np.diff(knots)
    coeffs = np.column_stack([values[:-1], slopes, np.zeros_like(slopes)])
    return PiecewiseQuadratic(knots, coeffs)
