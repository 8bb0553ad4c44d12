"""Named preset domains.

Curved boundaries are polygonised with chords no shorter than ``spacing``
so that a mesh of size ``h = spacing`` respects the polyline.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..errors import InputError
from .curves import CircleArc, Polynomial
from .domain import GraphPatch, PlanarDomain
from .pathological import pathological_curve

DEFAULT_SPACING = 0.01


def _flat_patch(a, b, half_width=None):
    """Patch for the straight edge a->b (CCW polygon, interior to the left)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b - a
    hw = 0.5 * float(np.hypot(*d)) if half_width is None else half_width
    return GraphPatch(tuple(0.5 * (a + b)), float(np.arctan2(d[1], d[0])), hw, Polynomial((0.0,)), 0.0)


def unit_square(spacing=None):
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    patches = tuple(_flat_patch(verts[i], verts[(i + 1) % 4]) for i in range(4))
    return PlanarDomain(verts, patches, 1.0, 0.5, "convex", "unit-square")


def _chord_count(radius, sweep, spacing):
    """Largest n with chord 2 R sin(sweep/(2n)) >= spacing."""
    n = max(3, int(np.floor(radius * sweep / spacing)))
    while n > 3 and 2 * radius * np.sin(sweep / (2 * n)) < spacing:
        n -= 1
    return n


def unit_disk(spacing=None):
    spacing = DEFAULT_SPACING if spacing is None else spacing
    n = _chord_count(1.0, 2 * np.pi, spacing)
    th = 2 * np.pi * np.arange(n) / n - np.pi / 2
    verts = np.column_stack([np.cos(th), np.sin(th)])
    patch = GraphPatch((0.0, -1.0), 0.0, 0.5, CircleArc(1.0), 1.0)
    return PlanarDomain(verts, (patch,), 1.0, 0.5, "convex", "unit-disk",
                        hausdorff=1.0 - np.cos(np.pi / n), meta={"segments": n})


def half_disk(spacing=None):
    """Upper half of the unit disk; the flat side is exact."""
    spacing = DEFAULT_SPACING if spacing is None else spacing
    n = _chord_count(1.0, np.pi, spacing)
    th = np.pi * np.arange(n + 1) / n
    verts = np.column_stack([np.cos(th), np.sin(th)])
    verts[0] = [1.0, 0.0]
    verts[-1] = [-1.0, 0.0]
    patch = GraphPatch((0.0, 0.0), 0.0, 0.9, Polynomial((0.0,)), 0.0)
    return PlanarDomain(verts, (patch,), 1.0, 0.5, "convex", "half-disk",
                        hausdorff=1.0 - np.cos(np.pi / (2 * n)), meta={"segments": n})


def regular_ngon(n=6, spacing=None):
    if n < 3:
        raise InputError("n-gon needs n >= 3")
    th = 2 * np.pi * np.arange(n) / n - np.pi / 2 - np.pi / n
    verts = np.column_stack([np.cos(th), np.sin(th)])
    patches = tuple(_flat_patch(verts[i], verts[(i + 1) % n]) for i in range(n))
    return PlanarDomain(verts, patches, float(np.tan(np.pi / n)), 0.5, "convex", f"regular-{n}-gon")


def parabola_patch(spacing=None, top=1.0):
    """{ |x| < 1, -x^2 < y < top }: quasiconvex with omega(r) ~ r near 0."""
    spacing = DEFAULT_SPACING if spacing is None else spacing
    m = max(2, int(np.floor(2.0 / spacing)))
    x = np.linspace(-1.0, 1.0, m + 1)
    bottom = np.column_stack([x, -x * x])
    verts = np.vstack([bottom, [[1.0, top], [-1.0, top]]])
    patch = GraphPatch((0.0, 0.0), 0.0, 0.5, Polynomial((0.0, 0.0, -1.0)), 1.0)
    # chord sagitta of a curvature-2 curve over an interval of length dx
    dx = 2.0 / m
    return PlanarDomain(verts, (patch,), 2.0, 0.6, "quasiconvex", "parabola",
                        hausdorff=dx * dx / 4.0)


@lru_cache(maxsize=8)
def _cached_curve(K, enumeration):
    return pathological_curve(K, enumeration)


def pathological_patch(spacing=None, K=4096, enumeration="stern-brocot", top=0.5):
    """{ 0 < x < 1, phi_K(x) < y < top } closed off by two vertical sides."""
    spacing = DEFAULT_SPACING if spacing is None else spacing
    pc = _cached_curve(int(K), enumeration)
    m = max(2, int(np.floor(1.0 / spacing)))
    x = np.linspace(0.0, 1.0, m + 1)
    bottom = np.column_stack([x, pc(x)])
    verts = np.vstack([bottom, [[1.0, top], [0.0, top]]])
    patch = GraphPatch((0.5, float(pc(0.5))), 0.0, 0.5, pc.curve.shifted(0.5), 2.0)
    dx = 1.0 / m
    # a chord deviates from the graph by at most dx/4 times the variation of
    # phi' over the chord; that variation is <= 2 dx + (total point mass < 1)
    return PlanarDomain(verts, (patch,), 2.0, 0.25, "quasiconvex", "pathological",
                        hausdorff=dx * (2 * dx + 1.0) / 4.0, meta={"K": int(K), "enumeration": enumeration})


PRESETS = {
    "unit-square": unit_square,
    "unit-disk": unit_disk,
    "half-disk": half_disk,
    "hexagon": lambda spacing=None: regular_ngon(6, spacing),
    "regular-ngon": regular_ngon,
    "parabola": parabola_patch,
    "pathological": pathological_patch,
}


def get_domain(name, spacing=None, **params):
    """Look up a preset by name; ``params`` are forwarded to the builder."""
    try:
        builder = PRESETS[name]
    except KeyError:
        raise InputError(f"unknown domain preset {name!r}; known: {sorted(PRESETS)}") from None
    return builder(spacing=spacing, **params)
