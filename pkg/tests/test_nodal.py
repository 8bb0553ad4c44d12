import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nodal_atlas.errors import InputError
from nodal_atlas.fem import ScalarField, mesh_domain, square_mode
from nodal_atlas.geometry import get_domain
from nodal_atlas.nodal import (DiskRegion, PolygonRegion, extract_nodal, nodal_domain_count, nodal_length,
                               scaling_fit, zero_free_audit)


@pytest.fixture(scope="module")
def mesh():
    return mesh_domain(get_domain("unit-square"), 0.05)


def _field(mesh, f):
    return ScalarField(mesh, f(mesh.vertices))


def test_straight_line_length(mesh):
    # x - 0.37 vanishes on a vertical segment of length 1
    Z = extract_nodal(_field(mesh, lambda p: p[:, 0] - 0.37))
    assert abs(Z.length - 1.0) < 1e-12
    assert Z.component_count == 1


def test_diagonal_length(mesh):
    Z = extract_nodal(_field(mesh, lambda p: p[:, 0] - p[:, 1] + 0.013))
    exact = np.sqrt(2) * (1 - 0.013)
    assert abs(Z.length - exact) < 1e-10


def test_line_through_vertices_counted_once(mesh):
    # zero set along mesh edges exercises the shared-edge rule
    Z = extract_nodal(_field(mesh, lambda p: p[:, 1] - 0.5))
    assert abs(Z.length - 1.0) < 1e-12


def test_square_mode_lengths(mesh):
    assert abs(extract_nodal(square_mode(2, 1).interpolate(mesh)).length - 1.0) < 1e-9


def test_square_mode_33_converges():
    # the nodal lines x, y = 1/3, 2/3 are off the grid, so P1 bends them near the crossings
    errs = [abs(extract_nodal(square_mode(3, 3).interpolate(mesh_domain(get_domain("unit-square"), h))).length - 4)
            for h in (0.05, 0.025)]
    assert errs[1] < errs[0] < 0.15


def test_courant_square_mode(mesh):
    assert nodal_domain_count(square_mode(2, 3).interpolate(mesh)) == 6


def test_circle_length_converges():
    lens = []
    for h in (0.05, 0.025):
        m = mesh_domain(get_domain("unit-square"), h)
        Z = extract_nodal(_field(m, lambda p: np.hypot(p[:, 0] - 0.5, p[:, 1] - 0.5) - 0.3))
        lens.append(abs(Z.length - 0.6 * np.pi))
    assert lens[1] < lens[0] < 0.02


@given(st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3))
@settings(max_examples=20, deadline=None)
def test_scale_invariance(c):
    m = mesh_domain(get_domain("unit-square"), 0.1)
    u = square_mode(3, 2).interpolate(m)
    a, b = extract_nodal(u), extract_nodal(u.scaled(c))
    assert np.allclose(np.sort(a.lengths), np.sort(b.lengths), atol=1e-12)


def test_region_clipping_additive(mesh):
    u = _field(mesh, lambda p: p[:, 0] + 0.3 * p[:, 1] - 0.5)
    Z = extract_nodal(u)
    left = PolygonRegion(np.array([[0, 0], [1, 0], [1, 0.4], [0, 0.4]], dtype=float))
    right = PolygonRegion(np.array([[0, 0.4], [1, 0.4], [1, 1], [0, 1]], dtype=float))
    assert abs(nodal_length(Z, left) + nodal_length(Z, right) - Z.length) < 1e-12


def test_disk_region_length(mesh):
    Z = extract_nodal(_field(mesh, lambda p: p[:, 0] - 0.5))
    assert abs(nodal_length(Z, DiskRegion((0.5, 0.5), 0.2)) - 0.4) < 1e-12


def test_zero_free_audit(mesh):
    u = _field(mesh, lambda p: p[:, 0] - 0.5)
    far = PolygonRegion(np.array([[0.7, 0.1], [0.9, 0.1], [0.9, 0.3], [0.7, 0.3]], dtype=float))
    near = PolygonRegion(np.array([[0.4, 0.1], [0.6, 0.1], [0.6, 0.3], [0.4, 0.3]], dtype=float))
    assert zero_free_audit(u, far).is_zero_free
    assert not zero_free_audit(u, near).is_zero_free


@given(st.floats(0.1, 10), st.floats(0.2, 0.9))
@settings(max_examples=30, deadline=None)
def test_scaling_fit_recovers_power_law(C, alpha):
    lam = np.geomspace(10, 1e4, 12)
    fit = scaling_fit(list(zip(lam, C * lam**alpha)))
    assert abs(fit.alpha - alpha) < 1e-9 and abs(fit.C - C) < 1e-7 * C


def test_scaling_fit_rejects_bad_input():
    with pytest.raises(InputError):
        scaling_fit([(1.0, 2.0)])
    with pytest.raises(InputError):
        scaling_fit([(1.0, 0.0), (2.0, 1.0)])
