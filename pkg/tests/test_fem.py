import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nodal_atlas.doubling import matrix_sqrt
from nodal_atlas.errors import InputError
from nodal_atlas.fem import (CoefficientField, ConvexPolygon, Disk, Ellipse, ScalarField, assemble, constant,
                             harmonic_combination, homogeneous_harmonic, identity, integrate_circle,
                             integrate_region, mesh_domain, rayleigh_quotient, solve_aharmonic, solve_eigs)
from nodal_atlas.geometry import get_domain

C = (0.5, 0.5)


def _linear(mesh, a=1.0, b=0.0):
    v = mesh.vertices
    return ScalarField(mesh, a * (v[:, 0] - C[0]) + b * (v[:, 1] - C[1]))


def test_mesh_quality(square_mesh):
    assert square_mesh.min_angle_deg() >= 20 - 1e-9
    assert square_mesh.max_edge() <= 1.5 * 0.05 + 1e-12
    assert abs(square_mesh.areas.sum() - 1.0) < 1e-12


def test_disk_mesh_area(disk_mesh):
    dom = get_domain("unit-disk", spacing=0.08)
    assert abs(disk_mesh.areas.sum() - abs(dom.signed_area())) < 1e-12


def test_stiffness_annihilates_constants(square_ops, square_mesh):
    K, M = square_ops
    assert np.max(np.abs(K @ np.ones(square_mesh.n_vertices))) < 1e-10
    assert abs(M.sum() - 1.0) < 1e-12


@pytest.mark.parametrize("r", [0.1, 0.25, 0.33])
def test_disk_area(square_mesh, r):
    # r = 0.25 puts grid vertices (offset 0.15, 0.2) exactly on the circle
    res = integrate_region(square_mesh, _linear(square_mesh), identity(), Disk(C, r), "one")
    assert abs(res.value - np.pi * r * r) < 1e-10


@pytest.mark.parametrize("r", [0.1, 0.25, 0.33])
def test_disk_second_moment(square_mesh, r):
    res = integrate_region(square_mesh, _linear(square_mesh), identity(), Disk(C, r), "u2")
    assert abs(res.value - np.pi * r**4 / 4) < 1e-10


def test_circle_length_and_moment(square_mesh):
    r = 0.3
    one = integrate_circle(square_mesh, _linear(square_mesh), identity(), C, r, "one")
    u2 = integrate_circle(square_mesh, _linear(square_mesh), identity(), C, r, "u2")
    assert abs(one.value - 2 * np.pi * r) < 1e-10
    assert abs(u2.value - np.pi * r**3) < 1e-10


def test_disk_clipped_by_boundary(square_mesh):
    # half disk centred on the bottom edge
    res = integrate_region(square_mesh, _linear(square_mesh), identity(), Disk((0.5, 0.0), 0.2), "one")
    assert abs(res.value - 0.5 * np.pi * 0.04) < 1e-10


def test_ellipse_area(square_mesh):
    A = constant([[2.0, 0.3], [0.3, 1.0]])
    S = matrix_sqrt(np.array([[2.0, 0.3], [0.3, 1.0]]))
    res = integrate_region(square_mesh, _linear(square_mesh), A, Ellipse(C, S, 0.2), "one")
    assert abs(res.value - np.pi * 0.04 * np.linalg.det(S)) < 1e-10


def test_polygon_integral(square_mesh):
    poly = np.array([[0.2, 0.2], [0.7, 0.2], [0.7, 0.6], [0.2, 0.6]])
    res = integrate_region(square_mesh, _linear(square_mesh), identity(), ConvexPolygon(poly), "u")
    # int (x - 1/2) over [0.2,0.7]x[0.2,0.6]
    exact = 0.4 * ((0.2**2 - 0.3**2) / 2)
    assert abs(res.value - exact) < 1e-12


def test_square_eigenvalues(square_mesh, square_ops):
    sol = solve_eigs(square_mesh, identity(), 4, ops=square_ops)
    exact = np.pi**2 * np.array([2, 5, 5, 8])
    assert np.max(np.abs(sol.lambdas - exact) / exact) < 0.03
    K, M = square_ops
    for lam, f in zip(sol.lambdas, sol.fields):
        assert abs(rayleigh_quotient(f, K, M) - lam) < 1e-8 * lam
        assert abs(f.values @ (M @ f.values) - 1.0) < 1e-10


def test_aharmonic_reproduces_linear(square_mesh, square_ops):
    u = solve_aharmonic(square_mesh, identity(), lambda p: 2 * p[:, 0] - p[:, 1], ops=square_ops)
    v = square_mesh.vertices
    assert np.max(np.abs(u.values - (2 * v[:, 0] - v[:, 1]))) < 1e-10


def test_aharmonic_rejects_bad_data(square_mesh, square_ops):
    with pytest.raises(InputError):
        solve_aharmonic(square_mesh, identity(), np.array([1.0, 2.0]), ops=square_ops)


def test_coefficient_validation():
    with pytest.raises(InputError):
        CoefficientField("constant-SPD", {"matrix": [[1.0, 2.0], [0.0, 1.0]]}, 2.0)
    with pytest.raises(InputError):
        CoefficientField("identity", {}, 0.5)


@given(st.lists(st.tuples(st.floats(-2, 2), st.floats(-2, 2)), min_size=1, max_size=8),
       st.floats(0, 2 * np.pi))
@settings(max_examples=40, deadline=None)
def test_harmonic_combination_matches_terms(coeffs, angle):
    pts = np.random.default_rng(0).uniform(-1, 1, (25, 2))
    f = harmonic_combination(coeffs, center=(0.1, -0.2), angle=angle)
    val = np.zeros(len(pts))
    grad = np.zeros((len(pts), 2))
    for n, (a, b) in enumerate(coeffs):
        for part, c in (("re", a), ("im", b)):
            h = homogeneous_harmonic(n, part, center=(0.1, -0.2), angle=angle)
            val += c * h.value(pts)
            grad += c * h.grad(pts)
    assert np.allclose(f.value(pts), val, atol=1e-10)
    assert np.allclose(f.grad(pts), grad, atol=1e-10)


@pytest.mark.parametrize("n,part", [(1, "im"), (3, "re"), (5, "im")])
def test_homogeneous_gradient_finite_difference(n, part):
    f = homogeneous_harmonic(n, part, angle=0.3)
    p = np.array([[0.31, -0.42], [0.7, 0.1]])
    e = 1e-6
    fd = np.column_stack([(f.value(p + [e, 0]) - f.value(p - [e, 0])) / (2 * e),
                          (f.value(p + [0, e]) - f.value(p - [0, e])) / (2 * e)])
    assert np.allclose(f.grad(p), fd, atol=1e-6)


@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(0, np.pi))
@settings(max_examples=30, deadline=None)
def test_matrix_sqrt_series_matches_spectral(l1, l2, th):
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    A0 = R @ np.diag([l1, l2]) @ R.T
    S1 = matrix_sqrt(A0)
    S2 = matrix_sqrt(A0, method="series", tol=1e-14)
    assert np.allclose(S1 @ S1, A0, atol=1e-10)
    assert np.allclose(S1, S2, atol=1e-6)
