import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nodal_atlas.doubling import (doubling_profile, drop_audit, dyadic_ladder, extension_doubling,
                                  frequency_profile, maximal_index, monotonicity_audit, three_ball_residual)
from nodal_atlas.errors import InputError
from nodal_atlas.fem import ScalarField, homogeneous_harmonic, identity, mesh_domain, square_mode
from nodal_atlas.geometry import boundary_cuboid, get_domain

RADII = dyadic_ladder(0.4, 4)


@pytest.fixture(scope="module")
def half_mesh():
    return mesh_domain(get_domain("half-disk", spacing=0.05), 0.05)


@pytest.fixture(scope="module")
def unit_disk_mesh():
    return mesh_domain(get_domain("unit-disk", spacing=0.05), 0.05)


def test_dyadic_ladder():
    r = dyadic_ladder(0.4, 4)
    assert np.allclose(r, [0.05, 0.1, 0.2, 0.4])


@pytest.mark.parametrize("n", [1, 2, 4])
def test_frequency_homogeneous(half_mesh, n):
    u = homogeneous_harmonic(n, "im")
    fp = frequency_profile(u, identity(), (0.0, 0.0), RADII, mesh=half_mesh)
    ok = [i for i, f in enumerate(fp.flags) if not f]
    assert len(ok) >= 2
    assert np.max(np.abs(fp.N[ok] - n)) < 1e-6


@pytest.mark.parametrize("n", [1, 3])
def test_doubling_homogeneous_interior(unit_disk_mesh, n):
    dp = doubling_profile(homogeneous_harmonic(n, "re"), identity(), (0.0, 0.0), [0.05, 0.1, 0.2], mesh=unit_disk_mesh)
    assert np.max(np.abs(dp.N - (2 * n + 2) * np.log(2))) < 1e-8
    assert dp.monotone


def test_doubling_flat_boundary(half_mesh):
    dp = doubling_profile(homogeneous_harmonic(1, "im"), identity(), (0.0, 0.0), [0.05, 0.1, 0.2], mesh=half_mesh)
    assert np.max(np.abs(dp.N - 4 * np.log(2))) < 1e-8


def test_doubling_p1_close_to_exact(unit_disk_mesh):
    u = homogeneous_harmonic(2, "re")
    dp = doubling_profile(u.interpolate(unit_disk_mesh), identity(), (0.0, 0.0), [0.2], mesh=unit_disk_mesh)
    assert abs(dp.N[0] - 6 * np.log(2)) < 0.05


def test_monotonicity_audit_clean(half_mesh):
    fp = frequency_profile(homogeneous_harmonic(3, "im"), identity(), (0.0, 0.0), RADII, mesh=half_mesh)
    rep = monotonicity_audit(fp, tol=1e-8)
    assert rep.ok and rep.epsilon < 1e-6


def test_monotonicity_audit_detects_drop():
    from nodal_atlas.doubling.profiles import FrequencyProfile
    r = np.array([0.1, 0.2, 0.4])
    fp = FrequencyProfile(np.zeros(2), r, np.ones(3), np.ones(3), np.array([3.0, 2.0, 2.0]), np.zeros(3),
                          np.zeros(3), ["", "", ""], np.eye(2))
    rep = monotonicity_audit(fp, tol=1e-8)
    assert not rep.ok and rep.violations[0]["r"] == 0.1


def test_three_ball_homogeneous_zero():
    # J(r) = c r^(2n+2) for a degree-n homogeneous field in 2D
    n, c = 3, 0.7
    r1, r2, r3 = 0.05, 0.1, 0.4
    J = [c * r ** (2 * n + 2) for r in (r1, r2, r3)]
    assert abs(three_ball_residual(*J, r1, r2, r3).residual) < 1e-12


@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=2, max_size=6),
       st.floats(0.02, 0.1), st.floats(1.2, 3.0), st.floats(1.2, 3.0))
@settings(max_examples=40, deadline=None)
def test_three_ball_nonnegative_for_harmonic_polynomials(coeffs, r1, a, b):
    # J(r) = pi sum_n |c_n|^2 r^(2n+2)/(n+1) (orthogonality of z^n on circles) is log-convex in log r
    w = [np.hypot(*c) ** 2 * (2 if n else 1) for n, c in enumerate(coeffs)]
    if sum(w) == 0:
        return
    J = lambda r: np.pi * sum(wn * r ** (2 * n + 2) / (2 * (n + 1)) for n, wn in enumerate(w))
    r2, r3 = r1 * a, r1 * a * b
    tb = three_ball_residual(J(r1), J(r2), J(r3), r1, r2, r3)
    assert tb.residual >= -1e-9


def test_three_ball_input_validation():
    with pytest.raises(InputError):
        three_ball_residual(1, 2, 3, 0.2, 0.1, 0.4)
    with pytest.raises(InputError):
        three_ball_residual(2, 1, 3, 0.1, 0.2, 0.4)


def test_extension_doubling_small_lambda_constant():
    # phi = 1, lambda -> 0: J is the volume of a 3-ball, so N = 3 log 2
    mesh = mesh_domain(get_domain("unit-square"), 0.05)
    one = ScalarField(mesh, np.ones(mesh.n_vertices))
    ext = extension_doubling(one, 1e-12, identity(), ((0.5, 0.5), 0.0), 0.1)
    assert abs(ext.N - 3 * np.log(2)) < 1e-6
    assert ext.truncation < 1e-6


def test_extension_rejects_few_nodes():
    mesh = mesh_domain(get_domain("unit-square"), 0.1)
    with pytest.raises(InputError):
        extension_doubling(ScalarField(mesh, np.ones(mesh.n_vertices)), 1.0, identity(), ((0.5, 0.5), 0.0), 0.1,
                           nodes=16)


def test_maximal_index_refinement_monotone():
    dom = get_domain("unit-square")
    mesh = mesh_domain(dom, 0.05)
    u = square_mode(2, 1).interpolate(mesh)
    Q = boundary_cuboid(dom, dom.patches[0], 0.0, 0.1)
    a = maximal_index(u, identity(), Q, (3, 2), dom, mesh)
    b = maximal_index(u, identity(), Q, a.refined(), dom, mesh)
    assert b.value >= a.value - 1e-12


def test_drop_audit_table_complete():
    dom = get_domain("unit-square")
    mesh = mesh_domain(dom, 0.05)
    u = square_mode(2, 1).interpolate(mesh)
    Q = boundary_cuboid(dom, dom.patches[0], 0.0, 0.1)
    audit = drop_audit(u, identity(), Q, 3, 3.0, dom, density=(3, 2), sub_density=(2, 2), mesh=mesh)
    assert len(audit.rows) >= 8
    s = audit.summary()
    assert s["boundary_cuboids"] == len(audit.rows)
    assert audit.branch in ("drop", "zero-free")
