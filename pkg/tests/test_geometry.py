import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings, strategies as st

from nodal_atlas.errors import InputError
from nodal_atlas.geometry import (Polynomial, boundary_cuboid, check_decomposition, convex_hull_gap,
                                  decompose_cuboid, enumerate_rationals, estimate_modulus, find_flat_spot,
                                  get_domain, pathological_curve, piecewise_linear, second_derivative_measure)
from nodal_atlas.geometry.flatspot import check_convex, total_variation_of_slope


@pytest.mark.parametrize("name,area", [("unit-square", 1.0), ("hexagon", 1.5 * np.sqrt(3))])
def test_polygon_area(name, area):
    dom = get_domain(name)
    assert abs(abs(dom.signed_area()) - area) < 1e-12


def test_disk_polygon_area_converges():
    errs = [abs(abs(get_domain("unit-disk", spacing=h).signed_area()) - np.pi) for h in (0.1, 0.05)]
    assert errs[1] < errs[0] < 0.01


def test_unknown_preset_rejected():
    with pytest.raises(Exception):
        get_domain("not-a-domain")


def test_contains_and_distance():
    dom = get_domain("unit-square")
    inside = dom.contains(np.array([[0.5, 0.5], [1.5, 0.5]]))
    assert inside.tolist() == [True, False]
    assert abs(dom.distance_to_boundary(np.array([[0.5, 0.2]]))[0] - 0.2) < 1e-12


@given(st.floats(0.01, 0.24))
@settings(max_examples=20, deadline=None)
def test_square_hull_gap_zero(r):
    dom = get_domain("unit-square", spacing=0.02)
    assert convex_hull_gap(dom, np.array([0.5, 0.0]), r).gap <= 1e-10


def test_parabola_hull_gap_below_bound():
    dom = get_domain("parabola", spacing=0.005)
    for r in (0.05, 0.1):
        w = estimate_modulus(dom, [2 * r])
        g = convex_hull_gap(dom, np.zeros(2), r)
        assert g.gap <= 2 * r * w.values[0] + g.resolution


def test_modulus_zero_on_convex():
    w = estimate_modulus(get_domain("unit-square", spacing=0.05), [0.05, 0.1])
    assert np.all(w.values <= 1e-12)


def test_flat_spot_x2_ratio_one():
    for r in (2.0**-3, 2.0**-6):
        fs = find_flat_spot(Polynomial((0.0, 0.0, 1.0)), r, 1.0)
        assert abs(fs.ratio - 1.0) < 1e-6


def test_flat_spot_piecewise_linear_zero_defect():
    phi = piecewise_linear([-1.0, 0.0, 1.0], [1.0, 0.0, 1.0])
    fs = find_flat_spot(phi, 0.1, 1.0)
    assert fs.defect <= 1e-12


def test_nonconvex_rejected():
    with pytest.raises(InputError):
        check_convex(lambda x: -x**2, 1.0, 0.01)


def test_total_variation_of_slope_x2():
    assert abs(total_variation_of_slope(Polynomial((0.0, 0.0, 1.0)), 1.0) - 4.0) < 1e-3


def test_enumeration_distinct_interior():
    qs = enumerate_rationals(200)
    fr = [Fraction(q).limit_denominator(10**6) if not isinstance(q, Fraction) else q for q in qs]
    assert len(set(fr)) == 200
    assert all(0 < q < 1 for q in fr)


def test_pathological_measure_small_K():
    curve = pathological_curve(256)
    for j in range(1, 8):
        m = second_derivative_measure(curve, j)
        assert m.count_nonnegative <= j and m.bound_holds


def test_pathological_curve_endpoints():
    c = pathological_curve(256)
    assert abs(float(c(np.array([0.0]))[0])) < 1e-12


@pytest.mark.parametrize("k", [3, 4, 5])
def test_decomposition_invariants(k):
    dom = get_domain("parabola", spacing=0.01)
    Q = boundary_cuboid(dom, dom.patches[0], 0.0, 0.2)
    dec = decompose_cuboid(dom, Q, k)
    chk = check_decomposition(dec, seed=0)
    assert chk.ok
    assert len(dec.boundary_cuboids) >= 2 ** k


def test_decomposition_rejects_small_k():
    dom = get_domain("parabola", spacing=0.01)
    Q = boundary_cuboid(dom, dom.patches[0], 0.0, 0.2)
    with pytest.raises(InputError):
        decompose_cuboid(dom, Q, 2)


def test_domain_round_trip(tmp_path):
    from nodal_atlas.geometry import PlanarDomain
    dom = get_domain("hexagon")
    dom.save(tmp_path / "d.json")
    back = PlanarDomain.load(tmp_path / "d.json")
    assert np.allclose(np.asarray(back.boundary), np.asarray(dom.boundary))
