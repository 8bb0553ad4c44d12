"""Drivers for the purely geometric results: flat spots, convex-hull gaps,
the pathological curve and cuboid decompositions."""
from __future__ import annotations

import numpy as np

from ..geometry.curves import CircleArc, Polynomial, piecewise_linear
from ..geometry.decompose import boundary_cuboid, check_decomposition, decompose_cuboid
from ..geometry.flatspot import find_flat_spot, total_variation_of_slope
from ..geometry.hull import convex_hull_gap
from ..geometry.modulus import estimate_modulus
from ..geometry.pathological import second_derivative_measure
from ..geometry.presets import _cached_curve, get_domain
from .common import geometry_budget, pmap
from .report import Report, svg_overlay

FLATSPOT_FUNCTIONS = {
    "x^2": lambda: Polynomial((0.0, 0.0, 1.0)),
    "abs": lambda: piecewise_linear([-1.0, 0.0, 1.0], [1.0, 0.0, 1.0]),
    "piecewise-linear": lambda: piecewise_linear([-1.0, -0.5, 0.1, 0.6, 1.0], [1.2, 0.3, 0.0, 0.2, 0.9]),
    "circle": lambda: CircleArc(2.0),
    "x^4": lambda: Polynomial((0.0, 0.0, 0.0, 0.0, 1.0)),
}


def run_flatspot(cfg):
    rep = Report(cfg.to_dict())
    a = float(cfg.param("a", 1.0))
    names = cfg.param("functions", list(FLATSPOT_FUNCTIONS))
    radii = [2.0**-j for j in range(int(cfg.param("j_min", 3)), int(cfg.param("j_max", 10)) + 1)]
    slack = cfg.tol("bound_slack", 1.25)
    t = rep.table("flat_spots", ["function", "r", "base", "slope", "defect", "ratio", "tv_slope", "bound"])
    over, rows, x2_rows, x2_err = 0, [], [], 0.0
    jobs = [(n, r) for n in names for r in radii]

    def one(job):
        n, r = job
        phi = FLATSPOT_FUNCTIONS[n]()
        return find_flat_spot(phi, r, a), total_variation_of_slope(phi, a)

    for (n, r), (fs, tv) in zip(jobs, pmap(one, jobs)):
        bound = slack * 2 * tv / a
        row = t.add(n, r, fs.base, fs.plane.slope, fs.defect, fs.ratio, tv, bound)
        rows.append(row)
        over += fs.ratio > bound
        if n == "x^2":
            x2_rows.append(row)
            x2_err = max(x2_err, abs(fs.ratio - 1.0))
    rep.check("flatspot.uniform", over == 0, over, 0, "flat_spots", rows,
              "ratios defect/r^2 above the per-function bound 2 TV(phi')/a (with grid slack)")
    if x2_rows:
        tol = cfg.tol("x2_ratio", 1e-6)
        rep.check("flatspot.x2", x2_err <= tol, x2_err, tol, "flat_spots", x2_rows, "|ratio - 1| for phi = x^2")
    return rep


def _patch_anchors(dom, spacing):
    pts, _, _ = dom.sample_boundary(spacing)
    keep = np.zeros(len(pts), dtype=bool)
    for p in dom.patches:
        s, t = p.to_local(pts)
        keep |= (np.abs(s) <= p.half_width) & (np.abs(t - p.phi(s)) <= 1e-9 + spacing)
    return pts[keep]


def run_hull(cfg):
    rep = Report(cfg.to_dict())
    radii = [float(r) for r in cfg.param("radii", [0.05, 0.1, 0.2])]
    t = rep.table("hull_gaps", ["domain", "x", "y", "r", "gap", "omega_2r", "bound", "resolution"])
    qdom = cfg.build_domain()
    x = np.asarray(cfg.param("point", [0.0, 0.0]), dtype=float)
    omega = estimate_modulus(qdom, [2 * r for r in radii], anchors=_patch_anchors(qdom, cfg.mesh_h))
    rows, bad = [], 0
    for r, w in zip(radii, omega.values):
        g = convex_hull_gap(qdom, x, r)
        bound = 2 * r * w
        rows.append(t.add(qdom.name, float(x[0]), float(x[1]), r, g.gap, float(w), bound, g.resolution))
        bad += g.gap > bound + g.resolution
    rep.check("hull.quasiconvex", bad == 0, bad, 0, "hull_gaps", rows, "gaps above 2 r omega(2r) + resolution")
    crow, worst = [], 0.0
    for name in cfg.param("convex_domains", ["unit-square", "unit-disk", "hexagon", "half-disk"]):
        dom = get_domain(name, spacing=cfg.mesh_h)
        verts = np.asarray(dom.boundary)
        step = max(1, len(verts) // 4)
        a, b = dom.edges()
        pts = np.vstack([verts[::step], 0.5 * (a + b)[::step]])
        for p in pts:
            for r in radii:
                if r >= dom.r0 / 2:
                    continue
                g = convex_hull_gap(dom, p, r)
                crow.append(t.add(name, float(p[0]), float(p[1]), r, g.gap, 0.0, 0.0, g.resolution))
                worst = max(worst, g.gap)
    tol = cfg.tol("convex_gap", 1e-10)
    rep.check("hull.convex", worst <= tol, worst, tol, "hull_gaps", crow, "max gap on convex presets")
    rep.error_budget = {"geometry": geometry_budget(qdom)}
    return rep


def run_pathological(cfg):
    rep = Report(cfg.to_dict())
    K = int(cfg.param("K", 4096))
    enumeration = cfg.param("enumeration", "stern-brocot")
    curve = _cached_curve(K, enumeration)
    t = rep.table("second_derivative", ["level", "intervals", "nonnegative", "bound", "holds", "min_mass",
                                        "max_mass"])
    rows, bad = [], 0
    for j in range(1, int(cfg.param("max_level", 12)) + 1):
        m = second_derivative_measure(curve, j)
        rows.append(t.add(j, 2**j, m.count_nonnegative, j, m.bound_holds, float(m.masses.min()),
                          float(m.masses.max())))
        bad += not m.bound_holds
    rep.check("pathological.measure", bad == 0, bad, 0, "second_derivative", rows,
              "levels j whose count of dyadic intervals with nonnegative phi'' mass exceeds j")
    dom = get_domain("pathological", spacing=cfg.mesh_h, K=K, enumeration=enumeration)
    radii = [float(r) for r in cfg.param("modulus_radii", [0.01, 0.02, 0.05, 0.1, 0.2])]
    anchors = _patch_anchors(dom, cfg.mesh_h)
    w = estimate_modulus(dom, radii, anchors=anchors)
    mt = rep.table("modulus", ["r", "omega", "bound", "holds", "worst_x", "worst_y"])
    mrows, mbad = [], 0
    for r, v, xw in zip(radii, w.values, w.worst_anchor):
        ok = v <= 2 * r + 1e-12
        mrows.append(mt.add(r, float(v), 2 * r, ok, float(xw[0]), float(xw[1])))
        mbad += not ok
    rep.check("pathological.modulus", mbad == 0, mbad, 0, "modulus", mrows, "radii with omega(r) > 2r")
    rep.info["tail_mass"] = curve.tail_mass
    rep.svgs["pathological.svg"] = svg_overlay(dom)
    rep.error_budget = {"geometry": geometry_budget(dom), "tail_mass": curve.tail_mass}
    return rep


def run_decompose(cfg):
    rep = Report(cfg.to_dict())
    dom = cfg.build_domain()
    specs = cfg.cuboid.get("cuboids", [{"patch": 0, "s": 0.0, "side": 0.2}])
    levels = [int(k) for k in cfg.cuboid.get("levels", [3, 4, 5])]
    t = rep.table("decompositions", ["cuboid", "center_x", "center_y", "side", "k", "boundary", "interior",
                                     "max_column", "distance_ratio", "coverage", "ok"])
    rows, bad, figs = [], 0, []
    for i, spec in enumerate(specs):
        patch = dom.patches[int(spec.get("patch", 0))]
        Q = boundary_cuboid(dom, patch, float(spec.get("s", 0.0)), float(spec["side"]))
        for k in levels:
            dec = decompose_cuboid(dom, Q, k)
            chk = check_decomposition(dec, seed=cfg.seed)
            rows.append(t.add(i, float(Q.center[0]), float(Q.center[1]), Q.side, k, len(dec.boundary_cuboids),
                              len(dec.interior_cuboids), chk.max_column, chk.min_interior_distance_ratio,
                              chk.coverage_ok, chk.ok))
            bad += not chk.ok
            if k == levels[0]:
                figs += [Q] + dec.boundary_cuboids + dec.interior_cuboids
    rep.check("decompose.invariants", bad == 0, bad, 0, "decompositions", rows,
              "decompositions failing a count, column, distance or coverage invariant")
    rep.svgs["decomposition.svg"] = svg_overlay(dom, None, figs)
    return rep
