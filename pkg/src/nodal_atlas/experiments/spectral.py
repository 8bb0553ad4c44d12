"""Drivers built on Dirichlet eigenmodes: eigenvalues, nodal scaling,
extension doubling and the drop / zero-free audit."""
from __future__ import annotations

import json

import numpy as np

from ..doubling.cuboid_index import drop_audit
from ..doubling.extension import extension_doubling, extension_residual
from ..errors import ConfigError
from ..fem.fields import square_mode
from ..fem.solve import align_to_reference
from ..geometry.decompose import boundary_cuboid
from ..nodal.extract import extract_nodal, nodal_domain_count, scaling_fit
from .common import (closed_form_spectrum, disk_mode, disk_nodal_length, geometry_budget, log,
                     pmap, spectrum, square_nodal_length, square_table)
from .report import Report, svg_overlay


def _new_report(cfg):
    return Report(cfg.to_dict())


def run_eigen(cfg):
    rep = _new_report(cfg)
    dom = cfg.build_domain()
    A = cfg.coefficient_field()
    mesh, ops, sol = spectrum(dom, cfg.mesh_h, A, cfg.mode_count)
    ref = closed_form_spectrum(cfg.domain_name, cfg.mode_count) if A.kind == "identity" else None
    t = rep.table("eigenvalues", ["index", "lambda_h", "lambda_exact", "rel_err", "residual"])
    for i, (lam, res) in enumerate(zip(sol.lambdas, sol.residuals)):
        ex = float(ref[i]) if ref is not None else float("nan")
        rel = abs(lam - ex) / ex if ref is not None else float("nan")
        t.add(i + 1, float(lam), ex, rel, float(res))
    rows = list(range(len(t.rows)))
    if ref is not None:
        errs = np.array(t.column("rel_err"))
        tol = cfg.tol("eigen_rel", 0.01)
        rep.check("eigen.rel_err", errs.max() <= tol, float(errs.max()), tol, "eigenvalues", rows,
                  "max relative eigenvalue error against the closed form")
    res_tol = cfg.tol("residual", 1e-8)
    rep.check("eigen.residual", float(sol.residuals.max()) <= res_tol, float(sol.residuals.max()), res_tol,
              "eigenvalues", rows, "relative algebraic residual |K v - lambda M v| / |lambda M v|")
    rep.error_budget = {"geometry": geometry_budget(dom, mesh), "solver_residual": float(sol.residuals.max())}
    return rep


# ----------------------------------------------------------------------------
# nodal lengths and scaling
# ----------------------------------------------------------------------------
def _cluster(lambdas, target, rel):
    """Indices of computed eigenvalues forming the cluster closest to ``target``."""
    k = int(np.argmin(np.abs(lambdas - target)))
    return [i for i in range(len(lambdas)) if abs(lambdas[i] - lambdas[k]) <= rel * lambdas[k]]


def _oracle_case(name, spec):
    """(exact lambda, exact nodal length, reference field) for a closed-form mode."""
    if name == "unit-square":
        m, n = (int(v) for v in spec)
        return np.pi**2 * (m * m + n * n), square_nodal_length(m, n), square_mode(m, n), f"({m},{n})"
    if name == "unit-disk":
        from scipy.special import jn_zeros
        k, m = (int(v) for v in spec[:2])
        part = spec[2] if len(spec) > 2 else "cos"
        return float(jn_zeros(k, m)[-1] ** 2), disk_nodal_length(k, m), disk_mode(k, m, part), f"({k},{m},{part})"
    raise ConfigError(f"no closed-form nodal oracle for domain {name!r}")


def run_nodal_scaling(cfg):
    rep = _new_report(cfg)
    dom = cfg.build_domain()
    A = cfg.coefficient_field()
    mesh, ops, sol = spectrum(dom, cfg.mesh_h, A, cfg.mode_count)
    K, M = ops
    t = rep.table("nodal_lengths", ["index", "lambda", "length", "length_over_sqrt_lambda", "components",
                                    "nodal_domains", "segments", "in_fit"])
    points, fit_rows, sets = [], [], {}

    def one(i):
        Z = extract_nodal(sol.fields[i])
        return Z, nodal_domain_count(sol.fields[i])

    results = pmap(one, range(len(sol.lambdas)))
    for i, (Z, nd) in enumerate(results):
        lam = float(sol.lambdas[i])
        L = Z.length
        row = t.add(i + 1, lam, L, L / np.sqrt(lam), Z.component_count, nd, len(Z), L > 0)
        sets[i] = Z
        if L > 0:
            points.append((lam, L))
            fit_rows.append(row)
    dropped = len(sol.lambdas) - len(points)
    info = {"dropped_zero_length": dropped}
    window = cfg.param("alpha_window", [0.45, 0.6])
    checks = cfg.param("checks", ["scaling", "bounded", "courant"])
    if "scaling" in checks and len(points) >= 2:
        fit = scaling_fit(points)
        d = fit.to_dict()
        d["dropped"] = dropped
        rep.files["scaling.json"] = json.dumps(d, indent=2, sort_keys=True) + "\n"
        info["fit"] = {"C": fit.C, "alpha": fit.alpha, "residual": fit.residual}
        rep.check("scaling.alpha", window[0] <= fit.alpha <= window[1], fit.alpha, window, "nodal_lengths",
                  fit_rows, "least-squares exponent of length ~ C lambda^alpha")
    if "bounded" in checks and len(points) >= 3:
        ratio = np.array([L / np.sqrt(lam) for lam, L in points])
        cut = (2 * len(ratio)) // 3
        lower, upper = float(ratio[:cut].max()), float(ratio[cut:].max())
        factor = cfg.tol("bounded_factor", 1.5)
        rep.check("scaling.bounded", upper <= factor * lower, upper, factor * lower, "nodal_lengths", fit_rows,
                  "max length/sqrt(lambda) over the top third vs factor times the max over the rest")
    if "courant" in checks:
        upto = min(len(results), int(cfg.param("courant_upto", 20)))
        nd = np.array([results[i][1] for i in range(upto)])
        bad = [i for i in range(upto) if nd[i] > i + 1]
        rep.check("nodal.courant", not bad, int(len(bad)), 0, "nodal_lengths", list(range(upto)),
                  "modes whose vertex-sign nodal domain count exceeds their index")
    oracle = cfg.param("oracle", [])
    if oracle:
        _nodal_oracle(cfg, rep, dom, mesh, sol, M, oracle)
    show = [i for i in cfg.param("figures", [len(sol.lambdas) - 1]) if 0 <= i < len(sol.lambdas)]
    for i in show:
        rep.svgs[f"nodal_mode{i + 1}.svg"] = svg_overlay(dom, sets[i].segments)
        rep.tables[f"nodal_set_mode{i + 1}"] = _segments_table(sets[i])
    rep.info.update(info)
    rep.error_budget = {"geometry": geometry_budget(dom, mesh), "solver_residual": float(sol.residuals.max()),
                        "nodal_snap": 1e-9}
    return rep


def _segments_table(Z):
    from .report import Table
    t = Table(["x1", "y1", "x2", "y2", "triangle_id"])
    for (a, b), tid in zip(Z.segments, Z.triangle_ids):
        t.add(float(a[0]), float(a[1]), float(b[0]), float(b[1]), int(tid))
    return t


def _nodal_oracle(cfg, rep, dom, mesh, sol, M, oracle):
    t = rep.table("nodal_oracle", ["mode", "lambda_exact", "eigenspace", "length_exact", "length_h", "rel_err"])
    tol = cfg.tol("nodal_rel", 0.025)
    rows, worst = [], 0.0
    for spec in oracle:
        lam, L, ref, label = _oracle_case(cfg.domain_name, spec)
        idx = _cluster(sol.lambdas, lam, cfg.tol("cluster_rel", 1e-3))
        if abs(sol.lambdas[idx[0]] - lam) > cfg.tol("oracle_match", 0.02) * lam:
            raise ConfigError(f"mode {label} (lambda = {lam:.6g}) is not among the {len(sol.lambdas)} computed "
                              "modes; raise mode_count")
        u = align_to_reference(sol, idx, ref.interpolate(mesh).values, M)
        Z = extract_nodal(u)
        rel = abs(Z.length - L) / L
        worst = max(worst, rel)
        rows.append(t.add(label, lam, "+".join(str(i + 1) for i in idx), L, Z.length, rel))
        rep.svgs[f"nodal_oracle_{label.strip('()').replace(',', '_')}.svg"] = svg_overlay(dom, Z.segments)
        rep.tables[f"nodal_set_{label.strip('()').replace(',', '_')}"] = _segments_table(Z)
    rep.check("nodal.oracle", worst <= tol, worst, tol, "nodal_oracle", rows,
              "relative nodal length error against closed-form modes")


# ----------------------------------------------------------------------------
# extension doubling index
# ----------------------------------------------------------------------------
def run_extension(cfg):
    rep = _new_report(cfg)
    dom = cfg.build_domain()
    A = cfg.coefficient_field()
    mesh, ops, sol = spectrum(dom, cfg.mesh_h, A, cfg.mode_count)
    x0 = np.asarray(cfg.param("center", [0.5, 0.0]), dtype=float)
    t0 = float(cfg.param("t0", 0.0))
    r = float(cfg.param("r", 0.15))
    nodes = int(cfg.param("nodes", 64))
    t = rep.table("extension", ["index", "lambda", "J", "J2", "N", "truncation", "pde_residual"])

    def one(i):
        e = extension_doubling(sol.fields[i], float(sol.lambdas[i]), A, (x0, t0), r, nodes, mesh)
        return e, extension_residual(mesh, A, sol.fields[i].values, float(sol.lambdas[i]), ops)

    results = pmap(one, range(len(sol.lambdas)))
    pts, rows = [], []
    for i, (e, res) in enumerate(results):
        rows.append(t.add(i + 1, float(sol.lambdas[i]), e.J, e.J2, e.N, e.truncation, res))
        if e.N > 0:
            pts.append((float(sol.lambdas[i]), e.N))
    window = cfg.param("exponent_window", [0.4, 0.6])
    fit = scaling_fit(pts)
    rep.files["extension_fit.json"] = json.dumps(fit.to_dict(), indent=2, sort_keys=True) + "\n"
    rep.info["fit"] = {"C": fit.C, "alpha": fit.alpha, "residual": fit.residual}
    rep.check("extension.exponent", window[0] <= fit.alpha <= window[1], fit.alpha, window, "extension", rows,
              "least-squares exponent of N ~ C lambda^alpha")
    trunc = max(e.truncation for e, _ in results)
    rep.error_budget = {"geometry": geometry_budget(dom, mesh), "t_truncation": trunc,
                        "pde_residual": max(r for _, r in results)}
    return rep


# ----------------------------------------------------------------------------
# drop / zero-free audit
# ----------------------------------------------------------------------------
def run_drop_audit(cfg):
    rep = _new_report(cfg)
    dom = cfg.build_domain()
    A = cfg.coefficient_field()
    modes = [int(m) for m in cfg.param("modes", [2, 3, 4, 5, 6])]
    mesh, ops, sol = spectrum(dom, cfg.mesh_h, A, max(max(modes), cfg.mode_count))
    patch_index = int(cfg.cuboid.get("patch", 0))
    positions = [float(s) for s in cfg.cuboid.get("positions", [-0.3, -0.1, 0.1, 0.3])]
    side = float(cfg.cuboid.get("side", 0.08))
    k = int(cfg.cuboid.get("k", 4))
    N0 = float(cfg.param("N", 3.0))
    density = tuple(cfg.param("density", [9, 5]))
    sub = tuple(cfg.param("sub_density", [3, 3]))
    patch = dom.patches[patch_index]
    cases = [(m, s) for m in modes for s in positions]

    def one(case):
        m, s = case
        Q = boundary_cuboid(dom, patch, s, side)
        log("drop-audit", mode=m, s=s)
        return Q, drop_audit(sol.fields[m - 1], A, Q, k, N0, dom, density, sub, mesh)

    results = pmap(one, cases)
    detail = rep.table("drop_audit", ["config", "mode", "s_center", "q", "center_x", "center_y", "side", "N_star_q",
                                      "ratio", "zero_free", "min_abs", "rho"])
    summ = rep.table("drop_summary", ["config", "mode", "s_center", "N_star_Q", "branch", "drop_witnessed",
                                      "zero_free_witnessed", "zero_free_count", "boundary_cuboids",
                                      "ratio_min", "ratio_median", "ratio_max"])
    eligible, hits, complete = [], 0, True
    cuboids = []
    for c, ((m, s), (Q, da)) in enumerate(zip(cases, results)):
        for r in da.rows:
            detail.add(c, m, s, r["index"], r["center_x"], r["center_y"], r["side"], r["N_star"], r["ratio"],
                       r["zero_free"], r["min_abs"], r["rho"])
        sm = da.summary()
        row = summ.add(c, m, s, sm["N_star_Q"], sm["branch"], sm["drop_witnessed"], sm["zero_free_witnessed"],
                       sm["zero_free_count"], sm["boundary_cuboids"], sm["ratio_min"], sm["ratio_median"],
                       sm["ratio_max"])
        complete &= len(da.rows) == 2**k
        if sm["N_star_Q"] <= N0:
            eligible.append(row)
            hits += bool(sm["zero_free_witnessed"])
        cuboids.append(Q)
    rep.check("drop.tables_complete", complete, len(detail.rows), len(cases) * 2**k, "drop_audit",
              list(range(len(detail.rows))), "one row per boundary cuboid of every configuration")
    frac = hits / len(eligible) if eligible else float("nan")
    need = cfg.tol("zero_free_fraction", 0.9)
    rep.check("drop.zero_free_fraction", bool(eligible) and frac >= need, frac, need, "drop_summary", eligible,
              f"fraction of configurations with N*(Q) <= {N0:g} that show a zero-free boundary cuboid")
    rep.info["eligible_configurations"] = len(eligible)
    rep.svgs["drop_cuboids.svg"] = svg_overlay(dom, None, cuboids)
    rep.error_budget = {"geometry": geometry_budget(dom, mesh), "sample_density": list(density),
                        "sub_density": list(sub)}
    return rep
