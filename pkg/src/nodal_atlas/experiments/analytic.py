"""Drivers for frequency and doubling profiles, almost monotonicity and the
three-ball inequality.  Exact harmonic fields are integrated on the meshed
domain; P1 interpolants are reported alongside as diagnostics."""
from __future__ import annotations

import numpy as np

from ..doubling.audits import monotonicity_audit, three_ball_residual
from ..doubling.profiles import doubling_profile, dyadic_ladder, frequency_profile
from ..fem.coefficients import identity
from ..fem.fields import harmonic_combination, homogeneous_harmonic
from ..fem.mesh import mesh_domain
from ..fem.solve import solve_aharmonic
from ..geometry.presets import get_domain
from .common import geometry_budget, log, mesh_and_ops, pmap
from .report import Report

PROFILE_COLUMNS = ["center_x", "center_y", "r", "H", "D", "N_freq", "J", "N_doub", "flags"]
QUAD_TARGET = 1e-8


def _radii(cfg, default_max, default_count):
    r = cfg.radius_grid()
    return r if r is not None else dyadic_ladder(default_max, default_count)


def _profile_table(rep, name, fp, dp):
    t = rep.table(name, PROFILE_COLUMNS)
    for i, r in enumerate(fp.radii):
        flags = ";".join(f for f in (fp.flags[i], dp.flags[i] if dp is not None else "") if f)
        t.add(float(fp.center[0]), float(fp.center[1]), float(r), float(fp.H[i]), float(fp.D[i]),
              float(fp.N[i]), float(dp.J[i]) if dp is not None else float("nan"),
              float(dp.N[i]) if dp is not None else float("nan"), flags)
    return t


def _quad_tol(N, err):
    """Quadrature tolerance on N: the configured relative target, floored by
    the measured order-difference estimate."""
    return max(QUAD_TARGET * abs(float(N)), float(err) if np.isfinite(err) else 0.0)


# ----------------------------------------------------------------------------
# frequency
# ----------------------------------------------------------------------------
def run_frequency(cfg):
    rep = Report(cfg.to_dict())
    dom = cfg.build_domain()
    A = cfg.coefficient_field()
    mesh, _ = mesh_and_ops(dom, cfg.mesh_h, A)
    radii = _radii(cfg, 0.4, 6)
    center = np.asarray(cfg.param("center", [0.0, 0.0]), dtype=float)
    degrees = [int(n) for n in cfg.param("degrees", [1, 2, 3, 4, 5])]
    part = cfg.param("part", "im")
    tol = cfg.tol("frequency_abs", 1e-2)
    checks = rep.table("frequency_checks", ["case", "field", "r", "N", "target", "abs_err", "quad_tol",
                                            "log_residual"])
    mono = rep.table("frequency_monotonicity", ["case", "field", "pairs", "violations", "epsilon", "tolerance"])
    oracle_rows, mono_rows, mono_bad = [], [], 0
    worst, flagged, valid = 0.0, 0, {}

    def one(n):
        exact = homogeneous_harmonic(n, part, center)
        out = []
        for label, u in (("exact", exact), ("p1", exact.interpolate(mesh))):
            fp = frequency_profile(u, A, center, radii, mesh=mesh)
            dp = doubling_profile(u, A, center, radii, mesh=mesh)
            out.append((label, fp, dp))
        return out

    for n, cases in zip(degrees, pmap(one, degrees)):
        for label, fp, dp in cases:
            case = f"{part}-z{n}-{label}"
            _profile_table(rep, f"profile_{case}", fp, dp)
            for i, r in enumerate(fp.radii):
                err = abs(fp.N[i] - n)
                row = checks.add(case, label, float(r), float(fp.N[i]), n, err, _quad_tol(fp.N[i], fp.errors[i]),
                                 float(fp.log_residual[i]))
                if label == "exact":
                    if fp.flags[i]:
                        flagged += 1
                        continue
                    oracle_rows.append(row)
                    valid[n] = valid.get(n, 0) + 1
                    worst = max(worst, err)
            qt = 10 * max(_quad_tol(fp.N[i], fp.errors[i]) for i in range(len(fp.radii)))
            ma = monotonicity_audit(fp, gamma=A.gamma, tol=qt)
            row = mono.add(case, label, ma.pairs, len(ma.violations), ma.epsilon, ma.tolerance)
            if label == "exact":
                mono_rows.append(row)
                mono_bad += len(ma.violations)
    # radii flagged degenerate-H carry no N; every degree still needs two radii
    covered = all(valid.get(n, 0) >= 2 for n in degrees)
    rep.check("frequency.oracle", covered and worst <= tol, worst, tol, "frequency_checks", oracle_rows,
              f"max |N(r) - n| for exact homogeneous fields ({flagged} degenerate radii omitted)")
    rep.check("frequency.monotone", mono_bad == 0, mono_bad, 0, "frequency_monotonicity", mono_rows,
              "monotonicity violations beyond ten times the quadrature tolerance")
    p1 = [r for r in checks.rows if r[1] == "p1"]
    rep.info["p1_max_abs_err"] = float(max(r[5] for r in p1)) if p1 else float("nan")
    rep.error_budget = {"geometry": geometry_budget(dom, mesh),
                        "quadrature": max(r[6] for r in checks.rows) if checks.rows else 0.0}
    return rep


# ----------------------------------------------------------------------------
# doubling
# ----------------------------------------------------------------------------
def _doubling_oracle(cfg, rep):
    tol = cfg.tol("doubling_abs", 1e-2)
    h = cfg.mesh_h
    radii = _radii(cfg, 0.4, 6)
    t = rep.table("doubling_oracle", ["case", "field", "center_x", "center_y", "r", "N", "target", "abs_err"])
    A = identity()
    cases = []
    disk = get_domain(cfg.param("interior_domain", "unit-disk"), spacing=h)
    for n in cfg.param("degrees", [1, 2, 3, 4, 5]):
        cases.append((disk, f"re-z{n}", homogeneous_harmonic(int(n), "re"), (2 * int(n) + 2) * np.log(2)))
    half = get_domain(cfg.param("boundary_domain", "half-disk"), spacing=h)
    cases.append((half, "y-flat-boundary", homogeneous_harmonic(1, "im"), 4 * np.log(2)))
    rows = {"exact-interior": [], "exact-boundary": []}
    worst = {"exact-interior": 0.0, "exact-boundary": 0.0}
    for dom, name, u, target in cases:
        mesh, _ = mesh_and_ops(dom, h, A)
        kind = "boundary" if name.startswith("y-") else "interior"
        for label, f in (("exact", u), ("p1", u.interpolate(mesh))):
            dp = doubling_profile(f, A, (0.0, 0.0), radii, mesh=mesh)
            _profile_table(rep, f"profile_{name}-{label}", frequency_profile(f, A, (0.0, 0.0), radii, mesh=mesh), dp)
            for r, N in zip(dp.radii, dp.N):
                row = t.add(name, label, 0.0, 0.0, float(r), float(N), float(target), abs(N - target))
                if label == "exact":
                    rows[f"exact-{kind}"].append(row)
                    worst[f"exact-{kind}"] = max(worst[f"exact-{kind}"], abs(N - target))
    rep.check("doubling.interior", worst["exact-interior"] <= tol, worst["exact-interior"], tol, "doubling_oracle",
              rows["exact-interior"], "max |N - (2n+2) log 2| for Re z^n at an interior centre")
    rep.check("doubling.boundary", worst["exact-boundary"] <= tol, worst["exact-boundary"], tol, "doubling_oracle",
              rows["exact-boundary"], "max |N - 4 log 2| for u = y at a flat boundary point")


def _odd_field(rng, anchor, angle, degree):
    """Random harmonic polynomial vanishing on the line through ``anchor``
    with direction ``angle``."""
    coeffs = [(0.0, 0.0)] + [(0.0, float(rng.normal())) for _ in range(degree)]
    return harmonic_combination(coeffs, anchor, angle)


def _monotone_gamma0(cfg, rep, rng):
    h = cfg.mesh_h
    R = float(cfg.param("R", 0.2))
    count = int(cfg.param("ladder_count", 5))
    radii = dyadic_ladder(R, count)
    fields_per = int(cfg.param("fields_per_center", 3))
    degree = int(cfg.param("max_degree", 5))
    t = rep.table("monotonicity_gamma0", ["domain", "center_x", "center_y", "field", "pairs", "epsilon",
                                          "quad_tol", "limit", "violations"])
    A = identity()
    cases = []
    for name in cfg.param("convex_domains", ["unit-square", "hexagon", "half-disk"]):
        dom = get_domain(name, spacing=h)
        for p in dom.patches:
            if any(getattr(p.phi, "coeffs", (1.0,))):
                continue
            cases.append((dom, np.asarray(p.anchor, dtype=float), p.angle))
            break
    square = get_domain("unit-square", spacing=h)
    corner = [(square, np.zeros(2), None)]
    rows, bad = [], 0
    for dom, x0, angle in cases + corner:
        mesh, _ = mesh_and_ops(dom, h, A)
        for j in range(fields_per):
            if angle is None:
                u, label = homogeneous_harmonic(2, "im"), "corner-2xy"
                if j:
                    break
            else:
                u, label = _odd_field(rng, x0, angle, degree), f"odd-random-{j}"
            dp = doubling_profile(u, A, x0, radii, mesh=mesh)
            ma = monotonicity_audit(dp, gamma=0.0)
            qt = max(_quad_tol(N, e) for N, e in zip(dp.N, dp.errors))
            limit = 10 * qt
            ok = ma.epsilon <= limit
            bad += not ok
            rows.append(t.add(dom.name, float(x0[0]), float(x0[1]), label, ma.pairs, ma.epsilon, qt, limit,
                              len(ma.violations)))
    rep.check("monotonicity.gamma0", bad == 0, bad, 0, "monotonicity_gamma0", rows,
              "boundary-centred dyadic ladders with epsilon above ten times the quadrature tolerance")


def _monotone_gamma(cfg, rep):
    A = cfg.coefficient_field()
    gamma = A.gamma
    t = rep.table("monotonicity_gamma", ["mesh_h", "R", "pairs", "epsilon", "quad_tol", "C_prime", "above_floor"])
    if gamma <= 0:
        return
    dom_name = cfg.param("gamma_domain", "half-disk")
    count = int(cfg.param("ladder_count", 5))
    Rs = [float(r) for r in cfg.param("R_values", [0.1, 0.2, 0.4])]
    hs = [float(v) for v in cfg.param("gamma_meshes", [cfg.mesh_h, cfg.mesh_h / 2])]
    rows, cps = [], []
    for h in hs:
        dom = get_domain(dom_name, spacing=h)
        mesh = mesh_domain(dom, h)
        u = solve_aharmonic(mesh, A, lambda p: p[:, 1])
        for R in Rs:
            dp = doubling_profile(u, A, (0.0, 0.0), dyadic_ladder(R, count), mesh=mesh)
            ma = monotonicity_audit(dp, gamma=gamma)
            qt = 10 * max(_quad_tol(N, e) for N, e in zip(dp.N, dp.errors))
            above = ma.epsilon > qt
            cp = ma.epsilon / (gamma * R)
            rows.append(t.add(h, R, ma.pairs, ma.epsilon, qt, cp, above))
            if above:
                cps.append(cp)
    factor = cfg.tol("C_prime_factor", 3.0)
    if len(cps) >= 2:
        spread = max(cps) / min(cps)
        rep.check("monotonicity.gamma", spread <= factor, spread, factor, "monotonicity_gamma", rows,
                  "max/min of eps/(gamma R) over radii and meshes")
    else:
        rep.check("monotonicity.gamma", True, len(cps), 2, "monotonicity_gamma", rows,
                  "fewer than two epsilon values exceed the quadrature floor", status="at-floor")


def run_doubling(cfg):
    rep = Report(cfg.to_dict())
    rng = np.random.default_rng(cfg.seed)
    checks = cfg.param("checks", ["oracle"])
    if "oracle" in checks:
        _doubling_oracle(cfg, rep)
    if "monotonicity" in checks:
        _monotone_gamma0(cfg, rep, rng)
        _monotone_gamma(cfg, rep)
    rep.error_budget = {"quad_target": QUAD_TARGET, "mesh_h": cfg.mesh_h}
    return rep


# ----------------------------------------------------------------------------
# three-ball inequality
# ----------------------------------------------------------------------------
def _three_ball_case(args):
    kind, mesh, u, c, radii, homogeneous = args
    from ..doubling.profiles import weighted_mass
    from ..fem.quadrature import BallContext
    ctx = BallContext(mesh, u, identity(), c)
    J = [weighted_mass(ctx, r) for r in radii]
    return [j.value for j in J], [j.error for j in J]


def run_three_ball(cfg):
    rep = Report(cfg.to_dict())
    rng = np.random.default_rng(cfg.seed)
    n_random = int(cfg.param("random_configs", 1000))
    n_homog = int(cfg.param("homogeneous_configs", 50))
    degree = int(cfg.param("max_degree", 6))
    h = cfg.mesh_h
    A = identity()
    disk = get_domain("unit-disk", spacing=h)
    half = get_domain("half-disk", spacing=h)
    mdisk, _ = mesh_and_ops(disk, h, A)
    mhalf, _ = mesh_and_ops(half, h, A)
    jobs = []
    for i in range(n_random + n_homog):
        homogeneous = i >= n_random
        boundary = bool(rng.integers(0, 2))
        if boundary:
            c = np.array([rng.uniform(-0.2, 0.2), 0.0])
            mesh = mhalf
        else:
            rho, th = 0.3 * np.sqrt(rng.uniform()), rng.uniform(0, 2 * np.pi)
            c = rho * np.array([np.cos(th), np.sin(th)])
            mesh = mdisk
        r3 = (1 - np.hypot(*c)) * rng.uniform(0.5, 0.95)
        if homogeneous:
            n = int(rng.integers(1, degree + 1))
            q = rng.uniform(0.2, 0.7)
            radii = (r3 * q * q, r3 * q, r3)
            u = homogeneous_harmonic(n, "im" if boundary else ["re", "im"][int(rng.integers(0, 2))], c)
            label = f"homogeneous-{n}"
        else:
            r1 = r3 * rng.uniform(0.05, 0.5)
            r2 = float(np.exp(rng.uniform(np.log(r1), np.log(r3))))
            r2 = min(max(r2, r1 * 1.05), r3 / 1.05)
            radii = (r1, r2, r3)
            coeffs = [(0.0, 0.0) if boundary else (float(rng.normal()), 0.0)]
            for _ in range(degree):
                coeffs.append((0.0 if boundary else float(rng.normal()), float(rng.normal())))
            u = harmonic_combination(coeffs, c)
            label = "random"
        jobs.append((("boundary" if boundary else "interior"), mesh, u, c, radii, homogeneous, label))
    log("three-ball", configs=len(jobs))
    res = pmap(lambda j: _three_ball_case(j[:6]), jobs)
    t = rep.table("three_ball", ["index", "kind", "field", "center_x", "center_y", "r1", "r2", "r3", "J1", "J2",
                                 "J3", "beta", "residual", "quad_rel"])
    rand_rows, hom_rows = [], []
    worst_neg, worst_hom = np.inf, 0.0
    for i, (job, (J, E)) in enumerate(zip(jobs, res)):
        kind, _, _, c, radii, homogeneous, label = job
        tb = three_ball_residual(*J, *radii, gamma=0.0, d=2)
        qrel = max(e / j for e, j in zip(E, J))
        row = t.add(i, kind, label, float(c[0]), float(c[1]), *map(float, radii), *map(float, J), tb.beta,
                    tb.residual, qrel)
        if homogeneous:
            hom_rows.append(row)
            worst_hom = max(worst_hom, abs(tb.residual))
        else:
            rand_rows.append(row)
            worst_neg = min(worst_neg, tb.residual)
    lo = -cfg.tol("three_ball_floor", 1e-6)
    rep.check("three_ball.random", worst_neg >= lo, worst_neg, lo, "three_ball", rand_rows,
              "minimum residual over random harmonic configurations")
    ht = cfg.tol("three_ball_homogeneous", 1e-8)
    rep.check("three_ball.homogeneous", worst_hom <= ht, worst_hom, ht, "three_ball", hom_rows,
              "max |residual| for homogeneous fields on geometric radii")
    rep.error_budget = {"geometry": {"disk": geometry_budget(disk, mdisk), "half_disk": geometry_budget(half, mhalf)},
                        "quadrature_rel": max(r[-1] for r in t.rows)}
    return rep

