"""Experiment registry, dry-run planning and the aggregate report."""
from __future__ import annotations

import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from .analytic import run_doubling, run_frequency, run_three_ball
from .cauchy import run_cauchy
from .common import log
from .config import ExperimentConfig, shipped_config, shipped_config_dir
from .geometric import run_decompose, run_flatspot, run_hull, run_pathological
from .report import Report
from .spectral import run_drop_audit, run_eigen, run_extension, run_nodal_scaling


def _mesh_estimate(cfg):
    dom = cfg.build_domain()
    area = abs(float(dom.signed_area()))
    tri = area / (np.sqrt(3) / 4 * cfg.mesh_h**2)
    return {"domain": dom.name, "area": area, "approx_triangles": int(tri), "approx_vertices": int(tri / 2)}


def _plan_spectral(cfg):
    return {**_mesh_estimate(cfg), "modes": cfg.mode_count}


def _plan_frequency(cfg):
    r = cfg.radius_grid()
    n = len(cfg.param("degrees", [1, 2, 3, 4, 5]))
    return {**_mesh_estimate(cfg), "profiles": 2 * n, "radii": 6 if r is None else len(r)}


def _plan_doubling(cfg):
    return {"checks": cfg.param("checks", ["oracle"]), "mesh_h": cfg.mesh_h}


def _plan_three_ball(cfg):
    return {"configurations": int(cfg.param("random_configs", 1000)) + int(cfg.param("homogeneous_configs", 50)),
            "integrals": 3 * (int(cfg.param("random_configs", 1000)) + int(cfg.param("homogeneous_configs", 50)))}


def _plan_flatspot(cfg):
    j = int(cfg.param("j_max", 10)) - int(cfg.param("j_min", 3)) + 1
    return {"functions": len(cfg.param("functions", [1] * 5)), "radii": j}


def _plan_geometry(cfg):
    return _mesh_estimate(cfg)


def _plan_pathological(cfg):
    return {"K": int(cfg.param("K", 4096)), "levels": int(cfg.param("max_level", 12))}


def _plan_drop(cfg):
    modes = cfg.param("modes", [2, 3, 4, 5, 6])
    pos = cfg.cuboid.get("positions", [-0.3, -0.1, 0.1, 0.3])
    k = int(cfg.cuboid.get("k", 4))
    return {**_mesh_estimate(cfg), "configurations": len(modes) * len(pos), "subcuboids": len(modes) * len(pos) * 2**k}


def _plan_report(cfg):
    plans = {}
    for entry in cfg.param("experiments", []):
        sub = load_config(entry)
        plans[sub.name] = {"experiment": experiment_kind(sub), **REGISTRY[experiment_kind(sub)][1](sub)}
    return {"experiments": plans}


def run_report(cfg, out_dir=None):
    """Run a list of shipped (or file) configs and aggregate their items."""
    rep = Report(cfg.to_dict())
    t = rep.table("report_items", ["experiment", "item", "passed", "status", "value", "threshold"])
    budget = {}
    for entry in cfg.param("experiments", []):
        sub = load_config(entry)
        r = run_experiment(sub)
        if out_dir is not None:
            r.write(Path(out_dir) / sub.name)
        rows = []
        for it in r.items:
            rows.append(t.add(sub.name, it.id, it.passed, it.status or ("pass" if it.passed else "fail"),
                              str(it.value), str(it.threshold)))
        rep.check(f"{sub.name}", r.passed, sum(i.passed for i in r.items), len(r.items), "report_items", rows,
                  f"all items of {sub.name}")
        budget[sub.name] = r.error_budget
    rep.error_budget = budget
    return rep


REGISTRY = {
    "eigen": (run_eigen, _plan_spectral),
    "nodal-scaling": (run_nodal_scaling, _plan_spectral),
    "frequency": (run_frequency, _plan_frequency),
    "doubling": (run_doubling, _plan_doubling),
    "three-ball": (run_three_ball, _plan_three_ball),
    "flatspot": (run_flatspot, _plan_flatspot),
    "hull": (run_hull, _plan_geometry),
    "pathological": (run_pathological, _plan_pathological),
    "decompose": (run_decompose, _plan_geometry),
    "drop-audit": (run_drop_audit, _plan_drop),
    "extension": (run_extension, _plan_spectral),
    "cauchy": (run_cauchy, _plan_geometry),
    "report": (run_report, _plan_report),
}


def experiment_kind(cfg):
    """Registered experiment a config belongs to: params.experiment, else the
    config name itself, else the longest registered prefix of the name."""
    kind = cfg.param("experiment")
    if kind is None:
        kind = cfg.name if cfg.name in REGISTRY else None
    if kind is None:
        cands = [k for k in REGISTRY if cfg.name.startswith(k + "-")]
        kind = max(cands, key=len) if cands else None
    if kind not in REGISTRY:
        raise ConfigError(f"config {cfg.name!r} names no registered experiment; registered: {sorted(REGISTRY)}")
    return kind


def load_config(entry):
    """A shipped config name or a path to a JSON config."""
    if isinstance(entry, ExperimentConfig):
        return entry
    p = Path(entry)
    if p.suffix == ".json":
        return ExperimentConfig.load(p)
    if (shipped_config_dir() / f"{entry}.json").exists():
        return shipped_config(entry)
    raise ConfigError(f"no shipped config named {entry!r}")


def run_experiment(cfg, dry_run=False, out_dir=None, kind=None):
    kind = kind or experiment_kind(cfg)
    if kind not in REGISTRY:
        raise ConfigError(f"unknown experiment {kind!r}; registered: {sorted(REGISTRY)}")
    driver, plan = REGISTRY[kind]
    if dry_run:
        rep = Report(cfg.to_dict())
        rep.info["dry_run"] = True
        rep.info["plan"] = plan(cfg)
        log("dry-run", experiment=kind, config=cfg.name)
        return rep
    log("start", experiment=kind, config=cfg.name)
    t0 = time.perf_counter()
    rep = run_report(cfg, out_dir=out_dir) if kind == "report" else driver(cfg)
    log("done", experiment=kind, config=cfg.name, passed=rep.passed, seconds=round(time.perf_counter() - t0, 3))
    for it in rep.items:
        log("item", id=it.id, passed=it.passed, status=it.status or ("pass" if it.passed else "fail"))
    return rep


def with_output(cfg, out):
    return replace(cfg, output_dir=str(out))
