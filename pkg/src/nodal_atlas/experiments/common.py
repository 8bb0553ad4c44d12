"""Shared plumbing for experiment drivers: logging, parallel maps, cached
meshes and eigen-solves, closed-form reference data."""
from __future__ import annotations

import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.special import jn_zeros, jv

from ..fem.assemble import assemble
from ..fem.fields import AnalyticField
from ..fem.mesh import mesh_domain
from ..fem.solve import solve_eigs

LOGGER = logging.getLogger("nodal_atlas")
_CACHE = {}
_CACHE_LIMIT = 6


class KeyValueFormatter(logging.Formatter):
    def format(self, record):
        fields = {"level": record.levelname.lower(), "event": record.getMessage()}
        fields.update(getattr(record, "kv", {}))
        return " ".join(f"{k}={_kv(v)}" for k, v in fields.items())


def _kv(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    s = str(v)
    return json.dumps(s) if (" " in s or "=" in s or not s) else s


def setup_logging(level=logging.INFO):
    if not any(getattr(h, "_nodal_atlas", False) for h in LOGGER.handlers):
        h = logging.StreamHandler(sys.stderr)
        h.setFormatter(KeyValueFormatter())
        h._nodal_atlas = True
        LOGGER.addHandler(h)
    LOGGER.setLevel(level)
    LOGGER.propagate = False


def log(event, **kv):
    LOGGER.info(event, extra={"kv": kv})


def thread_count():
    try:
        return max(1, int(os.environ.get("NODAL_ATLAS_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn, items):
    """Ordered map, parallel over at most NODAL_ATLAS_THREADS threads."""
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# ----------------------------------------------------------------------------
# meshes and spectra (cached per process)
# ----------------------------------------------------------------------------
def _key(domain, h, A, extra=()):
    return (json.dumps(domain.to_dict(), sort_keys=True, default=str), float(h),
            json.dumps(A.to_dict(), sort_keys=True), extra)


def _remember(key, value):
    if len(_CACHE) >= _CACHE_LIMIT:
        _CACHE.pop(next(iter(_CACHE)))
    _CACHE[key] = value
    return value


def mesh_and_ops(domain, h, A):
    key = _key(domain, h, A, "ops")
    if key not in _CACHE:
        mesh = mesh_domain(domain, h)
        _remember(key, (mesh, assemble(mesh, A)))
    return _CACHE[key]


def spectrum(domain, h, A, count):
    """(mesh, ops, EigenSolution) with at least ``count`` modes."""
    mesh, ops = mesh_and_ops(domain, h, A)
    key = _key(domain, h, A, "eigs")
    have = _CACHE.get(key)
    if have is None or len(have.lambdas) < count:
        log("eigen-solve", domain=domain.name, h=h, count=count, vertices=mesh.n_vertices)
        have = _remember(key, solve_eigs(mesh, A, count, ops))
    sol = have
    if len(sol.lambdas) > count:
        from ..fem.solve import EigenSolution
        sol = EigenSolution(sol.lambdas[:count], sol.fields[:count], sol.residuals[:count])
    return mesh, ops, sol


def clear_cache():
    _CACHE.clear()


# ----------------------------------------------------------------------------
# closed forms
# ----------------------------------------------------------------------------
def square_table(count):
    """First ``count`` Dirichlet modes of the unit square: (lambda, m, n),
    ordered by lambda then (m, n)."""
    k = int(np.ceil(np.sqrt(count))) + 6
    rows = sorted((np.pi**2 * (m * m + n * n), m, n) for m in range(1, k) for n in range(1, k))
    return rows[:count]


def square_nodal_length(m, n):
    return float(m + n - 2)


def disk_table(count):
    """First ``count`` Dirichlet modes of the unit disk as (lambda, k, m, part);
    angular index k >= 1 appears twice (cos and sin)."""
    rows = []
    kmax = count + 2
    for k in range(0, kmax):
        zs = jn_zeros(k, count + 2)
        for m, z in enumerate(zs, start=1):
            parts = ("cos",) if k == 0 else ("cos", "sin")
            for p in parts:
                rows.append((float(z * z), k, m, p))
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    return rows[:count]


def disk_nodal_length(k, m):
    """k diameters plus m-1 nodal circles of radius j_{k,i}/j_{k,m}."""
    zs = jn_zeros(k, m)
    return float(2 * k + 2 * np.pi * np.sum(zs[:-1] / zs[-1]))


def disk_mode(k, m, part="cos"):
    z = jn_zeros(k, m)[-1]

    def val(p):
        rho = np.hypot(p[:, 0], p[:, 1])
        th = np.arctan2(p[:, 1], p[:, 0])
        ang = np.cos(k * th) if part == "cos" else np.sin(k * th)
        return jv(k, z * np.minimum(rho, 1.0)) * ang

    return AnalyticField(val, None, f"disk-mode({k},{m},{part})")


def closed_form_spectrum(domain_name, count):
    if domain_name == "unit-square":
        return np.array([r[0] for r in square_table(count)])
    if domain_name == "unit-disk":
        return np.array([r[0] for r in disk_table(count)])
    return None


def geometry_budget(domain, mesh=None):
    out = {"hausdorff": float(domain.hausdorff or 0.0)}
    if mesh is not None:
        out.update({"h": float(mesh.h), "vertices": int(mesh.n_vertices), "triangles": int(mesh.n_triangles)})
    return out
