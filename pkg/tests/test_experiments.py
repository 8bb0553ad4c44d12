import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import jn_zeros

from nodal_atlas.errors import ConfigError
from nodal_atlas.experiments.cauchy import constrained_max
from nodal_atlas.experiments.cli import main
from nodal_atlas.experiments.common import (disk_nodal_length, disk_table, pmap, square_nodal_length,
                                            square_table)
from nodal_atlas.experiments.config import ExperimentConfig, shipped_config, shipped_config_dir
from nodal_atlas.experiments.runner import REGISTRY, experiment_kind, run_experiment

SHIPPED = sorted(p.stem for p in shipped_config_dir().glob("*.json"))


def test_square_table_matches_brute_force():
    pairs = sorted((np.pi**2 * (m * m + n * n), m, n) for m in range(1, 15) for n in range(1, 15))
    got = square_table(20)
    assert np.allclose([g[0] for g in got], [p[0] for p in pairs[:20]])


def test_disk_table_matches_bessel_zeros():
    lam = sorted([j**2 for j in jn_zeros(0, 5)] + [j**2 for k in range(1, 8) for j in jn_zeros(k, 5)] * 2)
    got = [row[0] for row in disk_table(15)]
    assert np.allclose(got, lam[:15], rtol=1e-12)


def test_closed_form_nodal_lengths():
    assert square_nodal_length(2, 1) == 1 and square_nodal_length(3, 3) == 4
    # disk mode (1,1): one diameter
    assert abs(disk_nodal_length(1, 1) - 2.0) < 1e-12
    # radial mode (0,2): one circle of radius j01/j02
    j = jn_zeros(0, 2)
    assert abs(disk_nodal_length(0, 2) - 2 * np.pi * j[0] / j[1]) < 1e-12


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_configs_resolve(name):
    cfg = shipped_config(name)
    assert experiment_kind(cfg) in REGISTRY


@pytest.mark.parametrize("name", SHIPPED)
def test_dry_run_plans(name):
    cfg = shipped_config(name)
    rep = run_experiment(cfg, dry_run=True)
    assert rep.info["dry_run"] and rep.items == [] and isinstance(rep.info["plan"], dict)


def test_config_round_trip(tmp_path):
    cfg = shipped_config("hull")
    cfg.save(tmp_path / "c.json")
    assert ExperimentConfig.load(tmp_path / "c.json").to_dict() == cfg.to_dict()


@pytest.mark.parametrize("patch", [
    {"mesh_h": -1.0}, {"coefficients": {"preset": "nope"}}, {"domain": "nowhere"},
    {"tolerances": {"x": -1}}, {"mode_count": 0},
])
def test_invalid_configs(patch):
    d = shipped_config("flatspot").to_dict()
    d.update(patch)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(d)


def test_ellipticity_violation_reported():
    d = shipped_config("flatspot").to_dict()
    d["coefficients"] = {"preset": "constant-SPD", "matrix": [[4.0, 0.0], [0.0, 1.0]], "Lambda": 2.0}
    with pytest.raises(ConfigError, match="ellipticity"):
        ExperimentConfig.from_dict(d)


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["no-such-experiment", "--config", "flatspot"]) == 2
    assert main(["flatspot", "--config", "no-such-config"]) == 2
    assert main(["hull", "--config", "flatspot"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "flatspot", "mesh_h": 0}))
    assert main(["flatspot", "--config", str(bad)]) == 2
    assert main(["flatspot", "--config", "flatspot", "--dry-run", "--quiet"]) == 0
    plan = json.loads(capsys.readouterr().out)
    assert plan["plan"]["functions"] == 5


def test_cli_writes_outputs(tmp_path, capsys):
    out = tmp_path / "flat"
    assert main(["flatspot", "--config", "flatspot", "--out", str(out), "--quiet"]) == 0
    assert "PASS flatspot.uniform" in capsys.readouterr().out
    rep = json.loads((out / "report.json").read_text())
    assert rep["tables"] == {"flat_spots": "flat_spots.csv"}
    assert (out / "flat_spots.csv").read_text().startswith("function,r,base")
    assert json.loads((out / "summary.json").read_text())["passed"] is True


def test_decompose_writes_svg(tmp_path):
    out = tmp_path / "dec"
    assert main(["decompose", "--config", "decompose", "--out", str(out), "--quiet"]) == 0
    assert (out / "decomposition.svg").read_text().startswith("<svg")


def test_threads_do_not_change_results(monkeypatch):
    cfg = shipped_config("flatspot")
    one = run_experiment(cfg).csv_hashes()
    monkeypatch.setenv("NODAL_ATLAS_THREADS", "3")
    assert run_experiment(cfg).csv_hashes() == one


def test_pmap_preserves_order(monkeypatch):
    monkeypatch.setenv("NODAL_ATLAS_THREADS", "4")
    assert pmap(lambda x: x * x, list(range(20))) == [x * x for x in range(20)]


def test_constrained_max_two_by_two():
    # maximise x^T P x on the unit circle subject to x^T B x <= eps^2
    P = np.diag([1.0, 0.0])
    B = np.diag([1.0, 0.0])
    val, x, t, active = constrained_max(P, B, 0.5)
    assert active and abs(val - 0.25) < 1e-8
    val, _, _, active = constrained_max(P, B, 2.0)
    assert not active and abs(val - 1.0) < 1e-12
    # no unit vector satisfies the constraint: the supremum is 0
    val, _, t, _ = constrained_max(P, np.eye(2), 0.5)
    assert val == 0.0 and np.isinf(t)


@given(st.integers(0, 10_000), st.floats(0.05, 0.9))
@settings(max_examples=25, deadline=None)
def test_constrained_max_against_sampling(seed, eps):
    rng = np.random.default_rng(seed)
    G = rng.normal(size=(3, 3))
    P = G @ G.T
    H = rng.normal(size=(3, 3))
    B = H @ H.T / 3
    val, x, t, active = constrained_max(P, B, eps)
    xs = rng.normal(size=(200_000, 3))
    xs /= np.linalg.norm(xs, axis=1)[:, None]
    feas = np.einsum("ni,ij,nj->n", xs, B, xs) <= eps * eps
    if not feas.any():
        return
    brute = np.einsum("ni,ij,nj->n", xs[feas], P, xs[feas]).max()
    assert val >= brute - 1e-9
    assert abs(x @ x - 1) < 1e-9 and x @ B @ x <= eps * eps * (1 + 1e-6)
    assert abs(float(x @ P @ x) - val) < 1e-9 * max(1.0, val)
