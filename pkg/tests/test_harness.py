import json
from pathlib import Path

import numpy as np
import pytest

from momc_uq.cli import main
from momc_uq.config import load_key_values, resolve
from momc_uq.errors import ConfigError, StaleReferenceError
from momc_uq.harness import (CSV_HEADER, load_reference, read_sweep_csv,
                             run_diag, run_reference, run_solve, run_sweep)


def burgers_kv(out, **extra):
    kv = {
        "model.kind": "burgers",
        "grid.n_cells": 64,
        "t_end": 1.0,
        "estimator": "momc",
        "sweep": [4, 8],
        "replications": 2,
        "reference.m": 32,
        "seed": 404,
        "out": str(out),
    }
    kv.update(extra)
    return kv


# config parsing -------------------------------------------------------------

def test_key_value_file_roundtrip(tmp_path):
    cfg_file = tmp_path / "exp.cfg"
    cfg_file.write_text("""
# comment
model.kind = burgers
grid.n_cells = 64
sweep = [4, 8, 16]
replications = 3
alpha = quasi-optimal
""")
    kv = load_key_values(cfg_file)
    assert kv["model.kind"] == "burgers"
    assert kv["sweep"] == [4, 8, 16]
    assert kv["replications"] == 3


def test_json_mirror_accepted(tmp_path):
    cfg_file = tmp_path / "exp.json"
    cfg_file.write_text(json.dumps({
        "model": {"kind": "burgers"},
        "grid": {"n_cells": 64},
        "sweep": [4, 8],
    }))
    kv = load_key_values(cfg_file)
    assert kv["model.kind"] == "burgers"
    assert kv["grid.n_cells"] == 64


def test_config_validation_errors(tmp_path):
    with pytest.raises(ConfigError):
        resolve({"model.kind": "heat-equation"})
    with pytest.raises(ConfigError):
        resolve(burgers_kv(tmp_path, **{"reference.m": 4}))  # < max sweep
    with pytest.raises(ConfigError):
        resolve(burgers_kv(tmp_path, **{"reference.order": 2}))  # != top order


def test_default_levels_follow_cost_table(tmp_path):
    cfg = resolve(burgers_kv(tmp_path))
    assert [lv.cost for lv in cfg.levels] == [1.0, 4.0, 9.0]
    cfg = resolve(burgers_kv(tmp_path, estimator="apmomc-bifidelity",
                             **{"model.kind": "bloodflow", "sweep": [4],
                                "reference.m": 8}))
    assert cfg.levels[0].fidelity == "reduced"
    assert cfg.levels[0].cost == 0.5


# reference ------------------------------------------------------------------

def test_reference_rerun_bit_identical(tmp_path):
    cfg = resolve(burgers_kv(tmp_path))
    run_reference(cfg)
    npy, meta = (p.read_bytes() for p in
                 sorted(tmp_path.glob("reference_*")))
    run_reference(cfg)
    npy2, meta2 = (p.read_bytes() for p in
                   sorted(tmp_path.glob("reference_*")))
    assert npy == npy2 and meta == meta2


def test_stale_reference_detected(tmp_path):
    cfg = resolve(burgers_kv(tmp_path))
    run_reference(cfg)
    changed = resolve(burgers_kv(tmp_path, t_end=0.5))
    with pytest.raises(StaleReferenceError):
        load_reference(changed)
    missing = resolve(burgers_kv(tmp_path / "elsewhere"))
    with pytest.raises(StaleReferenceError):
        load_reference(missing)


# sweep ----------------------------------------------------------------------

def test_sweep_csv_schema(tmp_path):
    cfg = resolve(burgers_kv(tmp_path))
    run_reference(cfg)
    path = run_sweep(cfg)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# seed=404")
    assert lines[1].startswith("# config_sha256=")
    assert lines[2].startswith("# model_sha256=")
    assert lines[3] == CSV_HEADER
    rows = read_sweep_csv(path)
    # 2 sweep points x 2 replications + 2 averaged rows
    assert len(rows) == 6
    assert rows[0]["M_levels"].count(";") == 2
    assert rows[-1]["replication"] == "avg"
    # deterministic wall-time column by default
    assert all(float(r["wall_ms"]) == 0.0 for r in rows)


def test_momc_alpha_zero_matches_mc_errors(tmp_path):
    kv = burgers_kv(tmp_path)
    cfg_mc = resolve({**kv, "estimator": "mc", "out": str(tmp_path / "mc")})
    run_reference(cfg_mc)
    p_mc = run_sweep(cfg_mc)
    cfg_momc = resolve({**kv, "alpha": "zero", "out": str(tmp_path / "momc")})
    run_reference(cfg_momc)
    p_momc = run_sweep(cfg_momc)
    rows_mc = read_sweep_csv(p_mc)
    rows_momc = read_sweep_csv(p_momc)
    for a, b in zip(rows_mc, rows_momc):
        assert a["M_L"] == b["M_L"] and a["replication"] == b["replication"]
        assert a["err_expectation_L1"] == b["err_expectation_L1"]
        assert a["err_variance_L1"] == b["err_variance_L1"]


def test_sweep_requires_reference(tmp_path):
    cfg = resolve(burgers_kv(tmp_path))
    with pytest.raises(StaleReferenceError):
        run_sweep(cfg)


# solve and diag -------------------------------------------------------------

def test_solve_deterministic_and_initial_profile(tmp_path):
    cfg = resolve(burgers_kv(tmp_path, t_end=0.0))
    p1 = run_solve(cfg, 1.0, order=1, csv_name="a.csv")
    p2 = run_solve(cfg, 1.0, order=1, csv_name="b.csv")
    assert p1.read_text().split("\n", 3)[3] == p2.read_text().split("\n", 3)[3]
    rows = [line.split(",") for line in p1.read_text().splitlines()[4:]]
    x = np.array([float(r[0]) for r in rows])
    u = np.array([float(r[1]) for r in rows])
    expected = np.exp(-x * x / 2.0) / np.sqrt(2.0 * np.pi)
    assert u == pytest.approx(expected, rel=1e-12)


def test_solve_swe_at_rest_is_fixed_point(tmp_path):
    kv = {
        "model.kind": "swe", "model.ic": "lake-at-rest", "grid.n_cells": 32,
        "t_end": 1.0, "sweep": [4], "reference.m": 8, "out": str(tmp_path),
    }
    cfg = resolve(kv)
    path = run_solve(cfg, 0.5)
    rows = [line.split(",") for line in path.read_text().splitlines()[4:]]
    eta = np.array([float(r[1]) for r in rows])
    hu = np.array([float(r[2]) for r in rows])
    assert np.max(np.abs(eta - 1.0)) < 1e-12
    assert np.max(np.abs(hu)) < 1e-12


def test_diag_csv(tmp_path):
    cfg = resolve(burgers_kv(tmp_path))
    path = run_diag(cfg)
    lines = path.read_text().splitlines()
    assert lines[3] == "level,variable,m,sigma,tau,xi,bound_term"
    assert len(lines) == 4 + 3  # three levels, one variable


# CLI ------------------------------------------------------------------------

def test_cli_exit_codes(tmp_path):
    cfg_file = tmp_path / "exp.cfg"
    cfg_file.write_text("model.kind = burgers\ngrid.n_cells = 64\n"
                        "sweep = [4]\nreference.m = 8\nreplications = 1\n")
    out = str(tmp_path / "out")
    assert main(["sweep", "--config", str(cfg_file), "--out", out]) == 2
    assert main(["reference", "--config", str(cfg_file), "--out", out]) == 0
    assert main(["sweep", "--config", str(cfg_file), "--out", out]) == 0
    assert main(["solve", "--config", str(cfg_file), "--out", out]) == 0
    assert main(["diag", "--config", str(cfg_file), "--out", out]) == 0

    bad = tmp_path / "bad.cfg"
    bad.write_text("model.kind = nosuchmodel\n")
    assert main(["sweep", "--config", str(bad), "--out", out]) == 2
    assert main(["sweep", "--config", str(tmp_path / "missing.cfg"),
                 "--out", out]) == 2


def test_cli_blowup_exit_code(tmp_path):
    # vessel model driven beyond its stable CFL
    cfg_file = tmp_path / "exp.cfg"
    cfg_file.write_text("model.kind = bloodflow\ncfl = 0.9\n"
                        "reference.order = 2\nlevels = 1\nlevels.0.order = 2\n"
                        "sweep = [4]\nreference.m = 8\nreplications = 1\n")
    assert main(["reference", "--config", str(cfg_file),
                 "--out", str(tmp_path / "out")]) == 3


def test_cli_seed_override_changes_output(tmp_path):
    cfg_file = tmp_path / "exp.cfg"
    cfg_file.write_text("model.kind = burgers\ngrid.n_cells = 64\n"
                        "sweep = [4]\nreference.m = 8\nreplications = 1\n")
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    for out, seed in ((out1, "1"), (out2, "2")):
        assert main(["reference", "--config", str(cfg_file), "--out", out,
                     "--seed", seed]) == 0
        assert main(["sweep", "--config", str(cfg_file), "--out", out,
                     "--seed", seed]) == 0
    a = (Path(out1) / "sweep.csv").read_text().splitlines()[4]
    b = (Path(out2) / "sweep.csv").read_text().splitlines()[4]
    assert a != b
