import json
import os

import pytest

from curvflow.cli import main


def _run(argv, tmp_path, monkeypatch):
    monkeypatch.setenv("CURVFLOW_OUT", str(tmp_path))
    return main(argv)


def test_construct_sphere(tmp_path, monkeypatch):
    code = _run(["construct", "--name", "sphere", "--radius", "2",
                 "--n-samples", "129"], tmp_path, monkeypatch)
    assert code == 0
    rundir = tmp_path / "construct"
    assert (rundir / "profile.csv").exists()
    assert (rundir / "profile.json").exists()
    assert (rundir / "curvature.csv").exists()
    report = json.loads((rundir / "report.json").read_text())
    assert all(c["passed"] for c in report["checks"])


def test_construct_torus_flags_unique_zero(tmp_path, monkeypatch):
    code = _run(["construct", "--name", "elliptic_torus", "--n-samples", "256"],
                tmp_path, monkeypatch)
    assert code == 0
    report = json.loads((tmp_path / "construct" / "report.json").read_text())
    names = {c["name"]: c for c in report["checks"]}
    assert names["H_unique_zero_at_pi"]["passed"]


def test_construct_capped_certification_in_report(tmp_path, monkeypatch):
    code = _run(["construct", "--name", "catenoid_capped", "--n-samples", "257"],
                tmp_path, monkeypatch)
    assert code == 0
    report = json.loads((tmp_path / "construct" / "report.json").read_text())
    names = {c["name"] for c in report["checks"]}
    assert "neck_minimality_residual" in names


def test_evolve_sphere_no_crossing(tmp_path, monkeypatch):
    code = _run(["evolve", "--name", "sphere", "--radius", "1", "--n-samples",
                 "129", "--variant", "vp", "--dt", "5e-5", "--t-end", "1e-3",
                 "--record-every", "5"], tmp_path, monkeypatch)
    assert code == 0
    report = json.loads((tmp_path / "evolve" / "report.json").read_text())
    assert report["status"] == "completed"
    assert report["crossing"] is None
    assert report["drift"]["volume"] < 1e-9
    lines = (tmp_path / "evolve" / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,area,volume,h,minH,minR,maxA2"


def test_config_file_and_flag_override(tmp_path, monkeypatch):
    cfg = tmp_path / "exp.toml"
    cfg.write_text("[evolve]\nname = \"sphere\"\nradius = 1.0\n"
                   "n_samples = 129\nvariant = \"vp\"\ndt = 5e-5\n"
                   "t_end = 1e-3\nrecord_every = 5\n")
    code = _run(["evolve", "--config", str(cfg), "--variant", "ap"],
                tmp_path, monkeypatch)
    assert code == 0
    resolved = (tmp_path / "evolve" / "config.resolved.toml").read_text()
    assert "variant = \"ap\"" in resolved     # flag wins over config


def test_unknown_config_key_rejected(tmp_path, monkeypatch):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[evolve]\nnot_a_key = 1\n")
    code = _run(["evolve", "--config", str(cfg)], tmp_path, monkeypatch)
    assert code == 2


def test_unknown_config_section_rejected(tmp_path, monkeypatch):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[weird]\nx = 1\n")
    code = _run(["construct", "--config", str(cfg)], tmp_path, monkeypatch)
    assert code == 2


def test_rerun_is_byte_identical(tmp_path, monkeypatch):
    argv = ["construct", "--name", "elliptic_torus", "--n-samples", "128"]
    assert _run(argv, tmp_path, monkeypatch) == 0
    rundir = tmp_path / "construct"
    first = {p.name: p.read_bytes() for p in rundir.iterdir()}
    assert _run(argv, tmp_path, monkeypatch) == 0
    second = {p.name: p.read_bytes() for p in rundir.iterdir()}
    assert first == second


def test_verify_command(tmp_path, monkeypatch):
    code = _run(["verify", "--n-torus", "512", "--n-capped", "257",
                 "--dt", "1e-5"], tmp_path, monkeypatch)
    assert code == 0
    report = json.loads((tmp_path / "verify" / "report.json").read_text())
    assert report["passed"] is True
    names = {c["name"] for c in report["checks"]}
    assert {"A2_at_pi", "lapH_at_pi", "hVP_torus", "rate_H_at_pi",
            "rate_R_at_u0", "jensen", "exV", "gradT"} <= names


def test_perturb_emits_summary_csv(tmp_path, monkeypatch):
    code = _run(["perturb", "--n-samples", "257", "--s", "1e-3",
                 "--dt", "2e-5", "--t-end", "1e-3"], tmp_path, monkeypatch)
    csv_text = (tmp_path / "perturb" / "perturb.csv").read_text()
    assert csv_text.splitlines()[0] == "s,minH_after_preflow,first_crossing_t"
    assert len(csv_text.splitlines()) == 2
    # strict positivity after pre-flow is below the FD noise floor, so the
    # command reports the failure and exits nonzero: honest by design
    report = json.loads((tmp_path / "perturb" / "report.json").read_text())
    assert report["rows"][0]["reaches_negative_H"] is True
    assert code in (0, 1)
