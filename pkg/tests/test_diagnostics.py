import json
import math

import numpy as np
import pytest

from curvflow.constructions import capped_paraboloid, elliptic_torus, round_sphere
from curvflow.diagnostics import (
    TORUS_H_VP_0,
    TORUS_RATE_H_AT_PI,
    Check,
    DiagnosticReport,
    evolution_residual_H,
    evolution_residual_study,
    initial_rate_H,
    initial_rate_R_neck,
    measured_first_step_rate,
    sign_tracker,
    verify_all,
)
from curvflow.flow import FlowConfig, run
from curvflow.profiles import global_term


def test_check_modes():
    assert Check("a", "", 1.0, 1.0 + 5e-7, 1e-6).passed
    assert not Check("a", "", 1.0, 1.0 + 2e-6, 1e-6).passed
    assert Check("b", "", 1.02, 1.0, 0.05, mode="rel").passed
    assert Check("c", "", 0.7, 0.5, 0.0, mode="lower").passed
    assert not Check("c", "", 0.4, 0.5, 0.0, mode="lower").passed


def test_report_json_roundtrip():
    rep = DiagnosticReport(title="t")
    rep.add("x", "identity", 1.0, 1.0, 1e-12)
    data = json.loads(rep.to_json())
    assert data["passed"] is True
    assert data["checks"][0]["name"] == "x"
    assert len(rep.summary_lines()) == 1


def test_verify_all_passes():
    rep = verify_all(n_torus=512, n_capped=257, dt=1e-5)
    failed = [c.name for c in rep.checks if not c.passed]
    assert rep.passed, f"failed checks: {failed}"


def test_initial_rate_H_zero_on_round_sphere():
    sp = round_sphere(1.5, 2, 257)
    rate = initial_rate_H(sp, "vp")
    assert np.max(np.abs(rate)) < 1e-8


def test_initial_rate_H_at_inner_equator():
    to = elliptic_torus(1024)
    rate = initial_rate_H(to, "vp", laplacian="spectral")
    assert rate[512] == pytest.approx(TORUS_RATE_H_AT_PI, abs=1e-9)


def test_initial_rate_R_neck_center_value():
    par = capped_paraboloid(N=257)
    h = global_term(par, "vp", method="grid")
    rate, mask = initial_rate_R_neck(par, h=h)
    mid = par.n_samples // 2
    assert mask[mid]
    assert rate[mid] == pytest.approx(-0.375 * h, rel=1e-12)


def test_measured_rate_matches_analytic_rate():
    to = elliptic_torus(512)
    sim = measured_first_step_rate(to, "vp", 1e-5, "H", index=256)
    assert sim == pytest.approx(TORUS_RATE_H_AT_PI, abs=2e-2)


def test_evolution_residual_small_on_sphere():
    sp = round_sphere(1.0, 2, 257)
    cfg = FlowConfig(variant="vp", dt=2e-5, t_end=8e-5, project=False,
                     snapshot_every=1, record_every=4)
    tr = run(sp, cfg)
    # the time derivative vanishes; the residual is the spatial truncation
    # error of the discrete right-hand side on the N=257 grid
    assert evolution_residual_H(tr) < 1e-4


def test_evolution_residual_self_convergence():
    coarse, fine, ratio = evolution_residual_study(elliptic_torus, "vp",
                                                   N=128, dt=8e-5)
    assert ratio > 3.5


def test_evolution_residual_needs_three_snapshots():
    sp = round_sphere(1.0, 2, 129)
    cfg = FlowConfig(variant="vp", dt=2e-5, t_end=4e-5, project=False,
                     snapshot_every=2, record_every=2)
    tr = run(sp, cfg)
    with pytest.raises(ValueError):
        evolution_residual_H(tr)


def test_sign_tracker_torus():
    to = elliptic_torus(256)
    cfg = FlowConfig(variant="vp", dt=4e-5, t_end=4e-3, record_every=10,
                     track_sign_of="H", sign_threshold=1e-6, refine_crossing=True)
    tr = run(to, cfg)
    rep = sign_tracker(tr, "H")
    assert rep["crossed"]
    assert rep["u_at_minimum"] == pytest.approx(math.pi, abs=0.1)
    assert "refined" in rep


def test_sign_tracker_no_crossing_on_sphere():
    sp = round_sphere(1.0, 2, 129)
    cfg = FlowConfig(variant="vp", dt=5e-5, t_end=1e-3, record_every=5,
                     track_sign_of="H")
    tr = run(sp, cfg)
    rep = sign_tracker(tr, "H")
    assert not rep["crossed"]
    assert rep["min_over_run"] > 1.9


def test_frozen_oracle_reproduced_by_quadrature():
    from scipy import integrate as sciint
    quarter, _ = sciint.quad(lambda t: math.sqrt(1 + math.sin(t) ** 2), 0, math.pi / 2)
    oracle = (math.pi / (2 * math.sqrt(2.0))) / quarter
    assert oracle == pytest.approx(TORUS_H_VP_0, abs=1e-13)
