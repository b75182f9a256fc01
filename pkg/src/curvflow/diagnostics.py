"""Quantitative checks of the closed-form identities and the dynamics.

Every check records the identity being tested, the computed value, the
frozen reference (oracle) value and the tolerance, so a report is a
self-contained account of what was verified and how tightly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import constructions as ctor
from . import flow as flowmod
from .profiles import (
    FlowVariant,
    Topology,
    curvature_field,
    global_term,
    integrate,
    laplace_beltrami,
)

# Frozen oracle values (adaptive quadrature on the closed-form torus
# integrands; see tests for the independent recomputation).
TORUS_H_VP_0 = 0.5814990719746391          # average mean curvature at t=0
TORUS_H_AP_0 = 0.7740744588168689          # H^2-average at t=0
TORUS_RATE_H_AT_PI = 0.5 - 2.0 * TORUS_H_VP_0   # = -0.6629981439492783


@dataclass
class Check:
    name: str
    identity: str          # human-readable statement of what is compared
    computed: float
    target: float
    tol: float
    mode: str = "abs"      # "abs" | "rel" | "lower" (computed must exceed target)

    @property
    def passed(self):
        if self.mode == "abs":
            return abs(self.computed - self.target) <= self.tol
        if self.mode == "rel":
            return abs(self.computed - self.target) <= self.tol * abs(self.target)
        if self.mode == "lower":
            return self.computed > self.target - self.tol
        raise ValueError(self.mode)

    def as_dict(self):
        d = {"name": self.name, "identity": self.identity,
             "computed": self.computed, "target": self.target,
             "tol": self.tol, "mode": self.mode, "passed": self.passed}
        return d


@dataclass
class DiagnosticReport:
    title: str
    checks: list = dc_field(default_factory=list)

    def add(self, name, identity, computed, target, tol, mode="abs"):
        self.checks.append(Check(name, identity, float(computed), float(target),
                                 float(tol), mode))
        return self.checks[-1]

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def as_dict(self):
        return {"title": self.title, "passed": self.passed,
                "checks": [c.as_dict() for c in self.checks]}

    def to_json(self, indent=2):
        return json.dumps(self.as_dict(), indent=indent)

    def summary_lines(self):
        out = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            out.append(f"[{status}] {c.name}: computed={c.computed:.12g} "
                       f"target={c.target:.12g} tol={c.tol:g} ({c.mode})")
        return out


# ---------------------------------------------------------------------------
# First-variation fields
# ---------------------------------------------------------------------------

def initial_rate_H(profile, variant, laplacian="fd2", h=None):
    """Per-sample dH/dt at t=0:  Laplacian(H) + |A|^2 (H - h)."""
    cf = curvature_field(profile)
    if h is None:
        h = global_term(profile, variant)
    return laplace_beltrami(profile, cf.H, method=laplacian) + cf.A2 * (cf.H - h)


def paraboloid_neck_lambda(u):
    """lambda(u) = 1/(4 cosh^3 u) in the hyperbolic neck parametrization."""
    return 1.0 / (4.0 * np.cosh(np.asarray(u, dtype=float)) ** 3)


def neck_gradient_term(profile):
    """Per-sample gradient term (6 lam rdot / r)^2 on a paraboloid neck.

    In arclength this equals the hyperbolic-parametrization expression
    (3 lam rdot_u / r^2)^2; both are returned for cross-checking, along
    with the neck mask.
    """
    lo, hi = profile.neck_band
    mask = (profile.u >= lo - 1e-12) & (profile.u <= hi + 1e-12)
    dr, _, _, _ = profile.derivatives()
    cf = curvature_field(profile)
    lam = -cf.lam1
    with np.errstate(divide="ignore", invalid="ignore"):
        arc_form = np.where(profile.r > 0, (6.0 * lam * dr / np.where(profile.r > 0, profile.r, 1.0)) ** 2, np.inf)
    # same quantity from r = 2 cosh^2(v), z = 4 sinh(v)
    v = np.arcsinh(profile.z / 4.0)
    lam_v = paraboloid_neck_lambda(v)
    rdot_v = 4.0 * np.cosh(v) * np.sinh(v)
    hyp_form = (3.0 * lam_v * rdot_v / (2.0 * np.cosh(v) ** 2) ** 2) ** 2
    return arc_form, hyp_form, mask


def initial_rate_R_neck(profile, variant="vp", h=None):
    """Per-sample dR/dt on the paraboloid neck: 2*grad_term - 24 h lam^3."""
    if h is None:
        h = global_term(profile, variant)
    grad_term, _, mask = neck_gradient_term(profile)
    lam = -curvature_field(profile).lam1
    rate = 2.0 * grad_term - 24.0 * h * lam ** 3
    return np.where(mask, rate, np.nan), mask


# ---------------------------------------------------------------------------
# Simulated first-step rates
# ---------------------------------------------------------------------------

def measured_first_step_rate(profile, variant, dt, field="H", index=None):
    """(field(dt) - field(0))/dt at one sample via a single flow step."""
    work = profile.replaced()
    if index is None:
        index = work.n_samples // 2
    f0 = getattr(curvature_field(work), field)[index]
    stepped, _ = flowmod.step(work, dt, variant)
    f1 = getattr(curvature_field(stepped), field)[index]
    return (float(f1) - float(f0)) / dt


# ---------------------------------------------------------------------------
# Dynamics residual
# ---------------------------------------------------------------------------

def evolution_residual_H(trajectory):
    """Sup residual of dH/dt = Lap(H) + |A|^2 (H - h) over the snapshots.

    Uses centered time differences on consecutive snapshots, so the
    trajectory must be run with snapshot_every > 0 and regridding disabled.
    """
    snaps = trajectory.snapshots
    if len(snaps) < 3:
        raise ValueError("need at least 3 snapshots for a centered residual")
    worst = 0.0
    for k in range(1, len(snaps) - 1):
        (t0, p0), (t1, p1), (t2, p2) = snaps[k - 1], snaps[k], snaps[k + 1]
        dt0, dt1 = t1 - t0, t2 - t1
        if abs(dt1 - dt0) > 1e-12 * max(dt0, dt1):
            raise ValueError("snapshots are not uniformly spaced in time")
        H0 = curvature_field(p0).H
        H2 = curvature_field(p2).H
        dHdt = (H2 - H0) / (t2 - t0)
        rhs = initial_rate_H(p1, trajectory.config.variant)
        worst = max(worst, float(np.max(np.abs(dHdt - rhs))))
    return worst


def evolution_residual_study(make_profile, variant, N, dt, steps=4):
    """Residuals at (N, dt) and (2N, dt/4); returns (coarse, fine, ratio)."""
    results = []
    for Ni, dti in ((N, dt), (2 * N, dt / 4.0)):
        cfg = flowmod.FlowConfig(variant=variant, dt=dti, t_end=steps * dti,
                                 project=False, snapshot_every=1, record_every=steps)
        tr = flowmod.run(make_profile(Ni), cfg)
        results.append(evolution_residual_H(tr))
    coarse, fine = results
    return coarse, fine, coarse / fine


# ---------------------------------------------------------------------------
# Sign tracking and the perturbation experiment
# ---------------------------------------------------------------------------

def sign_tracker(trajectory, field="H"):
    """Crossing report for the recorded minimum of H or R."""
    mins = trajectory.min_H if field == "H" else trajectory.min_R
    locs = trajectory.u_min_H if field == "H" else trajectory.u_min_R
    t = trajectory.t
    neg = np.nonzero(mins < 0.0)[0]
    report = {
        "field": field,
        "min_over_run": float(np.min(mins)),
        "final_min": float(mins[-1]),
        "crossed": bool(neg.size),
    }
    if neg.size:
        k = int(neg[0])
        report["t_first_negative_record"] = float(t[k])
        report["u_at_minimum"] = float(locs[k])
        report["u_at_final_minimum"] = float(locs[-1])
    if trajectory.crossing is not None and trajectory.crossing["quantity"] == field:
        report["refined"] = trajectory.crossing
    return report


def perturbation_experiment(profile, s_list, config):
    """Pre-flow by unconstrained MCF for time s, then run the constrained flow.

    For each s the report records the strict-positivity margin of min H
    after the pre-flow and the first crossing of min H in the subsequent
    run.  Failures are reported, never masked.
    """
    rows = []
    for s in s_list:
        if s > 0:
            pre_dt = min(config.dt, s / 10.0)
            pre_cfg = flowmod.FlowConfig(
                variant=FlowVariant.UNCONSTRAINED, dt=pre_dt, t_end=s,
                project=False, record_every=max(1, int(round(s / pre_dt))),
                cfl=config.cfl)
            pre = flowmod.run(profile, pre_cfg)
            start = pre.final
            if pre.status != "completed":
                rows.append({"s": s, "status": f"pre-flow {pre.status}"})
                continue
        else:
            start = profile.replaced()
        minH_after = float(np.min(curvature_field(start).H))
        main_cfg = flowmod.FlowConfig(
            variant=config.variant, dt=config.dt, t_end=config.t_end,
            project=config.project, record_every=config.record_every,
            track_sign_of="H", sign_threshold=1e-6, refine_crossing=True,
            cfl=config.cfl)
        tr = flowmod.run(start, main_cfg)
        row = {
            "s": float(s),
            "status": tr.status,
            "minH_after_preflow": minH_after,
            "strictly_mean_convex_after_preflow": bool(minH_after > 0.0),
            "min_H_over_run": float(np.min(tr.min_H)),
            "reaches_negative_H": bool(np.min(tr.min_H) < 0.0),
            "first_crossing_t": (tr.crossing.get("t_refined", tr.crossing["t_upper"])
                                 if tr.crossing else None),
        }
        rows.append(row)
    passed = all(r.get("strictly_mean_convex_after_preflow") and r.get("reaches_negative_H")
                 for r in rows if r.get("s", 0) > 0)
    return {"variant": str(config.variant.value), "rows": rows, "passed": passed}


# ---------------------------------------------------------------------------
# The full identity suite
# ---------------------------------------------------------------------------

def verify_all(n_torus=1024, n_capped=513, dt=1e-5):
    """DiagnosticReport over every closed-form identity and initial rate."""
    rep = DiagnosticReport(title="closed-form identity and initial-rate checks")

    torus = ctor.elliptic_torus(n_torus)
    cf = curvature_field(torus)
    i_pi = n_torus // 2                      # u = pi exactly (N even)
    H_closed = ctor.elliptic_torus_H_closed_form(torus.u)
    rep.add("torus_H_closed_form",
            "max |H(u) - closed form| on the elliptic torus",
            float(np.max(np.abs(cf.H - H_closed))), 0.0, 1e-10)
    rep.add("A2_at_pi", "inner-equator |A|^2 = 2",
            float(cf.A2[i_pi]), 2.0, 1e-10)
    lapH = laplace_beltrami(torus, cf.H, method="spectral")
    rep.add("lapH_at_pi", "inner-equator Laplacian of H = 1/2",
            float(lapH[i_pi]), 0.5, 1e-6)
    h_vp = global_term(torus, FlowVariant.VOLUME_PRESERVING)
    h_ap = global_term(torus, FlowVariant.AREA_PRESERVING)
    rep.add("hVP_torus", "average mean curvature at t=0 vs quadrature oracle",
            h_vp, TORUS_H_VP_0, 1e-8)
    rep.add("h_lower_bound", "h(0) >= 1/2", h_vp, 0.5, 0.0, mode="lower")
    rep.add("jensen", "h_AP(0) >= h_VP(0)", h_ap, h_vp, 0.0, mode="lower")
    rate = initial_rate_H(torus, FlowVariant.VOLUME_PRESERVING,
                          laplacian="spectral", h=h_vp)
    rep.add("rate_H_at_pi", "dH/dt(pi, 0) = 1/2 - 2 h(0), analytic",
            float(rate[i_pi]), TORUS_RATE_H_AT_PI, 1e-6)
    sim_rate = measured_first_step_rate(torus, FlowVariant.VOLUME_PRESERVING,
                                        dt, field="H", index=i_pi)
    rep.add("rate_H_at_pi_simulated", "first-step (H(pi,dt)-H(pi,0))/dt",
            sim_rate, TORUS_RATE_H_AT_PI, 2e-2)

    cat = ctor.capped_catenoid(N=n_capped)
    cat_checks = {c["name"]: c for c in cat.certification["checks"]}
    rep.add("min_cat", "catenoid neck minimality residual",
            cat_checks["neck_minimality_residual"]["value"], 0.0, 1e-12)
    rep.add("catenoid_H_floor", "capped catenoid min H above -1e-10",
            cat_checks["H_nonnegative_everywhere"]["value"], 0.0, 1e-10)

    par = ctor.capped_paraboloid(N=n_capped)
    par_checks = {c["name"]: c for c in par.certification["checks"]}
    rep.add("Sr", "paraboloid neck S(r) residual",
            par_checks["neck_S_residual"]["value"], 0.0, 1e-10)
    pcf = curvature_field(par)
    lo, hi = par.neck_band
    neck = (par.u >= lo - 1e-12) & (par.u <= hi + 1e-12)
    lam = -pcf.lam1[neck]
    exv = (pcf.H[neck] * pcf.A2[neck] - pcf.C[neck]) / lam ** 3
    rep.add("exV", "(H |A|^2 - C) / lambda^3 = 12 on the neck",
            float(np.max(np.abs(exv - 12.0))), 0.0, 1e-10)
    arc_form, hyp_form, mask = neck_gradient_term(par)
    rep.add("gradT", "gradient term agrees between parametrizations",
            float(np.max(np.abs(arc_form[mask] - hyp_form[mask]))), 0.0, 1e-10)
    mid = par.n_samples // 2
    rep.add("gradT_at_u0", "gradient term vanishes at the neck center",
            float(arc_form[mid]), 0.0, 1e-12)
    h_par = global_term(par, FlowVariant.VOLUME_PRESERVING, method="grid")
    sim_rate_R = measured_first_step_rate(par, FlowVariant.VOLUME_PRESERVING,
                                          dt, field="R", index=mid)
    rep.add("rate_R_at_u0", "first-step dR/dt at the neck center = -(3/8) h(0)",
            sim_rate_R, -0.375 * h_par, 0.05, mode="rel")
    return rep
