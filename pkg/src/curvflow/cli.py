"""Command-line front end: construct, evolve, verify, perturb.

Every invocation reads an optional TOML config (one section per
subcommand), lets flags override config keys, writes the fully resolved
config plus all outputs into a run directory, and exits 0 only if every
certification/diagnostic in scope passed.  Outputs are deterministic:
identical inputs give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

try:
    import tomllib as _toml
except ModuleNotFoundError:  # Python < 3.11
    import tomli as _toml

from . import constructions as ctor
from . import diagnostics as diag
from . import io as cfio
from .flow import FlowConfig, run as flow_run
from .profiles import FlowVariant, curvature_field, global_term

_CONSTRUCT_NAMES = ("catenoid_capped", "elliptic_torus", "paraboloid_capped", "sphere")

_SCHEMAS = {
    "construct": {"name": str, "n_samples": int, "a": float, "b": float,
                  "radius": float, "dim": int, "outdir": str},
    "evolve": {"profile": str, "name": str, "n_samples": int, "variant": str,
               "dt": float, "t_end": float, "record_every": int,
               "regrid_every": int, "projection": bool, "track": str,
               "cfl": float, "a": float, "b": float, "radius": float,
               "dim": int, "outdir": str},
    "verify": {"n_torus": int, "n_capped": int, "dt": float, "outdir": str},
    "perturb": {"name": str, "n_samples": int, "variant": str, "s": list,
                "dt": float, "t_end": float, "record_every": int,
                "a": float, "b": float, "outdir": str},
}

_DEFAULTS = {
    "construct": {"name": "elliptic_torus", "n_samples": 1024,
                  "a": 1.0, "b": 2.0, "radius": 1.0, "dim": 2},
    "evolve": {"name": "elliptic_torus", "n_samples": 512, "variant": "vp",
               "dt": 2e-5, "t_end": 0.05, "record_every": 100,
               "regrid_every": 0, "projection": True, "track": "H",
               "cfl": 0.9, "a": 1.0, "b": 2.0, "radius": 1.0, "dim": 2},
    "verify": {"n_torus": 1024, "n_capped": 513, "dt": 1e-5},
    "perturb": {"name": "catenoid_capped", "n_samples": 1025, "variant": "vp",
                "s": [1e-4, 1e-3], "dt": 1e-5, "t_end": 0.005,
                "record_every": 50, "a": 1.0, "b": 2.0},
}


class ConfigError(ValueError):
    pass


def _load_config(path, command):
    if path is None:
        return {}
    with open(path, "rb") as fh:
        data = _toml.load(fh)
    for section in data:
        if section not in _SCHEMAS:
            raise ConfigError(f"unknown config section [{section}]")
        for key in data[section]:
            if key not in _SCHEMAS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
    return data.get(command, {})


def _resolve(command, args):
    cfg = dict(_DEFAULTS[command])
    cfg.update(_load_config(args.config, command))
    for key in _SCHEMAS[command]:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    if "s" in cfg and isinstance(cfg["s"], str):
        cfg["s"] = [float(x) for x in cfg["s"].split(",") if x.strip()]
    outroot = cfg.pop("outdir", None) or os.environ.get("CURVFLOW_OUT") or "runs"
    rundir = os.path.join(outroot, command)
    os.makedirs(rundir, exist_ok=True)
    return cfg, rundir


def _toml_literal(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_literal(x) for x in v) + "]"
    return json.dumps(str(v))


def _write_resolved(rundir, command, cfg):
    lines = [f"[{command}]"]
    for key in sorted(cfg):
        lines.append(f"{key} = {_toml_literal(cfg[key])}")
    with open(os.path.join(rundir, "config.resolved.toml"), "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _build(name, cfg):
    if name == "elliptic_torus":
        return ctor.elliptic_torus(cfg["n_samples"])
    if name == "catenoid_capped":
        return ctor.capped_catenoid(a=cfg["a"], b=cfg["b"], N=cfg["n_samples"])
    if name == "paraboloid_capped":
        return ctor.capped_paraboloid(a=cfg["a"], b=cfg["b"], N=cfg["n_samples"])
    if name == "sphere":
        return ctor.round_sphere(cfg["radius"], n=cfg["dim"], N=cfg["n_samples"])
    raise ConfigError(f"unknown construction {name!r}; choose from {_CONSTRUCT_NAMES}")


def _baseline_certificate(profile, name):
    """Certification report for the analytic baselines (torus, sphere)."""
    cf = curvature_field(profile)
    checks = []
    if name == "elliptic_torus":
        closed = ctor.elliptic_torus_H_closed_form(profile.u)
        checks.append(ctor._check("H_matches_closed_form",
                                  float(np.max(np.abs(cf.H - closed))), 1e-10))
        zeros = np.nonzero(np.abs(cf.H) < 1e-12)[0]
        unique_zero_at_pi = (zeros.size == 1
                             and abs(profile.u[zeros[0]] - math.pi) < 1e-12)
        checks.append(ctor._check("H_unique_zero_at_pi",
                                  1.0 if unique_zero_at_pi else 0.0, 0.5, "min_above"))
    else:
        H0 = profile.n / float(np.max(profile.r))
        checks.append(ctor._check("H_constant_n_over_radius",
                                  float(np.max(np.abs(cf.H - H0))), 1e-10))
    from .profiles import is_embedded
    checks.append(ctor._check("embedded", 1.0 if is_embedded(profile) else 0.0,
                              0.5, "min_above"))
    return {"kind": name, "n_samples": profile.n_samples, "checks": checks}


def cmd_construct(args):
    cfg, rundir = _resolve("construct", args)
    _write_resolved(rundir, "construct", cfg)
    try:
        profile = _build(cfg["name"], cfg)
    except ctor.CertificationError as exc:
        cfio.save_report(exc.report or {"error": str(exc)},
                         os.path.join(rundir, "report.json"))
        print(f"construct {cfg['name']}: FAILED ({exc})")
        return 1
    report = getattr(profile, "certification", None) or _baseline_certificate(
        profile, cfg["name"])
    cfio.save_profile(profile, os.path.join(rundir, "profile.csv"))
    cfio.save_curvature(profile, os.path.join(rundir, "curvature.csv"))
    cfio.save_report(report, os.path.join(rundir, "report.json"))
    ok = ctor.report_passed(report)
    print(f"construct {cfg['name']}: {'certified' if ok else 'FAILED'} "
          f"({len(report['checks'])} checks)")
    return 0 if ok else 1


def cmd_evolve(args):
    cfg, rundir = _resolve("evolve", args)
    _write_resolved(rundir, "evolve", cfg)
    if cfg.get("profile"):
        profile = cfio.load_profile(cfg["profile"])
    else:
        profile = _build(cfg["name"], cfg)
    fc = FlowConfig(variant=cfg["variant"], dt=cfg["dt"], t_end=cfg["t_end"],
                    project=cfg["projection"], record_every=cfg["record_every"],
                    regrid_every=cfg["regrid_every"], cfl=cfg["cfl"],
                    track_sign_of=cfg["track"], sign_threshold=1e-6,
                    refine_crossing=True)
    tr = flow_run(profile, fc)
    cfio.save_trajectory(tr, os.path.join(rundir, "trajectory.csv"))
    report = {
        "status": tr.status,
        "variant": str(fc.variant.value),
        "drift": tr.conservation_drift(),
        "crossing": tr.crossing,
        "sign_tracker": diag.sign_tracker(tr, cfg["track"]),
        "final_min_H": float(tr.min_H[-1]),
        "final_min_R": float(tr.min_R[-1]),
    }
    cfio.save_report(report, os.path.join(rundir, "report.json"))
    print(f"evolve {cfg.get('profile') or cfg['name']} [{cfg['variant']}]: "
          f"{tr.status}; min H -> {tr.min_H[-1]:.6g}")
    return 0 if tr.status == "completed" else 1


def cmd_verify(args):
    cfg, rundir = _resolve("verify", args)
    _write_resolved(rundir, "verify", cfg)
    rep = diag.verify_all(n_torus=cfg["n_torus"], n_capped=cfg["n_capped"],
                          dt=cfg["dt"])
    cfio.save_report(rep, os.path.join(rundir, "report.json"))
    for line in rep.summary_lines():
        print(line)
    print(f"verify: {'all checks passed' if rep.passed else 'FAILURES present'}")
    return 0 if rep.passed else 1


def cmd_perturb(args):
    cfg, rundir = _resolve("perturb", args)
    _write_resolved(rundir, "perturb", cfg)
    profile = _build(cfg["name"], cfg)
    fc = FlowConfig(variant=cfg["variant"], dt=cfg["dt"], t_end=cfg["t_end"],
                    record_every=cfg["record_every"])
    report = diag.perturbation_experiment(profile, list(cfg["s"]), fc)
    rows = report["rows"]
    with open(os.path.join(rundir, "perturb.csv"), "w") as fh:
        fh.write("s,minH_after_preflow,first_crossing_t\n")
        for r in rows:
            fh.write("%.17g,%.17g,%s\n" % (
                r["s"], r.get("minH_after_preflow", float("nan")),
                "%.17g" % r["first_crossing_t"] if r.get("first_crossing_t") is not None else ""))
    cfio.save_report(report, os.path.join(rundir, "report.json"))
    for r in rows:
        print(f"s={r['s']:g}: minH_after_preflow={r.get('minH_after_preflow'):.3e} "
              f"first_crossing_t={r.get('first_crossing_t')}")
    print(f"perturb: {'passed' if report['passed'] else 'FAILED'}")
    return 0 if report["passed"] else 1


def build_parser():
    p = argparse.ArgumentParser(prog="curvflow",
                                description="Constrained curvature-flow laboratory")
    sub = p.add_subparsers(dest="command", required=True)
    common = {"--config": dict(default=None, help="TOML config file"),
              "--outdir": dict(default=None, help="output root (overrides CURVFLOW_OUT)")}

    def add(cmdname, fn, opts):
        sp = sub.add_parser(cmdname)
        for flag, kw in common.items():
            sp.add_argument(flag, **kw)
        for flag, kw in opts.items():
            sp.add_argument(flag, **kw)
        sp.set_defaults(func=fn)

    add("construct", cmd_construct, {
        "--name": dict(choices=_CONSTRUCT_NAMES, default=None),
        "--n-samples": dict(type=int, dest="n_samples", default=None),
        "--a": dict(type=float, default=None),
        "--b": dict(type=float, default=None),
        "--radius": dict(type=float, default=None),
        "--dim": dict(type=int, default=None),
    })
    add("evolve", cmd_evolve, {
        "--profile": dict(default=None, help="profile CSV produced by construct"),
        "--name": dict(choices=_CONSTRUCT_NAMES, default=None),
        "--n-samples": dict(type=int, dest="n_samples", default=None),
        "--variant": dict(choices=[v.value for v in FlowVariant], default=None),
        "--dt": dict(type=float, default=None),
        "--t-end": dict(type=float, dest="t_end", default=None),
        "--record-every": dict(type=int, dest="record_every", default=None),
        "--regrid-every": dict(type=int, dest="regrid_every", default=None),
        "--projection": dict(action=argparse.BooleanOptionalAction, default=None),
        "--track": dict(choices=["H", "R"], default=None),
        "--cfl": dict(type=float, default=None),
        "--a": dict(type=float, default=None),
        "--b": dict(type=float, default=None),
        "--radius": dict(type=float, default=None),
        "--dim": dict(type=int, default=None),
    })
    add("verify", cmd_verify, {
        "--n-torus": dict(type=int, dest="n_torus", default=None),
        "--n-capped": dict(type=int, dest="n_capped", default=None),
        "--dt": dict(type=float, default=None),
    })
    add("perturb", cmd_perturb, {
        "--name": dict(choices=_CONSTRUCT_NAMES, default=None),
        "--n-samples": dict(type=int, dest="n_samples", default=None),
        "--variant": dict(choices=[v.value for v in FlowVariant], default=None),
        "--s": dict(default=None, help="comma-separated pre-flow times"),
        "--dt": dict(type=float, default=None),
        "--t-end": dict(type=float, dest="t_end", default=None),
        "--record-every": dict(type=int, dest="record_every", default=None),
        "--a": dict(type=float, default=None),
        "--b": dict(type=float, default=None),
    })
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
