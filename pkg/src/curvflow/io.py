"""File formats: profile CSV + JSON sidecar, curvature CSV, trajectory CSV.

All writers are deterministic (sorted JSON keys, fixed float formatting)
so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np

from .profiles import GeneratingProfile, Topology, curvature_field

_FLOAT_FMT = "%.17g"


def _write_rows(path, header, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([_FLOAT_FMT % v for v in row])


def save_profile(profile, csv_path):
    """Write `u,r,z` CSV plus a JSON sidecar with the non-sample fields."""
    _write_rows(csv_path, ["u", "r", "z"], (profile.u, profile.r, profile.z))
    side = {
        "n": profile.n,
        "topology": profile.topology.value,
        "derivative_source": profile.derivative_source.value,
        "label": profile.label,
    }
    if profile.period is not None:
        side["period"] = profile.period
    if getattr(profile, "neck_band", None) is not None:
        side["neck_band"] = list(profile.neck_band)
    with open(_sidecar_path(csv_path), "w") as fh:
        json.dump(side, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _sidecar_path(csv_path):
    root, _ = os.path.splitext(csv_path)
    return root + ".json"


def load_profile(csv_path):
    """Read a profile CSV (+ sidecar); derivatives are finite-difference."""
    u, r, z = [], [], []
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            u.append(float(row["u"]))
            r.append(float(row["r"]))
            z.append(float(row["z"]))
    with open(_sidecar_path(csv_path)) as fh:
        side = json.load(fh)
    prof = GeneratingProfile(
        n=int(side["n"]), topology=Topology(side["topology"]),
        u=np.asarray(u), r=np.asarray(r), z=np.asarray(z),
        period=side.get("period"), label=side.get("label", ""))
    if "neck_band" in side:
        prof.neck_band = tuple(side["neck_band"])
    return prof


def save_curvature(profile, path):
    cf = curvature_field(profile)
    _write_rows(path, ["u", "lambda1", "lambda2", "H", "A2", "C", "R"],
                (profile.u, cf.lam1, cf.lam2, cf.H, cf.A2, cf.C, cf.R))


def save_trajectory(trajectory, path):
    _write_rows(path, ["t", "area", "volume", "h", "minH", "minR", "maxA2"],
                (trajectory.t, trajectory.area, trajectory.volume, trajectory.h,
                 trajectory.min_H, trajectory.min_R, trajectory.max_A2))


def save_report(report, path):
    """Write a dict or DiagnosticReport as deterministic JSON."""
    payload = report.as_dict() if hasattr(report, "as_dict") else report
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
