import math

import numpy as np
import pytest

from curvflow import curvature_field, is_embedded
from curvflow.constructions import (
    BendingFunction,
    CertificationError,
    bending_function,
    capped_catenoid,
    capped_paraboloid,
    elliptic_torus,
    round_sphere,
    report_passed,
)


@pytest.fixture(scope="module")
def bf():
    return bending_function(1.0, 2.0)


@pytest.fixture(scope="module")
def catenoid():
    return capped_catenoid(N=513)


@pytest.fixture(scope="module")
def paraboloid():
    return capped_paraboloid(N=513)


def test_bending_endpoints_and_monotonicity(bf):
    assert bf.phi(1.0) == 1.0
    assert bf.phi(2.0) == 0.0
    z = np.linspace(1.01, 1.99, 500)
    assert np.all(bf.dphi(z) < 0)
    assert np.all(bf.d2phi(z) < 0)


def test_bending_flatness_certified(bf):
    names = {c["name"]: c for c in bf.certification["checks"]}
    flat = names["right_derivatives_at_a_to_order_4"]
    assert flat["passed"] and flat["value"] < 1e-8
    assert report_passed(bf.certification)


def test_bending_certification_failure_reported():
    with pytest.raises(CertificationError) as exc:
        bending_function(1.0, 2.0, tol_flat=1e-60)
    assert exc.value.report is not None
    assert not report_passed(exc.value.report)


def test_bending_pole_slope_positive(bf):
    # rho^2 ~ slope * (b - z) near the closure point: needed for a smooth pole
    q = bf.Q(np.array([1.999, 1.9999]))
    assert q[0] > 0 and q[1] > 0
    assert -bf.dQ(2.0) > 0


def test_capped_profiles_certified(catenoid, paraboloid):
    for prof in (catenoid, paraboloid):
        assert report_passed(prof.certification)
        assert is_embedded(prof)


def test_capped_catenoid_neck_is_catenoid(catenoid):
    lo, hi = catenoid.neck_band
    neck = (catenoid.u >= lo) & (catenoid.u <= hi)
    assert np.max(np.abs(catenoid.r[neck] - np.cosh(catenoid.z[neck]))) < 1e-12
    H = curvature_field(catenoid).H
    assert np.max(np.abs(H[neck])) < 1e-12
    assert np.min(H) > -1e-10


def test_capped_paraboloid_neck_profile(paraboloid):
    lo, hi = paraboloid.neck_band
    neck = (paraboloid.u >= lo) & (paraboloid.u <= hi)
    assert np.max(np.abs(paraboloid.r[neck] - (2.0 + paraboloid.z[neck] ** 2 / 8.0))) < 1e-12
    cf = curvature_field(paraboloid)
    assert np.max(np.abs(cf.R[neck])) < 1e-12
    assert np.min(cf.R) > -1e-10
    assert np.min(cf.H) > 0.0


def test_capped_profiles_are_even_in_z(catenoid):
    assert np.max(np.abs(catenoid.r - catenoid.r[::-1])) == 0.0
    assert np.max(np.abs(catenoid.z + catenoid.z[::-1])) == 0.0


def test_pole_samples(catenoid):
    assert catenoid.r[0] == 0.0 and catenoid.r[-1] == 0.0
    dr, dz, _, _ = catenoid.derivatives()
    assert dr[0] == pytest.approx(1.0) and dr[-1] == pytest.approx(-1.0)
    assert dz[0] == 0.0 and dz[-1] == 0.0
    lam1, lam2 = curvature_field(catenoid).lam1, curvature_field(catenoid).lam2
    assert lam1[0] == lam2[0] and lam1[0] > 0.0


def test_evaluator_matches_samples(catenoid):
    idx = np.arange(0, catenoid.n_samples, 37)
    r, z, dr, dz, d2r, d2z = catenoid.evaluator(catenoid.u[idx])
    assert np.max(np.abs(r - catenoid.r[idx])) < 1e-12
    assert np.max(np.abs(z - catenoid.z[idx])) < 1e-12
    assert np.max(np.abs(dr - catenoid.dr[idx])) < 1e-12


def test_even_sample_count_is_coerced_odd():
    prof = capped_catenoid(N=512)
    assert prof.n_samples == 513


def test_arclength_parametrization(catenoid, paraboloid):
    for prof in (catenoid, paraboloid):
        assert np.max(np.abs(prof.speed() - 1.0)) < 1e-12


def test_round_sphere_and_torus_baselines():
    sp = round_sphere(3.0, n=3, N=257)
    assert np.max(np.abs(curvature_field(sp).H - 1.0)) < 1e-12
    to = elliptic_torus(256)
    H = curvature_field(to).H
    assert abs(H[128]) < 1e-14            # u = pi
    assert np.min(np.delete(H, 128)) > 0  # unique zero


def test_bending_requires_ordered_interval():
    with pytest.raises(ValueError):
        BendingFunction(a=2.0, b=1.0, eps=1.0)
