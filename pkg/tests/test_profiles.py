import math

import numpy as np
import pytest
from scipy import integrate as sciint

from curvflow import (
    FlowVariant,
    GeneratingProfile,
    ProfileError,
    Topology,
    area,
    curvature_field,
    enclosed_volume,
    global_term,
    integrate,
    is_embedded,
    laplace_beltrami,
    principal_curvatures,
)
from curvflow.constructions import (
    elliptic_torus,
    elliptic_torus_H_closed_form,
    round_sphere,
)
from curvflow.flow import reparametrize


def test_round_sphere_is_umbilic():
    for n in (2, 3):
        sp = round_sphere(2.0, n=n, N=201)
        lam1, lam2 = principal_curvatures(sp)
        assert np.max(np.abs(lam1 - 0.5)) < 1e-13
        assert np.max(np.abs(lam2 - 0.5)) < 1e-13
        assert np.max(np.abs(curvature_field(sp).H - n / 2.0)) < 1e-12


def test_finite_difference_curvature_convergence_order():
    errs = []
    for N in (129, 257, 513):
        sp = round_sphere(1.0, n=2, N=N).replaced()   # drop analytic derivatives
        cf = curvature_field(sp)
        errs.append(np.max(np.abs(cf.H - 2.0)))
    slopes = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(slopes) > 1.9


def test_sphere_area_and_volume_closed_forms():
    rho = 1.7
    sp2 = round_sphere(rho, n=2, N=801)
    assert area(sp2) == pytest.approx(4 * math.pi * rho ** 2, rel=1e-10)
    assert enclosed_volume(sp2) == pytest.approx(4 / 3 * math.pi * rho ** 3, rel=1e-10)
    sp3 = round_sphere(rho, n=3, N=801)
    assert area(sp3) == pytest.approx(2 * math.pi ** 2 * rho ** 3, rel=1e-10)
    assert enclosed_volume(sp3) == pytest.approx(math.pi ** 2 / 2 * rho ** 4, rel=1e-10)


def test_laplacian_of_constant_vanishes():
    to = elliptic_torus(256)
    sp = round_sphere(1.0, n=2, N=257)
    for prof in (to, sp):
        out = laplace_beltrami(prof, np.full(prof.n_samples, 3.7))
        assert np.max(np.abs(out)) == 0.0


def test_laplacian_first_harmonic_on_sphere():
    rho = 1.0
    errs = []
    for N in (257, 513):
        sp = round_sphere(rho, n=2, N=N)
        out = laplace_beltrami(sp, sp.z)
        errs.append(np.max(np.abs(out + 2.0 * sp.z / rho ** 2)))
    assert errs[0] / errs[1] > 3.5   # second-order operator


def test_torus_mean_curvature_closed_form():
    to = elliptic_torus(1024)
    H = curvature_field(to).H
    assert np.max(np.abs(H - elliptic_torus_H_closed_form(to.u))) < 1e-12


def test_gauss_identity_and_cauchy_schwarz():
    for prof in (elliptic_torus(256), round_sphere(1.3, 3, 257)):
        cf = curvature_field(prof)
        assert np.max(np.abs(cf.R - (cf.H ** 2 - cf.A2))) < 1e-12
        assert np.all(cf.A2 - cf.H ** 2 / prof.n > -1e-12)


def test_scaling_covariance():
    k = 2.5
    to = elliptic_torus(512)
    dr, dz, d2r, d2z = to.derivatives()
    scaled = to.replaced(r=k * to.r, z=k * to.z, dr=k * dr, dz=k * dz,
                         d2r=k * d2r, d2z=k * d2z)
    cf, cfs = curvature_field(to), curvature_field(scaled)
    assert np.max(np.abs(cfs.H - cf.H / k)) < 1e-12
    assert area(scaled) == pytest.approx(k ** 2 * area(to), rel=1e-12)
    assert enclosed_volume(scaled) == pytest.approx(k ** 3 * enclosed_volume(to), rel=1e-12)
    h, hs = global_term(to, "vp", method="grid"), global_term(scaled, "vp", method="grid")
    assert hs == pytest.approx(h / k, rel=1e-12)


def test_reparametrization_invariance():
    to = elliptic_torus(512)
    resampled = reparametrize(to)
    assert area(resampled) == pytest.approx(area(to), rel=1e-8)
    assert enclosed_volume(resampled) == pytest.approx(enclosed_volume(to), rel=1e-8)
    assert global_term(resampled, "vp", method="grid") == pytest.approx(
        global_term(to, "vp", method="grid"), rel=1e-8)


def test_jensen_inequality_on_torus():
    to = elliptic_torus(512)
    assert global_term(to, FlowVariant.AREA_PRESERVING) >= global_term(
        to, FlowVariant.VOLUME_PRESERVING)


def test_adaptive_and_grid_quadrature_agree():
    to = elliptic_torus(1024)
    a_grid = area(to, method="grid")
    a_adap, err = integrate(to, lambda u: 1.0, method="adaptive", return_error=True)
    assert abs(a_grid - a_adap) < 1e-9
    assert err < 1e-7


def test_torus_area_oracle_value():
    # independent oracle straight from the closed-form metric
    val, _ = sciint.quad(
        lambda u: math.sqrt(2.0) * math.sqrt(1 + math.sin(u) ** 2) * (3 + 2 * math.cos(u)),
        0.0, 2.0 * math.pi)
    assert area(elliptic_torus(1024)) == pytest.approx(2 * math.pi * val, rel=1e-12)
    assert enclosed_volume(elliptic_torus(1024)) == pytest.approx(
        12 * math.sqrt(2.0) * math.pi ** 2, rel=1e-12)


def test_global_term_ap_requires_positive_total_H():
    to = elliptic_torus(256)
    flipped = to.replaced(z=-to.z)      # reversed orientation: H <= 0
    with pytest.raises(ProfileError):
        global_term(flipped, FlowVariant.AREA_PRESERVING, method="grid")


def test_embeddedness_detects_crossing():
    # bow-tie polygon: opposite edges cross
    base = np.array([(1.0, -1.0), (2.0, 0.0), (3.0, 1.0), (3.0, -1.0),
                     (2.0, 0.4), (1.0, 1.0), (1.0, 0.0), (1.0, -0.5)])
    prof = GeneratingProfile(n=2, topology=Topology.TORUS,
                             u=np.arange(8.0), r=base[:, 0], z=base[:, 1])
    assert not is_embedded(prof)
    assert is_embedded(elliptic_torus(128))
    assert is_embedded(round_sphere(1.0, 2, 129))


def test_sphere_profile_validation():
    u = np.linspace(0.0, math.pi, 65)
    r = np.sin(u)
    r[0] = 1e-14        # does not touch the axis exactly
    with pytest.raises(ProfileError):
        GeneratingProfile(n=2, topology=Topology.SPHERE, u=u, r=r, z=-np.cos(u))
