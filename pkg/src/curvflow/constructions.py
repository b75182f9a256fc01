"""Construction of the counterexample hypersurfaces and baselines.

The two capped examples share one recipe: a neck r(z) with a known
curvature identity (catenoid: minimal; paraboloid: scalar-flat) is
multiplied on |z| in (a, b] by a concave bending factor phi that is
infinitely flat at a and closes the surface smoothly on the axis at b.
Every analytic hypothesis on phi and on the resulting surface is
certified numerically and reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import integrate as _sciint
from scipy import interpolate as _interp
from scipy import optimize as _opt
from scipy import special as _special

from .profiles import (
    CurvatureField,
    GeneratingProfile,
    Topology,
    curvature_field,
    is_embedded,
)


class CertificationError(RuntimeError):
    """A construction failed one of its numeric certificates."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


def _check(name, value, bound, kind="max_below"):
    """One certificate entry: value compared against bound."""
    if kind == "max_below":
        ok = value < bound
    elif kind == "min_above":
        ok = value > bound
    else:
        raise ValueError(kind)
    return {"name": name, "value": float(value), "bound": float(bound),
            "comparison": kind, "passed": bool(ok)}


def report_passed(report):
    return all(c["passed"] for c in report["checks"])


# ---------------------------------------------------------------------------
# Bending function
# ---------------------------------------------------------------------------

@dataclass
class BendingFunction:
    """Concave cutoff phi on [a, b] with phi(a)=1, phi(b)=0.

    Built as phi = sqrt(Q) with
        Q(z) = 1 - W(z - a) / W(b - a),
        W(x) = integral_0^x exp(-eps/s) ds = x e^(-eps/x) - eps E1(eps/x),
    which gives Q' < 0 and Q'' < 0 on (a, b), infinite-order flatness at
    a, and Q'(b) < 0 so the capped radius behaves like sqrt(b - z) at the
    pole (smooth closure on the axis).
    """

    a: float
    b: float
    eps: float
    flatness_order: int = 4
    tol_flat: float = 1e-8
    certification: dict = dc_field(default=None, repr=False)

    def __post_init__(self):
        if not (0 < self.a < self.b):
            raise ValueError("need 0 < a < b")
        self._wtot = self._W(self.b - self.a)

    # primitive of exp(-eps/x)
    def _W(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        pos = x > 0
        xp = x[pos]
        out[pos] = xp * np.exp(-self.eps / xp) - self.eps * _special.exp1(self.eps / xp)
        return out if out.ndim else float(out)

    def _w(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(x > 0, np.exp(-self.eps / np.maximum(x, 1e-300)), 0.0)

    def Q(self, z):
        return 1.0 - self._W(np.asarray(z, dtype=float) - self.a) / self._wtot

    def dQ(self, z):
        return -self._w(np.asarray(z, dtype=float) - self.a) / self._wtot

    def d2Q(self, z):
        x = np.asarray(z, dtype=float) - self.a
        with np.errstate(divide="ignore", invalid="ignore"):
            fac = np.where(x > 0, self.eps / np.maximum(x, 1e-300) ** 2, 0.0)
        return -fac * self._w(x) / self._wtot

    def phi(self, z):
        return np.sqrt(np.maximum(self.Q(z), 0.0))

    def dphi(self, z):
        q = self.Q(z)
        return self.dQ(z) / (2.0 * np.sqrt(q))

    def d2phi(self, z):
        q = self.Q(z)
        return (2.0 * q * self.d2Q(z) - self.dQ(z) ** 2) / (4.0 * q ** 1.5)

    def phi_minus_one(self, z):
        """phi - 1 without cancellation (tiny near a)."""
        m = self._W(np.asarray(z, dtype=float) - self.a) / self._wtot
        return -m / (1.0 + self.phi(z))

    # -- certification ----------------------------------------------------

    def certify(self, grid_points=2001, tol_pole=1e-3):
        a, b, L = self.a, self.b, self.b - self.a
        checks = []
        checks.append(_check("phi_at_a_equals_1", abs(self.phi(a) - 1.0), 1e-15))
        checks.append(_check("phi_at_b_equals_0", abs(self.phi(b)), 1e-15))
        # strict monotonicity / concavity on a dense interior grid
        delta = 2e-3 * L
        zg = np.linspace(a + delta, b - delta, grid_points)
        checks.append(_check("dphi_negative", float(np.max(self.dphi(zg))), 0.0))
        checks.append(_check("d2phi_negative", float(np.max(self.d2phi(zg))), 0.0))
        # flatness of all right derivatives at a (forward differences of
        # phi-1, which is exactly representable near a)
        hf = 2e-3 * L
        worst = 0.0
        for j in range(1, self.flatness_order + 1):
            coef = np.array([(-1) ** (j - k) * math.comb(j, k) for k in range(j + 1)])
            vals = self.phi_minus_one(a + hf * np.arange(j + 1))
            worst = max(worst, abs(float(coef @ vals)) / hf ** j)
        checks.append(_check(f"right_derivatives_at_a_to_order_{self.flatness_order}",
                             worst, self.tol_flat))
        # inverse graph z(phi): concave near the axis ...
        zq = np.linspace(b - 0.2 * L, b - 1e-6 * L, 101)
        d2z = -self.d2phi(zq) / self.dphi(zq) ** 3
        checks.append(_check("inverse_graph_concave_near_axis", float(np.max(d2z)), 0.0))
        # ... and meets it with vanishing odd derivatives (one-sided
        # estimates with Richardson extrapolation)
        checks.append(_check("inverse_graph_odd_derivatives_at_axis",
                             self._pole_odd_derivatives(), tol_pole))
        report = {"kind": "bending_function", "a": a, "b": b, "eps": self.eps,
                  "flatness_order": self.flatness_order, "checks": checks}
        self.certification = report
        if not report_passed(report):
            failed = [c["name"] for c in checks if not c["passed"]]
            raise CertificationError(f"bending function certification failed: {failed}", report)
        return report

    def _inverse(self, phis):
        """z with phi(z) = value, vectorized by bisection."""
        out = np.empty_like(phis)
        for i, p in enumerate(phis):
            if p <= 0.0:
                out[i] = self.b
            elif p >= 1.0:
                out[i] = self.a
            else:
                out[i] = _opt.brentq(lambda z: self.phi(z) - p, self.a, self.b,
                                     xtol=1e-15, rtol=1e-15)
        return out

    def _pole_odd_derivatives(self):
        def estimate(h):
            zs = self._inverse(h * np.arange(6))
            d1 = float(np.array([-25, 48, -36, 16, -3, 0]) @ zs) / (12 * h)
            d3 = float(np.array([-5, 18, -24, 14, -3, 0]) @ zs) / (2 * h ** 3)
            return d1, d3
        h = 0.04
        d1a, d3a = estimate(h)
        d1b, d3b = estimate(h / 2)
        # 4th/2nd order one-sided stencils -> Richardson in h
        d1 = (16 * d1b - d1a) / 15.0
        d3 = (4 * d3b - d3a) / 3.0
        return max(abs(d1), abs(d3))


def bending_function(a, b, eps_factor=1.0, flatness_order=4, tol_flat=1e-8,
                     tol_pole=1e-3):
    """Certified bending function; raises CertificationError on failure."""
    bf = BendingFunction(a=a, b=b, eps=eps_factor * (b - a),
                         flatness_order=flatness_order, tol_flat=tol_flat)
    bf.certify(tol_pole=tol_pole)
    return bf


# ---------------------------------------------------------------------------
# Simple analytic baselines
# ---------------------------------------------------------------------------

def round_sphere(radius, n=2, N=513):
    """Round n-sphere of the given radius, arclength-parametrized."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    rho = float(radius)
    u = np.linspace(0.0, math.pi * rho, N)

    def ev(uq):
        uq = np.atleast_1d(np.asarray(uq, dtype=float))
        t = uq / rho
        return (rho * np.sin(t), -rho * np.cos(t),
                np.cos(t), np.sin(t),
                -np.sin(t) / rho, np.cos(t) / rho)

    r, z, dr, dz, d2r, d2z = ev(u)
    r = r.copy(); r[0] = r[-1] = 0.0
    return GeneratingProfile(n=n, topology=Topology.SPHERE, u=u, r=r, z=z,
                             dr=dr, dz=dz, d2r=d2r, d2z=d2z, evaluator=ev,
                             label=f"sphere(radius={rho}, n={n})")


def elliptic_torus(N=1024):
    """Torus of revolution with elliptic section, r = 3 + 2 cos u, z = sqrt(2) sin u."""
    u = np.linspace(0.0, 2.0 * math.pi, N, endpoint=False)

    def ev(uq):
        uq = np.atleast_1d(np.asarray(uq, dtype=float))
        s2 = math.sqrt(2.0)
        return (3.0 + 2.0 * np.cos(uq), s2 * np.sin(uq),
                -2.0 * np.sin(uq), s2 * np.cos(uq),
                -2.0 * np.cos(uq), -s2 * np.sin(uq))

    r, z, dr, dz, d2r, d2z = ev(u)
    return GeneratingProfile(n=2, topology=Topology.TORUS, u=u, r=r, z=z,
                             dr=dr, dz=dz, d2r=d2r, d2z=d2z,
                             period=2.0 * math.pi, evaluator=ev,
                             label="elliptic_torus")


def elliptic_torus_H_closed_form(u):
    """Closed-form mean curvature of the elliptic torus."""
    u = np.asarray(u, dtype=float)
    return (np.cos(u / 2) ** 2 * (5 + 2 * np.cos(u) - np.cos(2 * u))
            / ((3 + 2 * np.cos(u)) * (1 + np.sin(u) ** 2) ** 1.5))


# ---------------------------------------------------------------------------
# Capped necks
# ---------------------------------------------------------------------------

class _NeckFamily:
    """Closed-form neck radius r(z) with two derivatives."""

    def __init__(self, name, r, dr, d2r, n):
        self.name, self.r, self.dr, self.d2r, self.n = name, r, dr, d2r, n


def _catenoid_family():
    return _NeckFamily("catenoid", np.cosh, np.sinh, np.cosh, n=2)


def _paraboloid_family():
    return _NeckFamily("paraboloid",
                       lambda z: 2.0 + np.asarray(z) ** 2 / 8.0,
                       lambda z: np.asarray(z) / 4.0,
                       lambda z: np.full_like(np.asarray(z, dtype=float), 0.25),
                       n=3)


class _CappedCurve:
    """Closed-form generating curve of a capped neck (northern half).

    The full radius is rho(z) = r(z) on |z| <= a and r(z) * phi(|z|)
    beyond; near the pole the graph degenerates, so the cap is handled
    in the regular variable tau = sqrt(b - z).
    """

    def __init__(self, family, bf):
        self.family = family
        self.bf = bf
        self.a, self.b = bf.a, bf.b

    # P = rho^2 = r^2 Q with two derivatives (cap region, z in [a, b])
    def _P(self, z):
        r, dr, d2r = self.family.r(z), self.family.dr(z), self.family.d2r(z)
        Q, dQ, d2Q = self.bf.Q(z), self.bf.dQ(z), self.bf.d2Q(z)
        P = r * r * Q
        dP = 2 * r * dr * Q + r * r * dQ
        d2P = 2 * dr * dr * Q + 2 * r * d2r * Q + 4 * r * dr * dQ + r * r * d2Q
        return P, dP, d2P

    def rho(self, z):
        z = np.asarray(z, dtype=float)
        neck = z <= self.a
        out = np.empty_like(z)
        out[neck] = self.family.r(z[neck])
        P, _, _ = self._P(z[~neck])
        out[~neck] = np.sqrt(np.maximum(P, 0.0))
        return out

    def graph_derivs(self, z):
        """(rho, rho', rho'') for z away from the pole."""
        z = np.asarray(z, dtype=float)
        neck = z <= self.a
        rho = np.empty_like(z); d1 = np.empty_like(z); d2 = np.empty_like(z)
        rho[neck] = self.family.r(z[neck])
        d1[neck] = self.family.dr(z[neck])
        d2[neck] = self.family.d2r(z[neck])
        if np.any(~neck):
            P, dP, d2P = self._P(z[~neck])
            rp = np.sqrt(P)
            rho[~neck] = rp
            d1[~neck] = dP / (2 * rp)
            d2[~neck] = d2P / (2 * rp) - dP * dP / (4 * P * rp)
        return rho, d1, d2

    # cap in the regular variable tau = sqrt(b - z)
    def cap_tau(self, tau):
        """(rho, drho/dtau, dz/dtau=-2 tau) on the cap."""
        tau = np.asarray(tau, dtype=float)
        z = self.b - tau * tau
        P, dP, _ = self._P(z)
        rho = np.sqrt(np.maximum(P, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            drho = np.where(tau > 0, -tau * dP / np.maximum(rho, 1e-300),
                            math.sqrt(self.pole_slope()))
        return rho, drho, -2.0 * tau

    def pole_slope(self):
        """d(rho^2)/d(b - z) at the pole; positive for a smooth closure."""
        rb = float(self.family.r(self.b))
        return -rb * rb * float(self.bf.dQ(self.b))

    def pole_curvature(self):
        return 2.0 / self.pole_slope()

    def samples_from_arclength(self, sigma, sigma_to_z, arc_to_tau, L_half):
        """Pointwise exact sample values at arclengths ``sigma`` from the
        equator (northern half, 0 <= sigma <= L_half)."""
        sigma = np.asarray(sigma, dtype=float)
        m = sigma.size
        r = np.empty(m); z = np.empty(m)
        dr = np.empty(m); dz = np.empty(m)
        lam1 = np.empty(m)
        s_junction = self._s_junction
        for i, s in enumerate(sigma):
            if s >= L_half - 1e-12 * L_half:
                # exact pole
                r[i], z[i] = 0.0, self.b
                dr[i], dz[i] = -1.0, 0.0
                lam1[i] = self.pole_curvature()
                continue
            if s <= s_junction:
                zz = float(sigma_to_z(s))
                zz = min(zz, self.a)
                rho, d1, d2 = self.graph_derivs(np.array([zz]))
                sp = math.hypot(float(d1[0]), 1.0)
                z[i], r[i] = zz, float(rho[0])
                dz[i] = 1.0 / sp
                dr[i] = float(d1[0]) / sp
                lam1[i] = -float(d2[0]) / sp ** 3
            else:
                q = L_half - s          # arclength from the pole
                tau = float(arc_to_tau(q))
                zz = self.b - tau * tau
                rho, d1, d2 = self.graph_derivs(np.array([zz]))
                sp = math.hypot(float(d1[0]), 1.0)
                z[i], r[i] = zz, float(rho[0])
                dz[i] = 1.0 / sp
                dr[i] = float(d1[0]) / sp
                lam1[i] = -float(d2[0]) / sp ** 3
        d2r = -lam1 * dz
        d2z = lam1 * dr
        return r, z, dr, dz, d2r, d2z


def _build_capped_profile(family, bf, N, label):
    """Assemble a Sphere-topology profile from a capped neck family."""
    if N < 256:
        raise ValueError("need N >= 256 samples")
    if N % 2 == 0:
        N += 1                      # keep an exact equator sample
    curve = _CappedCurve(family, bf)
    a, b = bf.a, bf.b

    # arclength tables: neck (by z) and cap (by tau, measured from pole)
    zg = np.linspace(0.0, a, 4097)
    _, d1, _ = curve.graph_derivs(zg)
    ds_neck = np.hypot(d1, 1.0)
    s_neck = _cumtrapz_simpson(zg, ds_neck)
    s_junction = float(s_neck[-1])

    tau_max = math.sqrt(b - a)
    tg = np.linspace(0.0, tau_max, 4097)
    rho_t, drho_t, dz_t = curve.cap_tau(tg)
    ds_cap = np.hypot(drho_t, dz_t)
    p_cap = _cumtrapz_simpson(tg, ds_cap)
    L_cap = float(p_cap[-1])
    L_half = s_junction + L_cap
    L = 2.0 * L_half

    sigma_to_z = _interp.CubicSpline(s_neck, zg)
    arc_to_tau = _interp.CubicSpline(p_cap, tg)
    curve._s_junction = s_junction

    u = np.linspace(0.0, L, N)
    mid = (N - 1) // 2
    sigma_north = u[mid:] - L_half
    rn, zn, drn, dzn, d2rn, d2zn = curve.samples_from_arclength(
        sigma_north, sigma_to_z, arc_to_tau, L_half)
    r = np.concatenate([rn[:0:-1], rn])
    z = np.concatenate([-zn[:0:-1], zn])
    dr = np.concatenate([-drn[:0:-1], drn])
    dz = np.concatenate([dzn[:0:-1], dzn])
    d2r = np.concatenate([d2rn[:0:-1], d2rn])
    d2z = np.concatenate([-d2zn[:0:-1], d2zn])
    r[0] = r[-1] = 0.0

    def ev(uq):
        uq = np.atleast_1d(np.asarray(uq, dtype=float))
        north = np.minimum(np.abs(uq - L_half), L_half)
        rr, zz, rd, zd, rdd, zdd = curve.samples_from_arclength(
            north, sigma_to_z, arc_to_tau, L_half)
        south = uq < L_half
        zz[south] *= -1.0
        rd[south] *= -1.0
        zdd[south] *= -1.0
        return rr, zz, rd, zd, rdd, zdd

    prof = GeneratingProfile(
        n=family.n, topology=Topology.SPHERE, u=u, r=r, z=z,
        dr=dr, dz=dz, d2r=d2r, d2z=d2z, evaluator=ev,
        breakpoints=(L_half - s_junction, L_half + s_junction),
        label=label)
    prof.neck_band = (L_half - s_junction, L_half + s_junction)
    prof.bending = bf
    return prof


def _cumtrapz_simpson(x, y):
    try:
        return np.concatenate([[0.0], _sciint.cumulative_simpson(y, x=x)])
    except AttributeError:  # older scipy
        return _sciint.cumtrapz(y, x=x, initial=0.0)


def _neck_mask(profile):
    lo, hi = profile.neck_band
    return (profile.u >= lo - 1e-12) & (profile.u <= hi + 1e-12)


def _evaluator_curvatures(profile, uq):
    r, z, dr, dz, d2r, d2z = profile.evaluator(uq)
    s2 = dr * dr + dz * dz
    lam1 = (d2z * dr - d2r * dz) / s2 ** 1.5
    lam2 = dz / (r * np.sqrt(s2))
    return CurvatureField(n=profile.n, lam1=lam1, lam2=lam2)


def _junction_jump(profile, field_name, side_u, delta=1e-3):
    """One-sided extrapolation mismatch of a curvature field at u = side_u.

    Uses the continuous evaluator at a fixed physical spacing so the
    certificate does not depend on the sample count.
    """
    offsets = delta * np.arange(1, 7)
    pl = np.polynomial.Polynomial.fit(
        -offsets, getattr(_evaluator_curvatures(profile, side_u - offsets), field_name), 3)
    ph = np.polynomial.Polynomial.fit(
        offsets, getattr(_evaluator_curvatures(profile, side_u + offsets), field_name), 3)
    return abs(float(pl(0.0) - ph(0.0)))


def capped_catenoid(a=1.0, b=2.0, bf=None, N=1025, positivity_floor=-1e-10):
    """Sphere made of a catenoidal neck (|z| <= a) and two bent caps.

    Mean curvature vanishes identically on the neck and is positive on
    the caps; the certificate verifies both, the neck minimality
    residual, the junction smoothness and embeddedness.
    """
    bf = bf or bending_function(a, b)
    prof = _build_capped_profile(_catenoid_family(), bf, N,
                                 label=f"capped_catenoid(a={a}, b={b})")
    cf = curvature_field(prof)
    neck = _neck_mask(prof)
    dr, dz, d2r, d2z = prof.derivatives()
    with np.errstate(divide="ignore"):
        drdz = dr[neck] / dz[neck]
        d2rdz2 = (d2r[neck] * dz[neck] - dr[neck] * d2z[neck]) / dz[neck] ** 3
    minimality = np.max(np.abs(drdz ** 2 + 1.0 - d2rdz2 * prof.r[neck]))
    checks = [
        _check("neck_minimality_residual", float(minimality), 1e-12),
        _check("neck_H_identically_zero", float(np.max(np.abs(cf.H[neck]))), 1e-12),
        _check("neck_A2_positive", float(np.min(cf.A2[neck])), 0.0, "min_above"),
        _check("H_nonnegative_everywhere", float(np.min(cf.H)), positivity_floor, "min_above"),
        _check("junction_jump_H", max(_junction_jump(prof, "H", prof.neck_band[0]),
                                      _junction_jump(prof, "H", prof.neck_band[1])), 1e-6),
        _check("junction_jump_lam1", max(_junction_jump(prof, "lam1", prof.neck_band[0]),
                                         _junction_jump(prof, "lam1", prof.neck_band[1])), 1e-6),
        _check("embedded", 1.0 if is_embedded(prof) else 0.0, 0.5, "min_above"),
    ]
    report = {"kind": "capped_catenoid", "a": a, "b": b, "n_samples": prof.n_samples,
              "checks": checks + bf.certification["checks"]}
    prof.certification = report
    if not report_passed(report):
        failed = [c["name"] for c in report["checks"] if not c["passed"]]
        raise CertificationError(f"capped catenoid certification failed: {failed}", report)
    return prof


def capped_paraboloid(a=1.0, b=2.0, bf=None, N=1025, positivity_floor=-1e-10):
    """Scalar-flat paraboloidal neck in R^4 (n = 3) closed by two bent caps.

    On the neck the principal curvatures are (-lam, 2 lam, 2 lam), so the
    scalar curvature R vanishes identically; the caps keep R >= 0 and
    H >= 0, both certified.
    """
    bf = bf or bending_function(a, b)
    prof = _build_capped_profile(_paraboloid_family(), bf, N,
                                 label=f"capped_paraboloid(a={a}, b={b})")
    cf = curvature_field(prof)
    neck = _neck_mask(prof)
    dr, dz, d2r, d2z = prof.derivatives()
    speed2 = dr ** 2 + dz ** 2
    S = 2.0 * prof.r * (d2z * dr - d2r * dz) + dz * speed2
    ratio = np.max(np.abs(cf.lam2[neck] + 2.0 * cf.lam1[neck]))
    checks = [
        _check("neck_S_residual", float(np.max(np.abs(S[neck]))), 1e-10),
        _check("neck_R_identically_zero", float(np.max(np.abs(cf.R[neck]))), 1e-12),
        _check("neck_principal_ratio", float(ratio), 1e-12),
        _check("cap_S_nonnegative", float(np.min(S[~neck])), positivity_floor, "min_above"),
        _check("R_nonnegative_everywhere", float(np.min(cf.R)), positivity_floor, "min_above"),
        _check("H_nonnegative_everywhere", float(np.min(cf.H)), positivity_floor, "min_above"),
        _check("junction_jump_H", max(_junction_jump(prof, "H", prof.neck_band[0]),
                                      _junction_jump(prof, "H", prof.neck_band[1])), 1e-6),
        _check("embedded", 1.0 if is_embedded(prof) else 0.0, 0.5, "min_above"),
    ]
    report = {"kind": "capped_paraboloid", "a": a, "b": b, "n_samples": prof.n_samples,
              "checks": checks + bf.certification["checks"]}
    prof.certification = report
    if not report_passed(report):
        failed = [c["name"] for c in report["checks"] if not c["passed"]]
        raise CertificationError(f"capped paraboloid certification failed: {failed}", report)
    return prof
