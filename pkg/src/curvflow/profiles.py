"""Differential geometry of hypersurfaces of revolution in R^(n+1).

A hypersurface of revolution is generated by rotating a plane curve
c(u) = (r(u), z(u)) about the z-axis.  This module holds the profile
container and the discrete geometric operators built on it: principal
curvatures, the axisymmetric Laplace-Beltrami operator, surface
integrals, area, enclosed volume and the nonlocal flow terms.

Sign conventions: the unit normal N = (dz, -dr)/|c'| points away from
the rotation axis, so a round sphere traversed south pole -> north pole
has both principal curvatures equal to +1/radius.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as _sciint
from scipy import sparse


class Topology(str, enum.Enum):
    SPHERE = "sphere"   # u in [u0, u1], r = 0 exactly at both endpoints
    TORUS = "torus"     # u periodic, no endpoint duplication


class DerivativeSource(str, enum.Enum):
    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "finite_difference"


class FlowVariant(str, enum.Enum):
    VOLUME_PRESERVING = "vp"
    AREA_PRESERVING = "ap"
    UNCONSTRAINED = "none"


class ProfileError(ValueError):
    pass


def sphere_area_constant(n):
    """Area of the unit (n-1)-sphere (2*pi for n=2, 4*pi for n=3)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def ball_volume_constant(n):
    """Volume of the unit n-ball (pi for n=2, 4*pi/3 for n=3)."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


@dataclass
class GeneratingProfile:
    """Sampled generating curve of a hypersurface of revolution.

    ``u`` is the curve parameter (uniformly spaced), ``r``/``z`` the
    sample positions.  Analytic profiles additionally carry exact
    first/second u-derivative arrays and, optionally, a continuous
    ``evaluator(u) -> (r, z, dr, dz, d2r, d2z)`` used by adaptive
    quadrature and resampling tests.  FiniteDifference profiles derive
    all u-derivatives from the samples (4th-order stencils, periodic
    wrap on the torus, reflection closure at sphere poles).
    """

    n: int
    topology: Topology
    u: np.ndarray
    r: np.ndarray
    z: np.ndarray
    dr: np.ndarray | None = None
    dz: np.ndarray | None = None
    d2r: np.ndarray | None = None
    d2z: np.ndarray | None = None
    period: float | None = None          # torus only: u-period
    evaluator: object = None             # optional continuous analytic evaluator
    breakpoints: tuple = ()              # parameter values where the evaluator is only C^k
    label: str = ""
    _valid: bool = field(default=False, repr=False)

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.r = np.asarray(self.r, dtype=float)
        self.z = np.asarray(self.z, dtype=float)
        for name in ("dr", "dz", "d2r", "d2z"):
            v = getattr(self, name)
            if v is not None:
                setattr(self, name, np.asarray(v, dtype=float))
        self._validate()

    # -- basic structure ------------------------------------------------

    @property
    def n_samples(self):
        return self.u.size

    @property
    def derivative_source(self):
        if self.dr is not None:
            return DerivativeSource.ANALYTIC
        return DerivativeSource.FINITE_DIFFERENCE

    @property
    def spacing(self):
        return float(self.u[1] - self.u[0])

    def _validate(self):
        if self.n < 2:
            raise ProfileError("hypersurface dimension n must be >= 2")
        N = self.u.size
        if self.r.size != N or self.z.size != N:
            raise ProfileError("u, r, z must have equal length")
        if N < 5:
            raise ProfileError("need at least 5 samples")
        du = np.diff(self.u)
        if np.any(du <= 0):
            raise ProfileError("u grid must be strictly increasing")
        h = du[0]
        if np.max(np.abs(du - h)) > 1e-8 * abs(h):
            raise ProfileError("u grid must be uniformly spaced")
        if self.topology is Topology.TORUS:
            if self.period is None:
                self.period = float(self.u[-1] - self.u[0] + h)
        if self.topology is Topology.SPHERE:
            if self.r[0] != 0.0 or self.r[-1] != 0.0:
                raise ProfileError("sphere profile must meet the axis exactly at both endpoint samples")
            if np.any(self.r[1:-1] <= 0.0):
                raise ProfileError("r must be strictly positive away from the poles")
        else:
            if np.any(self.r <= 0.0):
                raise ProfileError("torus profile must not touch the axis")
        dr, dz, _, _ = self.derivatives()
        speed2 = dr * dr + dz * dz
        if np.any(speed2 <= 0.0):
            raise ProfileError("degenerate parametrization: |c'| = 0 at some sample")
        self._valid = True

    # -- derivative provisioning ----------------------------------------

    def derivatives(self):
        """Per-sample (dr, dz, d2r, d2z) with respect to u."""
        if self.dr is not None:
            return self.dr, self.dz, self.d2r, self.d2z
        h = self.spacing
        if self.topology is Topology.TORUS:
            dr = _fd1_periodic(self.r, h)
            dz = _fd1_periodic(self.z, h)
            d2r = _fd2_periodic(self.r, h)
            d2z = _fd2_periodic(self.z, h)
        else:
            dr = _fd1_reflected(self.r, h, parity=-1)
            dz = _fd1_reflected(self.z, h, parity=+1)
            d2r = _fd2_reflected(self.r, h, parity=-1)
            d2z = _fd2_reflected(self.z, h, parity=+1)
        return dr, dz, d2r, d2z

    def speed(self):
        dr, dz, _, _ = self.derivatives()
        return np.hypot(dr, dz)

    def unit_normal(self):
        """Outward unit normal components (N_r, N_z) at every sample."""
        dr, dz, _, _ = self.derivatives()
        s = np.hypot(dr, dz)
        nr, nz = dz / s, -dr / s
        if self.topology is Topology.SPHERE:
            nr[0] = nr[-1] = 0.0
            nz[0] = -math.copysign(1.0, dr[0])
            nz[-1] = -math.copysign(1.0, dr[-1])
        return nr, nz

    def replaced(self, **kw):
        """Copy with some fields replaced (derivative arrays dropped unless given)."""
        args = dict(n=self.n, topology=self.topology, u=self.u, r=self.r, z=self.z,
                    period=self.period, label=self.label)
        args.update(kw)
        return GeneratingProfile(**args)


# ---------------------------------------------------------------------------
# Finite-difference stencils (4th order).  Sphere profiles are closed at the
# poles by reflection ghosts: r extends oddly (r = 0 on the axis), z and any
# axisymmetric scalar field extend evenly.
# ---------------------------------------------------------------------------

_C1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_C2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


def _pad_periodic(f):
    return np.concatenate([f[-2:], f, f[:2]])


def _pad_reflected(f, parity):
    # ghosts f[-k] = parity * f[k] about each endpoint (odd reflection
    # assumes the endpoint value is the symmetry value, e.g. r = 0)
    left = parity * f[2:0:-1]
    right = parity * f[-3:-1][::-1]
    return np.concatenate([left, f, right])


def _apply5(fp, coef, h, power):
    out = (coef[0] * fp[:-4] + coef[1] * fp[1:-3] + coef[2] * fp[2:-2]
           + coef[3] * fp[3:-1] + coef[4] * fp[4:])
    return out / h ** power


def _fd1_periodic(f, h):
    return _apply5(_pad_periodic(f), _C1, h, 1)


def _fd2_periodic(f, h):
    return _apply5(_pad_periodic(f), _C2, h, 2)


def _fd1_reflected(f, h, parity):
    return _apply5(_pad_reflected(f, parity), _C1, h, 1)


def _fd2_reflected(f, h, parity):
    return _apply5(_pad_reflected(f, parity), _C2, h, 2)


_D1_CACHE = {}


def first_derivative_matrix(N, h, topology, parity=+1):
    """Sparse 4th-order first-derivative operator matching derivatives().

    ``parity`` selects the reflection rule at sphere poles (+1 for even
    fields such as z, -1 for odd fields such as r); ignored on the torus.
    """
    key = (N, float(h), topology, parity)
    D = _D1_CACHE.get(key)
    if D is not None:
        return D
    rows, cols, vals = [], [], []
    for i in range(N):
        for k, c in zip(range(-2, 3), _C1):
            if c == 0.0:
                continue
            j = i + k
            sgn = 1.0
            if topology is Topology.TORUS:
                j %= N
            else:
                if j < 0:
                    j = -j
                    sgn = parity
                elif j >= N:
                    j = 2 * N - 2 - j
                    sgn = parity
            rows.append(i); cols.append(j); vals.append(sgn * c / h)
    D = sparse.csr_matrix((vals, (rows, cols)), shape=(N, N))
    _D1_CACHE[key] = D
    return D


# ---------------------------------------------------------------------------
# Curvature
# ---------------------------------------------------------------------------

@dataclass
class CurvatureField:
    """Per-sample principal curvatures and the derived scalar invariants."""

    n: int
    lam1: np.ndarray   # curvature of the generating curve
    lam2: np.ndarray   # rotational principal curvature (multiplicity n-1)

    @property
    def H(self):
        return self.lam1 + (self.n - 1) * self.lam2

    @property
    def A2(self):
        return self.lam1 ** 2 + (self.n - 1) * self.lam2 ** 2

    @property
    def C(self):
        return self.lam1 ** 3 + (self.n - 1) * self.lam2 ** 3

    @property
    def R(self):
        return self.H ** 2 - self.A2


def evaluate_profile(profile, i):
    """(r, z, dr, dz, d2r, d2z) at sample index i."""
    N = profile.n_samples
    if not -N <= i < N:
        raise IndexError("sample index out of range")
    dr, dz, d2r, d2z = profile.derivatives()
    return (profile.r[i], profile.z[i], dr[i], dz[i], d2r[i], d2z[i])


def principal_curvatures(profile, i=None):
    """Principal curvatures (lam1, lam2); vectorized when i is None.

    At sphere poles lam2 is set by the umbilic limit lam2 -> lam1.
    """
    dr, dz, d2r, d2z = profile.derivatives()
    s2 = dr * dr + dz * dz
    s = np.sqrt(s2)
    lam1 = (d2z * dr - d2r * dz) / (s2 * s)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam2 = dz / (profile.r * s)
    if profile.topology is Topology.SPHERE:
        # umbilic limit at the poles; lam1 there reduces to d2z*dr/|dr|^3
        for k in (0, -1):
            lam1[k] = d2z[k] * dr[k] / abs(dr[k]) ** 3
            lam2[k] = lam1[k]
        bad = ~np.isfinite(lam2)
        bad[0] = bad[-1] = False
        if np.any(bad):
            raise ProfileError("r = 0 at a non-pole sample")
    elif not np.all(np.isfinite(lam2)):
        raise ProfileError("r = 0 on a torus profile")
    if i is None:
        return lam1, lam2
    return lam1[i], lam2[i]


def curvature_field(profile):
    lam1, lam2 = principal_curvatures(profile)
    return CurvatureField(n=profile.n, lam1=lam1, lam2=lam2)


# ---------------------------------------------------------------------------
# Laplace-Beltrami operator for axisymmetric scalar fields
# ---------------------------------------------------------------------------

def laplace_beltrami(profile, f, method="fd2"):
    """Axisymmetric Laplacian of a per-sample field f.

    Delta f = r^(1-n)/|c'| d/du ( r^(n-1) |c'|^(-1) df/du ).

    ``fd2`` is the conservative 2nd-order discretization used during
    evolution; ``spectral`` (torus only) differentiates f by FFT and is
    spectrally accurate on analytic profiles.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != profile.u.shape:
        raise ProfileError("field length does not match the profile grid")
    n, h = profile.n, profile.spacing
    dr, dz, d2r, d2z = profile.derivatives()
    s = np.hypot(dr, dz)
    if method == "spectral":
        if profile.topology is not Topology.TORUS:
            raise ProfileError("spectral Laplacian requires a periodic profile")
        N = f.size
        # wavenumbers for period P sampled at spacing h: 2*pi*i*m/P
        P = profile.period
        m = np.fft.rfftfreq(N, d=1.0 / N)
        k = 2.0j * np.pi * m / P
        F = np.fft.rfft(f)
        f1 = np.fft.irfft(k * F, n=N)
        f2 = np.fft.irfft(k * k * F, n=N)
        coef = (n - 1) * dr / (profile.r * s * s) - (dr * d2r + dz * d2z) / s ** 4
        return f2 / (s * s) + coef * f1
    if method != "fd2":
        raise ValueError(f"unknown method {method!r}")
    w = profile.r ** (n - 1) / s
    if profile.topology is Topology.TORUS:
        fp = np.concatenate([f[-1:], f, f[:1]])
        wp = np.concatenate([w[-1:], w, w[:1]])
        wm = 0.5 * (wp[:-2] + wp[1:-1])
        wpl = 0.5 * (wp[1:-1] + wp[2:])
        flux = wpl * (fp[2:] - fp[1:-1]) - wm * (fp[1:-1] - fp[:-2])
        return flux / (profile.r ** (n - 1) * s * h * h)
    # sphere: poles by the smooth limit Delta f -> n f''(0)
    out = np.empty_like(f)
    wm = 0.5 * (w[:-2] + w[1:-1])
    wpl = 0.5 * (w[1:-1] + w[2:])
    out[1:-1] = (wpl * (f[2:] - f[1:-1]) - wm * (f[1:-1] - f[:-2])) / (
        profile.r[1:-1] ** (n - 1) * s[1:-1] * h * h)
    ds0 = h * s[0]
    ds1 = h * s[-1]
    out[0] = 2.0 * n * (f[1] - f[0]) / (ds0 * ds0)
    out[-1] = 2.0 * n * (f[-2] - f[-1]) / (ds1 * ds1)
    return out


# ---------------------------------------------------------------------------
# Quadrature, area, enclosed volume, global terms
# ---------------------------------------------------------------------------

def quadrature_weights(profile):
    """Weights W so that integral over u of g(u) du ~= sum(W * g).

    Torus: periodic trapezoid (spectrally accurate for smooth data).
    Sphere: trapezoid plus the Euler-Maclaurin endpoint correction
    -h^2/12 (g'(b) - g'(a)) with one-sided 4th-order derivatives, which
    restores O(h^4) accuracy.  The weights are shared by the integrals
    and by the discrete area/volume gradients in the flow engine.
    """
    N, h = profile.n_samples, profile.spacing
    if profile.topology is Topology.TORUS:
        return np.full(N, h)
    W = np.full(N, h)
    W[0] = W[-1] = 0.5 * h
    # I ~= trap + h^2/12 * g'(a) - h^2/12 * g'(b), one-sided 4th-order g'
    c = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    W[:5] += (h / 12.0) * c
    W[-5:] += (h / 12.0) * c[::-1]
    return W


def integrate(profile, f, method="grid", return_error=False):
    """Surface integral of an axisymmetric scalar field.

    integral_M f dmu = sigma_(n-1) * integral f(u) r^(n-1) |c'| du.

    ``f`` is a per-sample array for the grid rule, or a callable f(u)
    for the adaptive rule (requires an analytic evaluator).
    """
    n = profile.n
    sig = sphere_area_constant(n)
    if method == "grid":
        g = np.asarray(f, dtype=float) * profile.r ** (n - 1) * profile.speed()
        W = quadrature_weights(profile)
        val = sig * float(W @ g)
        # crude a-priori estimate: composite rule of order >= 4
        err = sig * profile.spacing ** 4 * float(np.max(np.abs(g))) * (
            profile.u[-1] - profile.u[0] + profile.spacing)
        return (val, err) if return_error else val
    if method != "adaptive":
        raise ValueError(f"unknown method {method!r}")
    if profile.evaluator is None:
        raise ProfileError("adaptive quadrature needs an analytic evaluator")
    fun = f if callable(f) else None
    if fun is None:
        raise ProfileError("adaptive quadrature needs a callable integrand")

    def integrand(u):
        r, z, dr, dz, d2r, d2z = profile.evaluator(np.atleast_1d(u))
        return float(fun(u) * r[0] ** (n - 1) * np.hypot(dr[0], dz[0]))

    a, b = _param_range(profile)
    pts = [p for p in profile.breakpoints if a < p < b]
    val, err = _sciint.quad(integrand, a, b, points=pts or None, limit=200)
    val *= sig
    err *= sig
    return (val, err) if return_error else val


def _param_range(profile):
    if profile.topology is Topology.TORUS:
        return float(profile.u[0]), float(profile.u[0] + profile.period)
    return float(profile.u[0]), float(profile.u[-1])


def area(profile, method="grid"):
    if method == "adaptive":
        return integrate(profile, lambda u: 1.0, method="adaptive")
    return integrate(profile, np.ones_like(profile.u))


def signed_enclosed_volume(profile):
    """Signed volume V = omega_n * integral r^n z' du (grid rule)."""
    _, dz, _, _ = profile.derivatives()
    W = quadrature_weights(profile)
    return ball_volume_constant(profile.n) * float(W @ (profile.r ** profile.n * dz))


def enclosed_volume(profile):
    """Enclosed volume (orientation corrected by sign)."""
    return abs(signed_enclosed_volume(profile))


def _curvature_callable(profile):
    """H(u) from the continuous analytic evaluator."""

    def H(u):
        r, z, dr, dz, d2r, d2z = profile.evaluator(np.atleast_1d(float(u)))
        s2 = dr * dr + dz * dz
        lam1 = (d2z * dr - d2r * dz) / s2 ** 1.5
        lam2 = dz / (r * np.sqrt(s2))
        return float(lam1[0] + (profile.n - 1) * lam2[0])

    return H


def global_term(profile, variant, method=None):
    """Nonlocal velocity offset h for the requested flow variant.

    Volume preserving: h = integral(H) / area.
    Area preserving:   h = integral(H^2) / integral(H).
    Unconstrained:     h = 0.
    """
    variant = FlowVariant(variant)
    if variant is FlowVariant.UNCONSTRAINED:
        return 0.0
    if method is None:
        method = "adaptive" if profile.evaluator is not None else "grid"
    if method == "grid":
        H = curvature_field(profile).H
        intH = integrate(profile, H)
        if variant is FlowVariant.VOLUME_PRESERVING:
            a = area(profile)
            if a <= 0:
                raise ProfileError("area must be positive")
            return intH / a
        intH2 = integrate(profile, H * H)
    else:
        Hfun = _curvature_callable(profile)
        intH = integrate(profile, lambda u: Hfun(u), method="adaptive")
        if variant is FlowVariant.VOLUME_PRESERVING:
            return intH / area(profile, method="adaptive")
        intH2 = integrate(profile, lambda u: Hfun(u) ** 2, method="adaptive")
    if intH <= 0.0:
        raise ProfileError("area-preserving flow undefined: integral of H is not positive")
    return intH2 / intH


# ---------------------------------------------------------------------------
# Embeddedness
# ---------------------------------------------------------------------------

def is_embedded(profile, block=512):
    """Segment-pair self-intersection test of the generating polyline."""
    r, z = profile.r, profile.z
    if profile.topology is Topology.TORUS:
        p = np.column_stack([np.append(r, r[0]), np.append(z, z[0])])
    else:
        p = np.column_stack([r, z])
    a = p[:-1]
    b = p[1:]
    M = a.shape[0]
    d = b - a
    for i0 in range(0, M, block):
        i1 = min(i0 + block, M)
        ai = a[i0:i1, None, :]
        di = d[i0:i1, None, :]
        aj = a[None, :, :]
        dj = d[None, :, :]
        w = aj - ai
        den = di[..., 0] * dj[..., 1] - di[..., 1] * dj[..., 0]
        s_num = w[..., 0] * dj[..., 1] - w[..., 1] * dj[..., 0]
        t_num = w[..., 0] * di[..., 1] - w[..., 1] * di[..., 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            s_par = s_num / den
            t_par = t_num / den
        hit = (np.abs(den) > 0) & (s_par > 0) & (s_par < 1) & (t_par > 0) & (t_par < 1)
        idx_i = np.arange(i0, i1)[:, None]
        idx_j = np.arange(M)[None, :]
        gap = np.abs(idx_i - idx_j)
        if profile.topology is Topology.TORUS:
            gap = np.minimum(gap, M - gap)
        hit &= gap > 1
        if np.any(hit):
            return False
    return True
