"""Monotone traveling fronts of phi'' + c*phi' + phi*(R - phi) = 0.

The profile connecting the plateau R (at -inf) to 0 (at +inf) with speed
c = lam + R/lam is computed to near machine accuracy and pinned in space by
its far-field tail: e^{lam z} phi(z) -> 1 for lam < sqrt(R), and
z^{-1} e^{lam z} phi(z) -> 1 at the critical rate lam = sqrt(R).

Construction: the heteroclinic orbit is integrated forward in z from the
plateau saddle along its one-dimensional unstable manifold (the only
direction in which the orbit is numerically attracting at both ends), the
tail-mode amplitude is extracted from the deep tail, and the profile is then
translated so the normalization holds exactly.  Integrating backward from a
truncated tail expansion instead is unstable: any seed error excites the
plateau's backward-growing mode (rate (c + sqrt(c^2+4R))/2 per unit z) and
destroys the plateau long before typical z_min; see the regression tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import ConvergenceError, DomainError

SUPERCRITICAL = "supercritical"
CRITICAL = "critical"

_SEED_EPS_FRAC = 1e-10  # plateau offset seeding the unstable manifold


@dataclass(frozen=True)
class WaveProfile:
    """Sampled traveling front with tail-exact evaluation off the grid.

    Immutable after construction and safe to share between threads.  evaluate()
    is total on the real line: cubic interpolation on [z_min, z_max], the
    stored two-term tail expansion beyond z_max, and the exponential plateau
    approach R - K*e^{nu_plus*(z - z_min)} below z_min.
    """

    lam: float
    R: float
    c: float
    normalization: str  # SUPERCRITICAL or CRITICAL
    z: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    tail_coeffs: dict = field(repr=False)
    plateau_rate: float  # nu_plus: approach rate to the plateau
    plateau_coeff: float  # K in R - K*e^{nu_plus*(z - z_min)}
    tail_constant: float  # critical case: k in (z + k)e^{-lam z}; 0.0 otherwise
    _spline: CubicSpline = field(repr=False, compare=False)

    @property
    def z_min(self) -> float:
        return float(self.z[0])

    @property
    def z_max(self) -> float:
        return float(self.z[-1])

    def evaluate(self, z):
        """Front value at arbitrary z (scalar or array)."""
        z = np.asarray(z, dtype=float)
        scalar = z.ndim == 0
        z = np.atleast_1d(z)
        out = np.empty_like(z)
        left = z < self.z_min
        right = z > self.z_max
        mid = ~(left | right)
        out[mid] = self._spline(z[mid])
        if left.any():
            out[left] = self.R - self.plateau_coeff * np.exp(
                self.plateau_rate * (z[left] - self.z_min)
            )
        if right.any():
            out[right] = self._tail(z[right])
        return float(out[0]) if scalar else out

    def _tail(self, z):
        tc = self.tail_coeffs
        if self.normalization == CRITICAL:
            raw = (z + tc["k"]) * np.exp(-self.lam * z)
        else:
            raw = np.exp(-self.lam * z) + tc["c2"] * np.exp(-tc["rho"] * z)
        return tc["continuity"] * raw

    def inverse_level(self, b: float, tol: float = 1e-12) -> float:
        """Unique z with phi(z) = b, found by monotone bracketing + brentq."""
        if not (0.0 < b < self.R):
            raise DomainError(f"level must lie in (0, {self.R}), got {b}")
        phi_lo, phi_hi = float(self.phi[0]), float(self.phi[-1])
        if b >= phi_lo:
            # Above the leftmost sample: invert the stored plateau approach.
            return self.z_min + math.log((self.R - b) / self.plateau_coeff) / self.plateau_rate
        if b <= phi_hi:
            hi = self.z_max + (math.log(phi_hi / b) + 50.0) / self.lam
            return brentq(lambda x: self.evaluate(x) - b, self.z_max, hi, xtol=tol)
        return brentq(lambda x: self.evaluate(x) - b, self.z_min, self.z_max, xtol=tol)


def _march(state, lam, R, h, stop, z_hard_cap=40000.0):
    """RK4-march the orbit forward from `state` until stop(z, phi) is true."""
    c = lam + R / lam
    z, phi, dphi = state
    zs, ps, ds = [z], [phi], [dphi]
    h6 = h / 6.0
    while not stop(z, phi):
        if z > z_hard_cap:
            raise ConvergenceError(
                f"orbit failed to terminate within z <= {z_hard_cap} "
                f"(lam={lam}, R={R}); last phi={phi:.3e}"
            )
        k1p = dphi
        k1d = -c * dphi - phi * (R - phi)
        p2 = phi + 0.5 * h * k1p
        d2 = dphi + 0.5 * h * k1d
        k2p = d2
        k2d = -c * d2 - p2 * (R - p2)
        p3 = phi + 0.5 * h * k2p
        d3 = dphi + 0.5 * h * k2d
        k3p = d3
        k3d = -c * d3 - p3 * (R - p3)
        p4 = phi + h * k3p
        d4 = dphi + h * k3d
        k4p = d4
        k4d = -c * d4 - p4 * (R - p4)
        phi += h6 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        dphi += h6 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
        z += h
        zs.append(z)
        ps.append(phi)
        ds.append(dphi)
    return zs, ps, ds


def compute_profile(lam, R, z_min=-40.0, z_max=40.0, dz=1e-3, tol=1e-6) -> WaveProfile:
    """Compute the tail-normalized front for decay rate lam in (0, sqrt(R)].

    Raises DomainError for lam > sqrt(R) (no monotone front), ConvergenceError
    when the requested window/tolerance cannot be met (e.g. z_min too shallow
    to reach the plateau within tol).

    Note on the critical rate lam = sqrt(R): the normalization fixes the limit
    z^{-1} e^{lam z} phi(z) -> 1, but the finite-z ratio approaches it only
    like 1 + k/z where k = tail_constant is an O(1) number determined by the
    equation itself (k = -1.9524 for R = 1).  The ratio at z_max is therefore
    recorded, not enforced.
    """
    sqrtR = math.sqrt(R) if R > 0 else float("nan")
    if not (R > 0 and 0.0 < lam <= sqrtR):
        raise DomainError(f"need R > 0 and 0 < lam <= sqrt(R), got lam={lam}, R={R}")
    if not (z_min < 0.0 < z_max):
        raise DomainError(f"window must straddle 0, got [{z_min}, {z_max}]")
    if dz <= 0:
        raise DomainError(f"dz must be positive, got {dz}")
    critical = abs(lam - sqrtR) <= 1e-13 * sqrtR
    c = lam + R / lam
    mu = R / lam  # companion decay root; equals lam at criticality

    h = min(dz, 1e-3)
    phi_stop = 1e-13 * R
    nu_p = (-c + math.sqrt(c * c + 4.0 * R)) / 2.0
    eps0 = _SEED_EPS_FRAC * R
    zs, ps, ds = _march((0.0, R - eps0, -eps0 * nu_p), lam, R, h,
                        stop=lambda z, phi: phi <= phi_stop)
    po = np.array(ps)

    # Tail-mode extraction on the deep-tail window phi in [1e-12 R, 1e-9 R].
    i1 = int(np.searchsorted(-po, -1e-9 * R))
    i2 = int(np.searchsorted(-po, -1e-12 * R))
    zo, do = np.array(zs), np.array(ds)
    if i2 - i1 < 10:
        raise ConvergenceError("tail window too short for mode extraction")
    if critical:
        g = np.exp(lam * zo[i1:i2]) * po[i1:i2]
        c1, c0 = np.polyfit(zo[i1:i2], g, 1)
        if c1 <= 0:
            raise ConvergenceError(f"degenerate critical tail fit (c1={c1})")
        shift = math.log(c1) / lam
        k_const = shift + c0 / c1
    else:
        proj = (mu * po[i1:i2] + do[i1:i2]) / (mu - lam) * np.exp(lam * zo[i1:i2])
        alpha = float(np.mean(proj))
        spread = float(np.ptp(proj)) / alpha
        if alpha <= 0 or spread > 1e-5:
            raise ConvergenceError(
                f"tail-mode amplitude not resolved (alpha={alpha:.3e}, spread={spread:.1e})"
            )
        shift = math.log(alpha) / lam
        k_const = 0.0

    z_need = z_max + shift + 2.0
    if z_need > zo[-1]:
        # Deep tail reaches past the extraction depth: keep marching.
        zs2, ps2, _ = _march((zs[-1], ps[-1], ds[-1]), lam, R, h,
                             stop=lambda z, phi: z >= z_need or phi <= 0.0)
        zo = np.concatenate([zo, zs2[1:]])
        po = np.concatenate([po, ps2[1:]])
        if po[-1] <= 0.0:
            raise ConvergenceError("orbit underflowed before covering z_max; decrease z_max")

    orbit_spline = CubicSpline(zo, po)
    n = int(round((z_max - z_min) / dz))
    zg = z_min + dz * np.arange(n + 1)
    w = zg + shift
    vals = np.empty_like(zg)
    on_orbit = w >= 0.0
    vals[on_orbit] = orbit_spline(w[on_orbit])
    vals[~on_orbit] = R - eps0 * np.exp(nu_p * w[~on_orbit])

    # Two-term far-field expansion for evaluation beyond z_max.
    if critical:
        tail = {"k": k_const}
        raw_at_zmax = (z_max + k_const) * math.exp(-lam * z_max)
    else:
        rho = min(mu, 2.0 * lam)
        jfit = zg >= z_max - 5.0 / lam
        resid = vals[jfit] - np.exp(-lam * zg[jfit])
        basis = np.exp(-rho * zg[jfit])
        c2 = float(basis @ resid / (basis @ basis))
        tail = {"rho": rho, "c2": c2}
        raw_at_zmax = math.exp(-lam * z_max) + c2 * math.exp(-rho * z_max)
    tail["continuity"] = float(vals[-1] / raw_at_zmax)

    profile = WaveProfile(
        lam=lam, R=R, c=c, normalization=CRITICAL if critical else SUPERCRITICAL,
        z=zg, phi=vals, tail_coeffs=tail, plateau_rate=nu_p,
        plateau_coeff=float(R - vals[0]), tail_constant=k_const,
        _spline=CubicSpline(zg, vals),
    )
    _validate_profile(profile, tol, dz)
    return profile


def _validate_profile(p: WaveProfile, tol, dz):
    vals, zg = p.phi, p.z
    if not np.all(np.diff(vals) < 0):
        i = int(np.argmax(np.diff(vals) >= 0))
        raise ConvergenceError(f"profile not strictly decreasing near z={zg[i]:.3f}")
    if not (np.all(vals > 0) and np.all(vals < p.R)):
        raise ConvergenceError("profile leaves the band (0, R)")
    if vals[0] <= p.R * (1.0 - tol):
        raise ConvergenceError(
            f"plateau not reached at z_min: phi({zg[0]}) = {vals[0]:.9g} "
            f"<= R(1-tol); deepen z_min"
        )
    resid = ode_residual(p)
    bound = tol * max(p.R, 1.0)
    if np.max(np.abs(resid)) >= bound:
        raise ConvergenceError(
            f"ODE residual {np.max(np.abs(resid)):.3e} exceeds {bound:.3e} "
            f"(dz={dz} too coarse for tol={tol}?)"
        )
    if p.normalization == SUPERCRITICAL:
        ratio = math.exp(p.lam * p.z_max) * vals[-1]
        if abs(ratio - 1.0) >= tol:
            raise ConvergenceError(
                f"tail normalization off at z_max: e^(lam z)phi = {ratio:.9g}; "
                "increase z_max"
            )


def ode_residual(profile: WaveProfile) -> np.ndarray:
    """Centered-difference residual of the wave ODE at interior grid nodes."""
    phi, z = profile.phi, profile.z
    dz = z[1] - z[0]
    d2 = (phi[2:] - 2.0 * phi[1:-1] + phi[:-2]) / dz**2
    d1 = (phi[2:] - phi[:-2]) / (2.0 * dz)
    return d2 + profile.c * d1 + phi[1:-1] * (profile.R - phi[1:-1])


def normalization_ratio(profile: WaveProfile, z):
    """e^{lam z} phi(z) (supercritical) or z^{-1} e^{lam z} phi(z) (critical)."""
    z = np.asarray(z, dtype=float)
    r = np.exp(profile.lam * z) * profile.evaluate(z)
    if profile.normalization == CRITICAL:
        r = r / z
    return float(r) if r.ndim == 0 else r


def write_profile_csv(profile: WaveProfile, path):
    """Export (z, phi) as CSV with the kpplab schema header."""
    with open(path, "w") as f:
        f.write("# kpplab-csv v1\n")
        f.write("z,phi\n")
        for zi, pi in zip(profile.z, profile.phi):
            f.write(f"{zi:.17g},{pi:.17g}\n")
