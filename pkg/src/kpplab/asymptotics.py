"""Closed-form spreading speeds, decay exponents and logarithmic-delay laws.

Everything here is exact arithmetic on the model parameters (a, beta, eta) of a
KPP front chasing a shifting growth discontinuity x = X(t) = beta*t - eta*log(t+1),
with growth rate 1 ahead of X(t) and 1-a behind it.  These formulas are the
ground truth the simulation results are judged against.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, RegimeError, UnsupportedRegimeError

DEFAULT_BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class EnvironmentSpec:
    """Shifting-environment parameters (a, beta, eta).

    a is the growth deficit behind the discontinuity (rate drops from 1 to 1-a),
    beta the linear shift speed, eta the coefficient of the logarithmic lag in
    X(t) = beta*t - eta*log(t+1).  Regime classification requires 0 < a < 1;
    a = 0 is accepted by the speed/delay calculators as the homogeneous limit.
    """

    a: float
    beta: float
    eta: float = 0.0

    def __post_init__(self):
        for name in ("a", "beta", "eta"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v!r}")
        if self.beta < 0:
            raise DomainError(f"beta must be >= 0, got {self.beta}")

    @property
    def r_plus(self) -> float:
        """Growth rate ahead of the discontinuity (fixed to 1 by scaling)."""
        return 1.0

    @property
    def r_minus(self) -> float:
        """Growth rate behind the discontinuity."""
        return 1.0 - self.a

    def shift_position(self, t):
        """X(t) = beta*t - eta*log(t+1); log(t+1) avoids the t=0 singularity."""
        t = np.asarray(t, dtype=float)
        out = self.beta * t - self.eta * np.log1p(t)
        return float(out) if out.ndim == 0 else out


class RegimeLabel(str, enum.Enum):
    SUBCRITICAL = "Subcritical"
    SUPERCRITICAL_PULLING = "SupercriticalPulling"
    CRITICAL_PULLING = "CriticalPulling"
    NO_PULLING = "NoPulling"


@dataclass(frozen=True)
class Regime:
    label: RegimeLabel
    boundary_tolerance: float


def shift_threshold(a: float) -> float:
    """Upper shift speed 2*(sqrt(a)+sqrt(1-a)) beyond which pulling stops."""
    _check_a(a)
    return 2.0 * (math.sqrt(a) + math.sqrt(1.0 - a))


def _check_a(a: float, allow_zero: bool = False):
    lo_ok = (a > 0.0) or (allow_zero and a == 0.0)
    if not (lo_ok and a < 1.0):
        rng = "[0, 1)" if allow_zero else "(0, 1)"
        raise DomainError(f"growth deficit a must lie in {rng}, got {a}")


def classify_regime(env: EnvironmentSpec, tol: float = DEFAULT_BOUNDARY_TOL) -> Regime:
    """Classify (a, beta) into the four speed regimes.

    beta is snapped to the critical threshold within an absolute tolerance
    (thresholds like 2*(sqrt(a)+sqrt(1-a)) are irrational).  beta = 2 is only
    admissible for eta < 1/2; the behavior at beta = 2 with eta >= 1/2 is not
    characterized and is rejected.
    """
    _check_a(env.a)
    if tol < 0:
        raise DomainError(f"tolerance must be >= 0, got {tol}")
    thr = shift_threshold(env.a)
    if abs(env.beta - 2.0) <= tol and env.eta >= 0.5:
        raise UnsupportedRegimeError(
            f"beta=2 with eta={env.eta} >= 1/2 has no characterized front law"
        )
    if env.beta < 2.0 - tol:
        label = RegimeLabel.SUBCRITICAL
    elif abs(env.beta - thr) <= tol:
        label = RegimeLabel.CRITICAL_PULLING
    elif env.beta < thr:
        label = RegimeLabel.SUPERCRITICAL_PULLING
    else:
        label = RegimeLabel.NO_PULLING
    return Regime(label=label, boundary_tolerance=tol)


def effective_exponent(env: EnvironmentSpec, tol: float = DEFAULT_BOUNDARY_TOL) -> float:
    """Tail decay exponent lambda* = beta/2 - sqrt(a) selected by the pulled front.

    Only defined in the supercritical-pulling regime (including beta = 2 with
    eta < 1/2), where it lies in [1-sqrt(a), sqrt(1-a)).
    """
    regime = classify_regime(env, tol)
    if regime.label is not RegimeLabel.SUPERCRITICAL_PULLING:
        raise RegimeError(
            f"effective exponent requires supercritical pulling, got {regime.label.value}"
        )
    return env.beta / 2.0 - math.sqrt(env.a)


def spreading_speed(env: EnvironmentSpec, tol: float = DEFAULT_BOUNDARY_TOL) -> float:
    """Asymptotic front speed c*: piecewise in beta, continuous across regimes.

    a = 0 is accepted as the homogeneous limit (c* = 2 for every beta).
    """
    _check_a(env.a, allow_zero=True)
    if env.a == 0.0:
        return 2.0
    if env.beta <= 2.0:
        return 2.0
    # The pulled exponent is capped at sqrt(1-a) past the threshold; the
    # resulting speed is continuous across both regime boundaries.
    lam = min(env.beta / 2.0 - math.sqrt(env.a), math.sqrt(1.0 - env.a))
    return lam + (1.0 - env.a) / lam


def wave_speed(lam: float, R: float) -> float:
    """Speed c = lam + R/lam of the front with tail decay rate lam; >= 2*sqrt(R)."""
    if not (lam > 0 and R > 0):
        raise DomainError(f"wave_speed requires lam > 0 and R > 0, got ({lam}, {R})")
    return lam + R / lam


def tail_power(env: EnvironmentSpec) -> float:
    """Effective polynomial tail power q = -3/2 + sqrt(a)*eta fed to the delay laws."""
    _check_a(env.a)
    return -1.5 + math.sqrt(env.a) * env.eta


def log_coefficient(env: EnvironmentSpec, tol: float = DEFAULT_BOUNDARY_TOL) -> float:
    """Coefficient theta* of log(t) in the front position xi_b(t) = c*t + theta*·log t + O(1).

    In the critical-pulling regime with q = -3/2 + sqrt(a)*eta equal to -2 the
    delay law carries an extra log log t term; this function still returns the
    log t coefficient (-3/(2*lambda_min)); see front_prediction() for the
    secondary coefficient.
    """
    return front_prediction(env, tol).theta_star


@dataclass(frozen=True)
class FrontPrediction:
    """Bundle of regime-resolved front predictions.

    delay(t) gives the predicted front position up to an additive O(1)
    constant; theta_star is the coefficient of log t inside it.  In the
    critical q = -2 case has_loglog is True and loglog_coefficient (on
    log log t) is +1/lambda_min.
    """

    regime: Regime
    c_star: float
    lambda_eff: float
    q_eff: float
    theta_star: float
    loglog_coefficient: float = 0.0
    has_loglog: bool = False
    delay: Callable[[float], float] = field(default=None, repr=False, compare=False)


def delay_m(lam: float, R: float, q: float, t):
    """Front delay law c_lam*t + (q/lam)*log((c_lam - 2*lam)*t) for lam < sqrt(R).

    Valid for tail data ~ x^q e^{-lam x}; requires t > 1/(c_lam - 2*lam) so the
    log argument exceeds 1.  At lam = sqrt(R) the law degenerates; use
    delay_m_tilde instead.
    """
    if not (lam > 0 and R > 0):
        raise DomainError(f"delay_m requires lam > 0 and R > 0, got ({lam}, {R})")
    if lam >= math.sqrt(R):
        raise RegimeError(
            f"delay_m needs lam < sqrt(R) (got lam={lam}, sqrt(R)={math.sqrt(R)}); "
            "use delay_m_tilde for the critical rate"
        )
    c = wave_speed(lam, R)
    gap = c - 2.0 * lam
    t = np.asarray(t, dtype=float)
    if np.any(t * gap <= 1.0):
        raise DomainError(f"delay_m requires t > 1/(c_lam - 2*lam) = {1.0 / gap}")
    out = c * t + (q / lam) * np.log(gap * t)
    return float(out) if out.ndim == 0 else out


def delay_m_tilde(R: float, q: float, t):
    """Critical-rate delay law, three branches keyed on the tail power q.

    q < -2 : 2*sqrt(R)*t - (3/(2*sqrt(R)))*log t
    q = -2 : same plus (1/sqrt(R))*log log t           (needs t > 1)
    q > -2 : 2*sqrt(R)*t + ((q-1)/(2*sqrt(R)))*log t
    """
    if R <= 0:
        raise DomainError(f"delay_m_tilde requires R > 0, got {R}")
    lmin = math.sqrt(R)
    cmin = 2.0 * lmin
    t = np.asarray(t, dtype=float)
    if q == -2.0:
        if np.any(t <= 1.0):
            raise DomainError("the q = -2 branch needs t > 1 (log log t)")
        out = cmin * t - 1.5 / lmin * np.log(t) + np.log(np.log(t)) / lmin
    else:
        if np.any(t <= 0.0):
            raise DomainError("delay_m_tilde requires t > 0")
        if q < -2.0:
            out = cmin * t - 1.5 / lmin * np.log(t)
        else:
            out = cmin * t + (q - 1.0) / (2.0 * lmin) * np.log(t)
    return float(out) if out.ndim == 0 else out


def front_prediction(env: EnvironmentSpec, tol: float = DEFAULT_BOUNDARY_TOL) -> FrontPrediction:
    """Resolve the regime and assemble (c*, lambda_eff, q_eff, theta*, delay)."""
    _check_a(env.a, allow_zero=True)
    if env.a == 0.0:
        # Homogeneous limit: classical front at speed 2 with -3/2 log-delay.
        regime = Regime(RegimeLabel.SUBCRITICAL, tol)
        return FrontPrediction(
            regime=regime, c_star=2.0, lambda_eff=1.0, q_eff=-3.0, theta_star=-1.5,
            delay=lambda t: 2.0 * np.asarray(t, dtype=float) - 1.5 * np.log(t),
        )
    regime = classify_regime(env, tol)
    lmin = math.sqrt(1.0 - env.a)
    cmin = 2.0 * lmin
    if regime.label is RegimeLabel.SUBCRITICAL:
        return FrontPrediction(
            regime=regime, c_star=2.0, lambda_eff=1.0, q_eff=-3.0, theta_star=-1.5,
            delay=lambda t: 2.0 * np.asarray(t, dtype=float) - 1.5 * np.log(t),
        )
    if regime.label is RegimeLabel.SUPERCRITICAL_PULLING:
        lam = env.beta / 2.0 - math.sqrt(env.a)
        c = lam + (1.0 - env.a) / lam
        q = tail_power(env)
        theta = -(1.5 - math.sqrt(env.a) * env.eta) / lam
        return FrontPrediction(
            regime=regime, c_star=c, lambda_eff=lam, q_eff=q, theta_star=theta,
            delay=lambda t: c * np.asarray(t, dtype=float) + theta * np.log(t),
        )
    if regime.label is RegimeLabel.CRITICAL_PULLING:
        q = tail_power(env)
        R = 1.0 - env.a
        if q == -2.0:
            theta = -1.5 / lmin
            return FrontPrediction(
                regime=regime, c_star=cmin, lambda_eff=lmin, q_eff=q, theta_star=theta,
                loglog_coefficient=1.0 / lmin, has_loglog=True,
                delay=lambda t: delay_m_tilde(R, q, t),
            )
        theta = -1.5 / lmin if q < -2.0 else (q - 1.0) / (2.0 * lmin)
        return FrontPrediction(
            regime=regime, c_star=cmin, lambda_eff=lmin, q_eff=q, theta_star=theta,
            delay=lambda t: delay_m_tilde(R, q, t),
        )
    # No pulling: classical law in the rate-(1-a) medium, independent of eta.
    theta = -1.5 / lmin
    return FrontPrediction(
        regime=regime, c_star=cmin, lambda_eff=lmin, q_eff=-3.0, theta_star=theta,
        delay=lambda t: cmin * np.asarray(t, dtype=float) + theta * np.log(t),
    )


def predicted_front(env: EnvironmentSpec, t, tol: float = DEFAULT_BOUNDARY_TOL):
    """Predicted front position at time t, exact up to an additive O(1) constant."""
    pred = front_prediction(env, tol)
    out = pred.delay(t)
    arr = np.asarray(out)
    return float(arr) if arr.ndim == 0 else out
