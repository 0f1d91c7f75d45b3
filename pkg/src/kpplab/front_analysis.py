"""Front extraction and quantitative comparison against the closed-form laws.

Operates on sampled fields (anything with .x() and .u, or a plain (x, u)
pair) and on FrontTrace time series; produces regression summaries whose
tolerances are set by the calling experiment, never in here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DomainError, FitError

NEG_INF = -math.inf


@dataclass(frozen=True)
class FrontTrace:
    """Time series of the rightmost b-level position, plus samples at X(t)."""

    times: np.ndarray
    xi: np.ndarray
    level: float
    u_at_X: np.ndarray = None
    x_of_X: np.ndarray = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or len(t) < 1:
            raise DataError("trace needs a 1-d, nonempty time array")
        if np.any(np.diff(t) <= 0):
            raise DataError("trace times must be strictly increasing")

    def window(self, t_lo, t_hi):
        m = (self.times >= t_lo) & (self.times <= t_hi) & np.isfinite(self.xi)
        return self.times[m], self.xi[m], m


def _as_xu(field):
    if isinstance(field, tuple):
        x, u = field
        return np.asarray(x, dtype=float), np.asarray(u, dtype=float)
    return field.x(), np.asarray(field.u, dtype=float)


def level_set(field, b: float):
    """Rightmost crossing position of level b; -inf if u < b everywhere.

    Mirrors the sup definition: the largest i with u_i >= b and u_{i+1} < b,
    linearly interpolated.  If the level is still exceeded at the right edge
    the edge position is returned (window too short for this level).
    """
    x, u = _as_xu(field)
    if not np.all(np.isfinite(u)):
        raise DataError("field contains non-finite values")
    if b <= 0:
        raise DomainError(f"level must be positive, got {b}")
    above = u >= b
    if not above.any():
        return NEG_INF
    i = int(np.nonzero(above)[0][-1])
    if i == len(u) - 1:
        return float(x[-1])
    # u[i] >= b > u[i+1]
    frac = (u[i] - b) / (u[i] - u[i + 1])
    return float(x[i] + frac * (x[i + 1] - x[i]))


@dataclass(frozen=True)
class FitResult:
    c_hat: float
    theta_hat: float
    C_hat: float
    mode: str  # "fixed" or "free"
    window: tuple
    residual_rms: float
    cond: float
    n_points: int
    loglog_hat: float = None


def fit_delay(trace: FrontTrace, c_star: float = None, mode: str = "fixed",
              window: tuple = None, include_loglog: bool = False,
              cond_limit: float = 1e10) -> FitResult:
    """Least-squares fit of the front trace against c*t + theta*log t + C.

    mode='fixed' (default, well conditioned) subtracts the known speed and
    regresses xi - c*t on {log t, 1}; mode='free' also fits the speed, which
    is nearly collinear with log t on short windows -- retained as an honesty
    check.  include_loglog adds a log log t regressor (critical tail-power -2
    diagnostics); it requires t > 1 throughout the window.
    """
    if window is None:
        t_end = float(trace.times[-1])
        window = (t_end / 4.0, t_end)
    t, xi, _ = trace.window(*window)
    t = t[t > 0]
    xi = xi[-len(t):] if len(t) else xi[:0]
    if mode not in ("fixed", "free"):
        raise DomainError(f"unknown fit mode {mode!r}")
    if mode == "fixed" and c_star is None:
        raise DomainError("fixed-speed fit needs c_star")
    cols = [np.log(t), np.ones_like(t)]
    names = ["theta", "const"]
    if include_loglog:
        if np.any(t <= 1.0):
            raise FitError("log log t regressor needs t > 1 in the window")
        cols.insert(1, np.log(np.log(t)))
        names.insert(1, "loglog")
    if mode == "free":
        cols.insert(0, t)
        names.insert(0, "c")
        y = xi
    else:
        y = xi - c_star * t
    A = np.column_stack(cols)
    if len(t) < len(cols) + 1:
        raise FitError(f"window {window} holds only {len(t)} usable points")
    cond = float(np.linalg.cond(A))
    if cond > cond_limit:
        raise FitError(f"design matrix condition {cond:.3e} exceeds {cond_limit:.1e}")
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    out = dict(zip(names, coef))
    return FitResult(
        c_hat=float(out.get("c", c_star)),
        theta_hat=float(out["theta"]),
        C_hat=float(out["const"]),
        mode=mode,
        window=window,
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        cond=cond,
        n_points=len(t),
        loglog_hat=float(out["loglog"]) if include_loglog else None,
    )


@dataclass(frozen=True)
class AmplitudeFit:
    power_exponent: float  # coefficient of log t
    exponential_rate: float  # coefficient of t
    const: float
    residual_rms: float
    n_points: int


def amplitude_fit(trace: FrontTrace, window: tuple = None) -> AmplitudeFit:
    """Fit log u(t, X(t)) against {t, log t, 1}.

    The t-coefficient estimates the exponential decay rate at the
    discontinuity (-(beta^2/4 - 1) in the shifting problem) and the log t
    coefficient the power (-3/2 + beta*eta/2).
    """
    if trace.u_at_X is None:
        raise FitError("trace carries no u(t, X(t)) samples")
    if window is None:
        t_end = float(trace.times[-1])
        window = (t_end / 4.0, t_end)
    m = (trace.times >= window[0]) & (trace.times <= window[1])
    t = trace.times[m]
    uX = trace.u_at_X[m]
    bad = ~np.isfinite(uX) | (uX <= 0)
    if bad.any():
        raise FitError(
            f"{int(bad.sum())} underflowed/invalid u(t,X(t)) samples in the "
            "window; shrink the window to earlier times"
        )
    t = t[t > 0]
    uX = uX[-len(t):]
    if len(t) < 4:
        raise FitError("amplitude window holds fewer than 4 samples")
    A = np.column_stack([t, np.log(t), np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(A, np.log(uX), rcond=None)
    resid = np.log(uX) - A @ coef
    return AmplitudeFit(
        power_exponent=float(coef[1]),
        exponential_rate=float(coef[0]),
        const=float(coef[2]),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        n_points=len(t),
    )


def profile_distance(field, wave, b_align: float) -> float:
    """Sup-norm distance between the field and the b-aligned traveling wave.

    The wave is shifted so its b_align level sits on the field's rightmost
    b_align crossing, then sup |u - Phi| is taken over the whole window.
    """
    x, u = _as_xu(field)
    pos = level_set(field, b_align)
    if pos == NEG_INF:
        raise DataError(f"field never reaches the alignment level {b_align}")
    shift = pos - wave.inverse_level(b_align)
    return float(np.max(np.abs(u - wave.evaluate(x - shift))))


@dataclass(frozen=True)
class RatioStats:
    minimum: float
    maximum: float
    mean: float
    n: int
    n_skipped: int


def ratio_to_oracle(field, psi_at, x_points) -> RatioStats:
    """Statistics of u/psi over x_points; psi_at maps x -> psi(t, x).

    Points where psi underflows (or u is zero) are skipped and counted.
    """
    ratios = []
    skipped = 0
    for xq in np.asarray(x_points, dtype=float):
        psi = psi_at(xq)
        uq = field.value_at(xq)
        if not (psi > 1e-280 and np.isfinite(psi)) or uq <= 0:
            skipped += 1
            continue
        ratios.append(uq / psi)
    if not ratios:
        raise DataError("no usable points for the oracle ratio")
    r = np.array(ratios)
    return RatioStats(
        minimum=float(r.min()), maximum=float(r.max()), mean=float(r.mean()),
        n=len(r), n_skipped=skipped,
    )
