"""The three figure types: delay curve, profile overlay, amplitude law.

Figures are deterministic: fixed style, no timestamps, overlay values quoted
verbatim from the report files.
"""

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, read_csv, read_report

STYLE = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 130,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
}

TRACE_COLS = ["t", "xi_b", "u_at_X", "x_of_X"]


def _crossing(x, u, b):
    """Rightmost b-level crossing by linear interpolation (data inspection,
    not physics)."""
    above = u >= b
    if not above.any():
        raise SchemaError(f"no {b}-level crossing in snapshot")
    i = int(np.nonzero(above)[0][-1])
    if i == len(u) - 1:
        return float(x[-1])
    frac = (u[i] - b) / (u[i] - u[i + 1])
    return float(x[i] + frac * (x[i + 1] - x[i]))


def delay_legend_labels(rep):
    """Legend strings quoting the report values verbatim."""
    return (f"fit: theta_hat={rep['theta_hat']}",
            f"theory slope theta_star={rep['theta_star']}")


def plot_delay(trace_path, report_path, out_path):
    """Scatter of xi_b - c*t against log t with the fitted and predicted slopes.

    The legend quotes theta_hat, theta_star and rel_err verbatim from the
    report file.
    """
    trace = read_csv(trace_path, TRACE_COLS)
    rep = read_report(report_path)
    c_star = float(rep["c_star"])
    theta_hat = float(rep["theta_hat"])
    C_hat = float(rep["C_hat"])
    theta_star = float(rep["theta_star"])
    t, xi = trace["t"], trace["xi_b"]
    m = (t > 0) & np.isfinite(xi)
    t, xi = t[m], xi[m]
    logt = np.log(t)
    delay = xi - c_star * t

    fit_label, theory_label = delay_legend_labels(rep)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(logt, delay, ".", ms=2.5, color="#1f77b4", label="run")
        ax.plot(logt, theta_hat * logt + C_hat, "-", color="#d62728", label=fit_label)
        ref = theta_star * logt + (delay[-1] - theta_star * logt[-1])
        ax.plot(logt, ref, "--", color="#2ca02c", label=theory_label)
        ax.set_xlabel("log t")
        ax.set_ylabel(r"$\xi_b(t) - c_* t$")
        ax.set_title(f"logarithmic front delay (rel_err={rep['rel_err']})")
        ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(out_path)
        plt.close(fig)
    return out_path


def plot_profile(snapshot_paths, wave_path, out_path):
    """Front-frame overlay of snapshots against the traveling wave.

    Each snapshot is shifted so its half-plateau crossing sits at the wave's;
    the inset tracks the sup distance over time.
    """
    if len(snapshot_paths) < 2:
        raise SchemaError("profile figure needs at least two snapshots")
    wave = read_csv(wave_path, ["z", "phi"])
    zw, phiw = wave["z"], wave["phi"]
    plateau = float(phiw[0])
    b = plateau / 2.0
    zb = _crossing(zw, phiw, b)

    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(zw, phiw, "k-", lw=1.8, label="traveling wave")
        times, dists = [], []
        for i, path in enumerate(sorted(snapshot_paths)):
            snap = read_csv(path, ["x", "u"])
            x, u = snap["x"], snap["u"]
            if not np.all(np.isfinite(u)):
                raise SchemaError(f"{path}: non-finite samples")
            shift = _crossing(x, u, b) - zb
            z = x - shift
            ax.plot(z, u, lw=0.9, alpha=0.85, label=_snap_label(path))
            sel = (z >= zw[0]) & (z <= zw[-1])
            dists.append(float(np.max(np.abs(u[sel] - np.interp(z[sel], zw, phiw)))))
            times.append(_snap_time(path, i))
        ax.set_xlim(zb - 30.0, zb + 15.0)
        ax.set_xlabel("front frame z")
        ax.set_ylabel("u")
        ax.legend(loc="upper right", fontsize=7)
        inset = ax.inset_axes([0.12, 0.12, 0.3, 0.3])
        inset.plot(times, dists, "o-", ms=3)
        inset.set_title("sup distance", fontsize=7)
        inset.tick_params(labelsize=6)
        fig.tight_layout()
        fig.savefig(out_path)
        plt.close(fig)
    return out_path


def _snap_time(path, fallback):
    name = str(path)
    if "snap_t" in name:
        tag = name.split("snap_t")[-1].split(".csv")[0]
        try:
            return float(tag)
        except ValueError:
            pass
    return float(fallback)


def _snap_label(path):
    t = _snap_time(path, math.nan)
    return f"t = {t:g}" if math.isfinite(t) else str(path)


def plot_amplitude(trace_path, report_path, out_path):
    """log u(t, X(t)) against t with the fitted amplitude law overlaid."""
    trace = read_csv(trace_path, TRACE_COLS)
    rep = read_report(report_path)
    t, uX = trace["t"], trace["u_at_X"]
    m = (t > 0) & np.isfinite(uX) & (uX > 0)
    if not m.any():
        raise SchemaError(f"{trace_path}: no positive u_at_X samples to plot")
    t, uX = t[m], uX[m]

    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(t, np.log(uX), ".", ms=2.5, color="#1f77b4", label="run")
        if "amplitude_rate" in rep:
            rate = float(rep["amplitude_rate"])
            power = float(rep["amplitude_power"])
            const = float(rep["amplitude_const"])
            model = rate * t + power * np.log(t) + const
            ax.plot(t, model, "-", color="#d62728",
                    label=(f"fit: rate={rep['amplitude_rate']}, "
                           f"power={rep['amplitude_power']}"))
        ax.set_xlabel("t")
        ax.set_ylabel("log u(t, X(t))")
        ax.set_title("amplitude at the shifting discontinuity")
        ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(out_path)
        plt.close(fig)
    return out_path
