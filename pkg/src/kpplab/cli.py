"""Command-line interface: run, sweep, analyze, verify, wave.

Exit codes: 0 success, 1 validation error, 2 numerical failure,
3 acceptance failure.  The output root is resolved as --out flag, then the
KPPLAB_OUT environment variable, then the config's [output] dir.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, front_analysis, io_utils, pde_solver
from .asymptotics import EnvironmentSpec, front_prediction, wave_speed
from .config import RunConfig, parse_sweep_grid
from .errors import (
    ConfigError,
    ConvergenceError,
    DataError,
    DomainError,
    FitError,
    KPPLabError,
    NumericalError,
    QuadratureError,
)

_THEOREM_HELP = (
    "prediction preset: 1.5 = supercritical pulling, 1.6 = critical pulling, "
    "1.7 = no pulling, 1.4 = growing domain, auto = classify from (a, beta, eta)"
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def build_parser():
    p = _Parser(prog="kpplab", description=__doc__)
    p.add_argument("--version", action="version", version=f"kpplab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="execute one scenario from a config file")
    pr.add_argument("config")
    pr.add_argument("--out", help="output root (overrides KPPLAB_OUT and config)")

    ps = sub.add_parser("sweep", help="run a parameter grid from a config file")
    ps.add_argument("config")
    ps.add_argument("--out")
    ps.add_argument("--jobs", type=int, default=os.cpu_count() or 1)

    pa = sub.add_parser("analyze", help="fit an existing trace against theory")
    pa.add_argument("trace", help="path to trace.csv")
    pa.add_argument("--theorem", default="auto", choices=["1.4", "1.5", "1.6", "1.7", "auto"],
                    help=_THEOREM_HELP)
    pa.add_argument("--a", type=float, default=None)
    pa.add_argument("--beta", type=float, default=None)
    pa.add_argument("--eta", type=float, default=None)
    pa.add_argument("--lam", type=float, default=None)
    pa.add_argument("--q", type=float, default=None)
    pa.add_argument("--R", type=float, default=1.0)
    pa.add_argument("--out", help="write the report here instead of stdout")

    pv = sub.add_parser("verify", help="run a frozen acceptance suite")
    pv.add_argument("suite", choices=["formulas", "waves", "oracles", "fronts-fast", "fronts-full"])

    pw = sub.add_parser("wave", help="compute a traveling-wave profile CSV")
    pw.add_argument("--lambda", dest="lam", type=float, required=True)
    pw.add_argument("--R", type=float, required=True)
    pw.add_argument("--out", required=True)
    pw.add_argument("--z-min", type=float, default=-40.0)
    pw.add_argument("--z-max", type=float, default=40.0)
    pw.add_argument("--dz", type=float, default=1e-3)
    pw.add_argument("--tol", type=float, default=1e-6)
    return p


def _resolve_out(flag, cfg: RunConfig = None):
    if flag:
        return flag
    env = os.environ.get("KPPLAB_OUT")
    if env:
        return env
    return cfg.values["output"]["dir"] if cfg is not None else "out"


# ---------------------------------------------------------------------------
# analysis shared by run/analyze
# ---------------------------------------------------------------------------


def model_for(theorem, env: EnvironmentSpec, growing=None):
    """(c_model, theta_model, label) for the requested prediction preset."""
    if theorem == "1.4":
        if growing is None:
            raise ConfigError("growing-domain preset needs (lam, q, R)")
        lam, q, R = growing
        return wave_speed(lam, R), q / lam, "growing-domain"
    pred = front_prediction(env)
    label = pred.regime.label.value
    expected = {"1.5": "SupercriticalPulling", "1.6": "CriticalPulling", "1.7": "NoPulling"}
    if theorem in expected and label != expected[theorem]:
        raise ConfigError(
            f"preset {theorem} expects regime {expected[theorem]}, but (a={env.a}, "
            f"beta={env.beta}, eta={env.eta}) classifies as {label}"
        )
    return pred.c_star, pred.theta_star, label


def analyze_trace(trace, c_model, theta_model, label, fit_lo_frac=0.25,
                  fit_hi_frac=1.0, speed_mode="fixed"):
    t_end = float(trace.times[-1])
    window = (fit_lo_frac * t_end, fit_hi_frac * t_end)
    fit = front_analysis.fit_delay(trace, c_star=c_model, mode=speed_mode, window=window)
    rel = abs(fit.theta_hat - theta_model) / max(abs(theta_model), 1.0)
    pairs = [
        ("regime", label),
        ("c_star", c_model),
        ("theta_star", theta_model),
        ("c_hat", fit.c_hat),
        ("theta_hat", fit.theta_hat),
        ("C_hat", fit.C_hat),
        ("rel_err", rel),
        ("residual_rms", fit.residual_rms),
        ("window_lo", fit.window[0]),
        ("window_hi", fit.window[1]),
        ("level", trace.level),
        ("n_points", fit.n_points),
        ("speed_mode", fit.mode),
    ]
    if trace.u_at_X is not None:
        try:
            af = front_analysis.amplitude_fit(trace, window=window)
            pairs += [("amplitude_rate", af.exponential_rate),
                      ("amplitude_power", af.power_exponent),
                      ("amplitude_const", af.const)]
        except FitError:
            pass  # underflowed window; the delay report stands alone
    return pairs, fit


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _write_trace(path, trace):
    n = len(trace.times)
    u_at_X = trace.u_at_X if trace.u_at_X is not None else np.full(n, math.nan)
    x_of_X = trace.x_of_X if trace.x_of_X is not None else np.full(n, math.nan)
    io_utils.write_csv(path, ["t", "xi_b", "u_at_X", "x_of_X"],
                       [trace.times, trace.xi, u_at_X, x_of_X])


def _trace_from_csv(path, level=math.nan):
    cols = io_utils.read_csv(path, expect_cols=["t", "xi_b", "u_at_X", "x_of_X"])
    u = cols["u_at_X"]
    return front_analysis.FrontTrace(
        times=cols["t"], xi=cols["xi_b"], level=level,
        u_at_X=u if np.isfinite(u).any() else None,
        x_of_X=cols["x_of_X"] if np.isfinite(cols["x_of_X"]).any() else None,
    )


def run_one(cfg: RunConfig, out_root):
    rundir = os.path.join(out_root, cfg.name)
    os.makedirs(os.path.join(rundir, "snaps"), exist_ok=True)
    manifest_path = os.path.join(rundir, "manifest")
    with open(manifest_path, "w") as f:
        f.write(cfg.to_manifest(meta={"created": time.strftime("%Y-%m-%dT%H:%M:%S"),
                                      "version": __version__}))
    scn = cfg.scenario()
    try:
        res = pde_solver.run(scn)
    except Exception as exc:
        with open(os.path.join(rundir, "FAILED"), "w") as f:
            f.write(f"{type(exc).__name__}: {exc}\n")
        raise
    _write_trace(os.path.join(rundir, "trace.csv"), res.trace)
    for snap in res.snapshots:
        io_utils.write_csv(
            os.path.join(rundir, "snaps", f"snap_t{snap.t:g}.csv"),
            ["x", "u"], [snap.x(), snap.u],
        )
    theorem = cfg.values["analysis"]["theorem"]
    growing = None
    if cfg.resolved_mode() == "growing":
        s = cfg.values["scenario"]
        growing = (s["lam"], s["q"], s["R"])
        if theorem == "auto":
            theorem = "1.4"
    c_model, theta_model, label = model_for(theorem, scn.env, growing)
    pairs, fit = analyze_trace(
        res.trace, c_model, theta_model, label,
        cfg.values["analysis"]["fit_lo_frac"], cfg.values["analysis"]["fit_hi_frac"],
        cfg.values["analysis"]["speed_mode"],
    )
    io_utils.write_report(os.path.join(rundir, "report.txt"), pairs)
    with open(manifest_path, "w") as f:
        f.write(cfg.to_manifest(meta={
            "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
            "version": __version__,
            "runtime_seconds": f"{res.diagnostics['runtime_s']:.3f}",
        }))
    return rundir, pairs, res


def cmd_run(args):
    cfg = RunConfig.from_file(args.config)
    rundir, pairs, _ = run_one(cfg, _resolve_out(args.out, cfg))
    io_utils.write_report(sys.stdout, pairs)
    print(f"artifacts: {rundir}")
    return 0


def _sweep_point(payload):
    text, name, out_root, point = payload
    cfg = RunConfig.from_string(text, default_name=name)
    for key, val in point.items():
        sec = "solver" if key == "dx" else "scenario"
        cfg.values[sec][key] = val
    tag = "-".join(f"{k}{v:g}" for k, v in sorted(point.items()))
    cfg.values["scenario"]["name"] = f"{name}-{tag}"
    try:
        _, pairs, _ = run_one(cfg, out_root)
        rec = dict(pairs)
        return tag, {
            "a": cfg.values["scenario"]["a"], "beta": cfg.values["scenario"]["beta"],
            "eta": cfg.values["scenario"]["eta"],
            "c_star": rec["c_star"], "theta_star": rec["theta_star"],
            "c_hat": rec["c_hat"], "theta_hat": rec["theta_hat"],
            "rel_err": rec["rel_err"],
        }, None
    except Exception as exc:  # per-point failures must not kill the sweep
        return tag, None, f"{type(exc).__name__}: {exc}"


def cmd_sweep(args):
    with open(args.config) as f:
        text = f.read()
    cfg = RunConfig.from_string(text, default_name=os.path.splitext(os.path.basename(args.config))[0])
    points = parse_sweep_grid(cfg)
    out_root = _resolve_out(args.out, cfg)
    sweep_dir = os.path.join(out_root, cfg.name)
    os.makedirs(sweep_dir, exist_ok=True)
    payloads = [(text, cfg.name, out_root, p) for p in points]
    if args.jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_sweep_point, payloads))
    else:
        results = [_sweep_point(p) for p in payloads]
    rows, failures = [], []
    for tag, row, err in results:
        if row is None:
            failures.append((tag, err))
        else:
            rows.append(row)
    header = ["a", "beta", "eta", "c_star", "theta_star", "c_hat", "theta_hat", "rel_err"]
    with open(os.path.join(sweep_dir, "aggregate.csv"), "w") as f:
        f.write(io_utils.SCHEMA_LINE + "\n")
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(f"{row[h]:.17g}" for h in header) + "\n")
    if failures:
        with open(os.path.join(sweep_dir, "sweep_failures.txt"), "w") as f:
            for tag, err in failures:
                f.write(f"{tag}: {err}\n")
        print(f"{len(failures)}/{len(points)} points failed; see sweep_failures.txt")
        return 2
    print(f"sweep complete: {len(rows)} points in {sweep_dir}")
    return 0


def cmd_analyze(args):
    level = math.nan
    manifest = os.path.join(os.path.dirname(os.path.abspath(args.trace)), "manifest")
    cfg = None
    if os.path.exists(manifest):
        cfg = RunConfig.from_file(manifest)
    a = args.a if args.a is not None else (cfg.values["scenario"]["a"] if cfg else None)
    beta = args.beta if args.beta is not None else (cfg.values["scenario"]["beta"] if cfg else 0.0)
    eta = args.eta if args.eta is not None else (cfg.values["scenario"]["eta"] if cfg else 0.0)
    if a is None:
        raise ConfigError("no manifest found next to the trace; pass --a (and --beta/--eta)")
    growing = None
    if args.theorem == "1.4":
        lam = args.lam if args.lam is not None else (cfg.values["scenario"]["lam"] if cfg else None)
        q = args.q if args.q is not None else (cfg.values["scenario"]["q"] if cfg else None)
        if lam is None or q is None:
            raise ConfigError("growing-domain preset needs --lam and --q")
        growing = (lam, q, args.R)
    env = EnvironmentSpec(a=a, beta=beta, eta=eta)
    trace = _trace_from_csv(args.trace, level)
    c_model, theta_model, label = model_for(args.theorem, env, growing)
    pairs, _ = analyze_trace(trace, c_model, theta_model, label)
    if args.out:
        io_utils.write_report(args.out, pairs)
        print(f"report written to {args.out}")
    else:
        io_utils.write_report(sys.stdout, pairs)
    return 0


def cmd_verify(args):
    from . import acceptance

    results = acceptance.run_suite(args.suite)
    ok = acceptance.print_results(results)
    return 0 if ok else 3


def cmd_wave(args):
    from . import traveling_wave

    prof = traveling_wave.compute_profile(args.lam, args.R, z_min=args.z_min,
                                          z_max=args.z_max, dz=args.dz, tol=args.tol)
    traveling_wave.write_profile_csv(prof, args.out)
    print(f"profile (lam={args.lam}, R={args.R}, c={prof.c:.9g}) written to {args.out}")
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "run": cmd_run, "sweep": cmd_sweep, "analyze": cmd_analyze,
            "verify": cmd_verify, "wave": cmd_wave,
        }[args.command]
        return handler(args)
    except (ConfigError, DomainError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, ConvergenceError, QuadratureError, FitError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except KPPLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
