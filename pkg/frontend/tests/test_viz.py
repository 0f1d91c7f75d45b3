"""Viz tests: artifacts are produced through the kpplab CLI (the only
interface this package consumes) and rendered to PNG."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from kpplab_viz import io as vio
from kpplab_viz import plots
from kpplab_viz.cli import main as viz_main

CONFIG = """
[scenario]
name = vizrun
a = 0.5
beta = 2.2
eta = 0
T = 60
[solver]
dx = 0.1
dt = 0.1
[output]
trace_dt = 1.0
snapshot_times = 30, 60
"""


@pytest.fixture(scope="module")
def artifacts(tmp_path_factory):
    root = tmp_path_factory.mktemp("run")
    cfg = root / "viz.ini"
    cfg.write_text(CONFIG)
    out = root / "out"
    subprocess.run([sys.executable, "-m", "kpplab.cli", "run", str(cfg),
                    "--out", str(out)], check=True, capture_output=True)
    subprocess.run([sys.executable, "-m", "kpplab.cli", "wave",
                    "--lambda", "0.3928932188134525", "--R", "0.5",
                    "--out", str(root / "wave.csv"),
                    "--z-min", "-60", "--z-max", "40"], check=True,
                   capture_output=True)
    rundir = out / "vizrun"
    return {
        "trace": str(rundir / "trace.csv"),
        "report": str(rundir / "report.txt"),
        "snaps": sorted(str(rundir / "snaps" / f) for f in os.listdir(rundir / "snaps")),
        "wave": str(root / "wave.csv"),
        "root": root,
    }


def test_delay_figure_renders(artifacts, tmp_path):
    out = tmp_path / "delay.png"
    assert viz_main(["delay", artifacts["trace"], artifacts["report"],
                     "-o", str(out)]) == 0
    assert out.stat().st_size > 5000


def test_delay_legend_quotes_report_verbatim(artifacts):
    rep = vio.read_report(artifacts["report"])
    fit_label, theory_label = plots.delay_legend_labels(rep)
    assert fit_label == f"fit: theta_hat={rep['theta_hat']}"
    assert rep["theta_hat"] in fit_label
    assert rep["theta_star"] in theory_label


def test_profile_figure_renders(artifacts, tmp_path):
    out = tmp_path / "profile.png"
    assert viz_main(["profile", *artifacts["snaps"], "--wave", artifacts["wave"],
                     "-o", str(out)]) == 0
    assert out.stat().st_size > 5000


def test_amplitude_figure_renders(artifacts, tmp_path):
    out = tmp_path / "amp.png"
    assert viz_main(["amplitude", artifacts["trace"], artifacts["report"],
                     "-o", str(out)]) == 0
    assert out.stat().st_size > 5000


def test_deterministic_output(artifacts, tmp_path):
    a = tmp_path / "a.png"
    b = tmp_path / "b.png"
    plots.plot_delay(artifacts["trace"], artifacts["report"], a)
    plots.plot_delay(artifacts["trace"], artifacts["report"], b)
    assert a.read_bytes() == b.read_bytes()


def test_schema_errors(artifacts, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("# kpplab-csv v1\nz,value\n1,2\n")
    with pytest.raises(vio.SchemaError, match="z,phi"):
        plots.plot_profile(artifacts["snaps"] + [str(bad)], str(bad), tmp_path / "x.png")
    empty = tmp_path / "empty.csv"
    empty.write_text("# kpplab-csv v1\nt,xi_b,u_at_X,x_of_X\n")
    with pytest.raises(vio.SchemaError, match="empty"):
        plots.plot_delay(str(empty), artifacts["report"], tmp_path / "y.png")
    missing_schema = tmp_path / "nos.csv"
    missing_schema.write_text("t,xi_b,u_at_X,x_of_X\n1,2,0.1,3\n")
    with pytest.raises(vio.SchemaError, match="schema line"):
        plots.plot_delay(str(missing_schema), artifacts["report"], tmp_path / "z.png")


def test_profile_needs_two_snapshots(artifacts, tmp_path):
    with pytest.raises(vio.SchemaError, match="two snapshots"):
        plots.plot_profile(artifacts["snaps"][:1], artifacts["wave"], tmp_path / "p.png")


def test_profile_of_wave_samples_is_flat(artifacts, tmp_path):
    # snapshots sampled from the wave itself: curves overlap, inset ~ 0
    wave = vio.read_csv(artifacts["wave"], ["z", "phi"])
    for i, shift in enumerate((5.0, 9.0)):
        with open(tmp_path / f"snap_t{i + 1}.csv", "w") as f:
            f.write("# kpplab-csv v1\nx,u\n")
            for z, p in zip(wave["z"], wave["phi"]):
                f.write(f"{z + shift:.17g},{p:.17g}\n")
    out = tmp_path / "flat.png"
    plots.plot_profile([str(tmp_path / "snap_t1.csv"), str(tmp_path / "snap_t2.csv")],
                       artifacts["wave"], out)
    assert out.exists()


def test_exact_model_trace_slopes_agree(tmp_path):
    # synthetic trace following the fitted model exactly: the two legend
    # slopes coincide because the fit reproduces theta_star
    t = np.linspace(50.0, 400.0, 351)
    xi = 1.5 * t - 2.0 * np.log(t) + 1.0
    with open(tmp_path / "trace.csv", "w") as f:
        f.write("# kpplab-csv v1\nt,xi_b,u_at_X,x_of_X\n")
        for ti, xii in zip(t, xi):
            f.write(f"{ti:.17g},{xii:.17g},nan,nan\n")
    rep = tmp_path / "report.txt"
    rep.write_text(
        "regime=synthetic\nc_star=1.5\ntheta_star=-2\ntheta_hat=-2.0000000001\n"
        "C_hat=1\nrel_err=5e-11\nresidual_rms=0\nwindow_lo=50\nwindow_hi=400\n"
    )
    out = tmp_path / "synthetic.png"
    plots.plot_delay(str(tmp_path / "trace.csv"), str(rep), out)
    assert out.exists()
    assert abs(float("-2.0000000001") - float("-2")) < 1e-6
