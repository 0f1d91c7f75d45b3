"""Run configuration: INI-style files with strict key validation.

Every key has a documented default; unknown sections or keys are hard errors
so config typos never silently change an experiment.  A fully resolved config
(the manifest) is itself a valid config file, which is what makes reruns
reproducible.
"""

from __future__ import annotations

import configparser
import io

from .asymptotics import EnvironmentSpec
from .errors import ConfigError
from .linear_oracle import TailInitialData
from .pde_solver import (
    GrowingDomainSpec,
    HeavisideFront,
    Scenario,
    SolverConfig,
    TailStart,
)

# section -> key -> (default, parser)
_FLOAT = float
_STR = str


def _float_list(s):
    vals = [float(v) for v in str(s).replace(",", " ").split()]
    if not vals:
        raise ValueError("empty list")
    return vals


def _opt_float(s):
    s = str(s).strip()
    return None if s in ("", "none", "auto") else float(s)


SCHEMA = {
    "scenario": {
        "name": ("run", _STR),
        "a": (0.0, _FLOAT),
        "beta": (0.0, _FLOAT),
        "eta": (0.0, _FLOAT),
        "mode": ("auto", _STR),  # auto: shifting if a>0 else wholeline
        "initial": ("heaviside", _STR),  # heaviside | taildata
        "x_front": (0.0, _FLOAT),
        "q": (0.0, _FLOAT),
        "lam": (0.5, _FLOAT),
        "x0": (1.0, _FLOAT),
        "R": (1.0, _FLOAT),
        "zeta_slope": (0.25, _FLOAT),
        "T": (100.0, _FLOAT),
    },
    "solver": {
        "dx": (0.05, _FLOAT),
        "dt": (None, _opt_float),
        "scheme": ("imex", _STR),
        "window_kappa": (10.0, _FLOAT),
        "left_margin": (80.0, _FLOAT),
        "extra_right": (0.0, _FLOAT),
        "tail_mode": ("linear", _STR),
        "u_switch": (1e-12, _FLOAT),
    },
    "analysis": {
        # default: plateau/2
        "levels": (None, lambda s: None if str(s).strip() in ("", "auto") else _float_list(s)),
        "fit_lo_frac": (0.25, _FLOAT),
        "fit_hi_frac": (1.0, _FLOAT),
        "theorem": ("auto", _STR),
        "speed_mode": ("fixed", _STR),
    },
    "output": {
        "dir": ("out", _STR),
        "trace_dt": (1.0, _FLOAT),
        "snapshot_times": ((), lambda s: tuple(_float_list(s)) if str(s).strip() else ()),
    },
}


class RunConfig:
    """Validated, fully resolved run configuration."""

    def __init__(self, values: dict):
        self.values = values

    def __getitem__(self, sec_key):
        sec, key = sec_key
        return self.values[sec][key]

    @property
    def name(self):
        return self.values["scenario"]["name"]

    @classmethod
    def from_file(cls, path):
        cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        with open(path) as f:
            cp.read_file(f)
        return cls._from_parser(cp, default_name=_stem(path))

    @classmethod
    def from_string(cls, text, default_name="run"):
        cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        cp.read_file(io.StringIO(text))
        return cls._from_parser(cp, default_name)

    @classmethod
    def _from_parser(cls, cp, default_name):
        # configparser lowercases option names; map them back to the schema's
        # canonical spelling (T, R, ...) so lookups stay case-insensitive
        canon = {sec: {k.lower(): k for k in keys} for sec, keys in SCHEMA.items()}
        problems = []
        for sec in cp.sections():
            if sec == "meta":
                continue  # manifests carry provenance here; ignored on rerun
            if sec not in SCHEMA and sec != "sweep":
                problems.append(f"unknown section [{sec}]")
                continue
            if sec == "sweep":
                continue  # validated by the sweep command
            for key in cp[sec]:
                if key not in canon[sec]:
                    problems.append(f"unknown key {key!r} in section [{sec}]")
        values = {}
        for sec, keys in SCHEMA.items():
            values[sec] = {}
            for key, (default, parse) in keys.items():
                if cp.has_option(sec, key.lower()):
                    raw = cp.get(sec, key.lower())
                    try:
                        values[sec][key] = parse(raw)
                    except (ValueError, SyntaxError) as exc:
                        problems.append(f"bad value for {sec}.{key}: {raw!r} ({exc})")
                else:
                    values[sec][key] = default
        if problems:
            raise ConfigError("invalid config:\n  " + "\n  ".join(problems))
        if values["scenario"]["name"] == "run":
            values["scenario"]["name"] = default_name
        cfg = cls(values)
        cfg.sweep_section = dict(cp["sweep"]) if cp.has_section("sweep") else None
        return cfg

    # ------------------------------------------------------------------
    def resolved_mode(self):
        mode = self.values["scenario"]["mode"]
        if mode == "auto":
            return "shifting" if self.values["scenario"]["a"] > 0 else "wholeline"
        return mode

    def scenario(self) -> Scenario:
        s = self.values["scenario"]
        sol = self.values["solver"]
        out = self.values["output"]
        mode = self.resolved_mode()
        env = EnvironmentSpec(a=s["a"], beta=s["beta"], eta=s["eta"])
        if s["initial"] == "heaviside":
            initial = HeavisideFront(s["x_front"])
        elif s["initial"] == "taildata":
            initial = TailStart(TailInitialData(q=s["q"], lam=s["lam"], x0=s["x0"]))
        else:
            raise ConfigError(f"unknown initial condition {s['initial']!r}")
        growing = None
        if mode == "growing":
            growing = GrowingDomainSpec(slope=s["zeta_slope"], lam=s["lam"], q=s["q"], R=s["R"])
        levels = self.values["analysis"]["levels"]
        solver = SolverConfig(
            dx=sol["dx"], dt=sol["dt"], scheme=sol["scheme"],
            window_kappa=sol["window_kappa"], left_margin=sol["left_margin"],
            extra_right=sol["extra_right"], tail_mode=sol["tail_mode"],
            u_switch=sol["u_switch"],
        )
        return Scenario(
            env=env, mode=mode, initial=initial, T=s["T"], solver=solver,
            trace_dt=out["trace_dt"], snapshot_times=out["snapshot_times"],
            trace_level=levels[0] if levels else None, growing=growing,
        )

    def to_manifest(self, meta: dict = None) -> str:
        """Render the resolved config as INI text (a rerunnable config)."""
        lines = []
        for sec, keys in SCHEMA.items():
            lines.append(f"[{sec}]")
            for key in keys:
                val = self.values[sec][key]
                lines.append(f"{key} = {_fmt(val)}")
            lines.append("")
        if meta:
            lines.append("[meta]")
            for k, v in meta.items():
                lines.append(f"{k} = {v}")
            lines.append("")
        return "\n".join(lines)


def _fmt(val):
    if val is None:
        return "auto"
    if isinstance(val, (tuple, list)):
        return ", ".join(_fmt(v) for v in val)
    if isinstance(val, float):
        return repr(val)
    return str(val)


def _stem(path):
    import os

    return os.path.splitext(os.path.basename(str(path)))[0]


def parse_sweep_grid(cfg: RunConfig) -> list:
    """Cartesian grid from the [sweep] section over {a, beta, eta, dx, T}."""
    raw = getattr(cfg, "sweep_section", None)
    if not raw:
        raise ConfigError("sweep command needs a [sweep] section with a parameter grid")
    allowed = {"a", "beta", "eta", "dx", "t"}
    axes = []
    problems = []
    for key, val in raw.items():
        if key.lower() not in allowed:
            problems.append(f"sweep key {key!r} not in {{a, beta, eta, dx, T}}")
            continue
        try:
            axes.append((key if key != "t" else "T", _float_list(val)))
        except ValueError:
            problems.append(f"bad sweep list for {key!r}: {val!r}")
    if problems:
        raise ConfigError("invalid sweep grid:\n  " + "\n  ".join(problems))
    if not axes:
        raise ConfigError("empty sweep grid")
    points = [{}]
    for key, vals in axes:
        points = [dict(p, **{key: v}) for p in points for v in vals]
    return points
