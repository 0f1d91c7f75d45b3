"""Readers for the kpplab CSV/report formats with strict schema checks."""

import numpy as np

SCHEMA_LINE = "# kpplab-csv v1"


class SchemaError(ValueError):
    """Input file does not match the expected kpplab schema."""


def read_csv(path, expect_cols):
    with open(path) as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    if not lines or not lines[0].startswith(SCHEMA_LINE):
        raise SchemaError(f"{path}: missing schema line {SCHEMA_LINE!r}")
    body = [ln for ln in lines if not ln.startswith("#")]
    if not body:
        raise SchemaError(f"{path}: no header; expected columns {','.join(expect_cols)!r}")
    header = [c.strip() for c in body[0].split(",")]
    if header != list(expect_cols):
        raise SchemaError(
            f"{path}: expected header {','.join(expect_cols)!r}, got {','.join(header)!r}"
        )
    if len(body) < 2:
        raise SchemaError(f"{path}: empty trace (header only)")
    data = np.array([[float(v) for v in ln.split(",")] for ln in body[1:]])
    if not np.all(np.isfinite(data[:, 0])):
        raise SchemaError(f"{path}: non-finite values in column {header[0]!r}")
    return {name: data[:, j] for j, name in enumerate(header)}


def read_report(path):
    out = {}
    with open(path) as f:
        for ln in f:
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            if "=" not in ln:
                raise SchemaError(f"{path}: malformed report line {ln!r}")
            key, val = ln.split("=", 1)
            out[key.strip()] = val.strip()
    if "theta_hat" not in out:
        raise SchemaError(f"{path}: report lacks the theta_hat key")
    return out
