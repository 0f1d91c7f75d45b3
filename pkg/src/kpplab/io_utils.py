"""CSV reading/writing with the kpplab schema header."""

from __future__ import annotations

import numpy as np

from .errors import DataError

SCHEMA_LINE = "# kpplab-csv v1"


def write_csv(path, header_cols, columns):
    """Write columns (same length) under `header_cols` with 17 significant digits."""
    arrs = [np.asarray(c, dtype=float) for c in columns]
    n = len(arrs[0])
    with open(path, "w") as f:
        f.write(SCHEMA_LINE + "\n")
        f.write(",".join(header_cols) + "\n")
        for i in range(n):
            f.write(",".join(f"{a[i]:.17g}" for a in arrs) + "\n")


def read_csv(path, expect_cols=None):
    """Read a kpplab CSV into {column: array}; raises DataError on bad schema."""
    with open(path) as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    body = [ln for ln in lines if not ln.startswith("#")]
    if not body:
        raise DataError(f"{path}: empty CSV")
    header = [c.strip() for c in body[0].split(",")]
    if expect_cols is not None and header != list(expect_cols):
        raise DataError(
            f"{path}: expected header {','.join(expect_cols)!r}, got {','.join(header)!r}"
        )
    rows = [ln.split(",") for ln in body[1:]]
    if not rows:
        raise DataError(f"{path}: CSV has a header but no rows")
    if any(len(r) != len(header) for r in rows):
        raise DataError(f"{path}: ragged rows")
    data = np.array([[float(v) for v in r] for r in rows])
    return {name: data[:, j] for j, name in enumerate(header)}


def write_report(path_or_file, pairs):
    """Flat key=value report, one per line, deterministic order."""
    text = "".join(f"{k}={_fmt(v)}\n" for k, v in pairs)
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w") as f:
            f.write(text)
    return text


def read_report(path):
    out = {}
    with open(path) as f:
        for ln in f:
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            if "=" not in ln:
                raise DataError(f"{path}: malformed report line {ln!r}")
            k, v = ln.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)
