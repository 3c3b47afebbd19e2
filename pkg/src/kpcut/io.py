"""Matrix and curve (de)serialisation.

Matrices are nested lists of ``[re, im]`` pairs; plain numbers are accepted
as real entries. CSV curve files flatten matrices into ``re_ij``/``im_ij``
columns (0-based indices).
"""
from __future__ import annotations

import csv
import io
import json
from typing import Optional

import numpy as np

from . import __version__
from .geodesics import CurveSamples

__all__ = [
    "parse_matrix",
    "matrix_to_json",
    "curve_to_json",
    "curve_to_csv",
    "disc_curve_to_csv",
    "read_disc_curve_csv",
    "metric_grid_csv",
    "report_json",
]


def _entry(e) -> complex:
    if isinstance(e, (int, float)):
        return complex(e)
    if isinstance(e, (list, tuple)) and len(e) == 2 and all(isinstance(v, (int, float)) for v in e):
        return complex(e[0], e[1])
    raise ValueError(f"matrix entry must be a number or an [re, im] pair, got {e!r}")


def parse_matrix(text, n: Optional[int] = None) -> np.ndarray:
    """Parse a JSON matrix; ``"zero"`` gives the ``n x n`` zero matrix."""
    if isinstance(text, str):
        if text.strip().lower() == "zero":
            if n is None:
                raise ValueError("'zero' needs a known dimension")
            return np.zeros((n, n), dtype=complex)
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"matrix is not valid JSON: {exc}") from None
    else:
        data = text
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise ValueError("matrix must be a non-empty list of rows")
    M = np.array([[_entry(e) for e in row] for row in data], dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got {len(data)} rows of uneven or different length")
    if n is not None and M.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix, got {M.shape[0]}x{M.shape[1]}")
    return M


def matrix_to_json(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in M]


def curve_to_json(samples: CurveSamples) -> dict:
    out = {"times": samples.times.tolist(), "points": [matrix_to_json(X) for X in samples.points]}
    if samples.disc is not None:
        out["disc"] = samples.disc.tolist()
    return out


def _fmt(v: float) -> str:
    return repr(float(v))


def curve_to_csv(samples: CurveSamples) -> str:
    n = samples.n
    header = ["t"]
    for i in range(n):
        for j in range(n):
            header += [f"re_{i}{j}", f"im_{i}{j}"]
    if samples.disc is not None:
        header += ["x", "y"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for k, t in enumerate(samples.times):
        flat = samples.points[k].reshape(-1)
        row = [_fmt(t)] + [_fmt(f) for v in flat for f in (v.real, v.imag)]
        if samples.disc is not None:
            row += [_fmt(samples.disc[k, 0]), _fmt(samples.disc[k, 1])]
        w.writerow(row)
    return buf.getvalue()


def disc_curve_to_csv(times, points, velocities) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x", "y", "vx", "vy"])
    for t, p, v in zip(times, points, velocities):
        w.writerow([_fmt(t), _fmt(p[0]), _fmt(p[1]), _fmt(v[0]), _fmt(v[1])])
    return buf.getvalue()


def read_disc_curve_csv(text: str):
    """Inverse of :func:`disc_curve_to_csv`; returns ``(times, points, velocities)``."""
    rows = list(csv.DictReader(io.StringIO(text)))
    missing = {"t", "x", "y", "vx", "vy"} - set(rows[0] if rows else {})
    if not rows or missing:
        raise ValueError(f"disc curve CSV needs columns t, x, y, vx, vy (missing {sorted(missing)})")
    arr = np.array([[float(r[c]) for c in ("t", "x", "y", "vx", "vy")] for r in rows])
    return arr[:, 0], arr[:, 1:3], arr[:, 3:5]


def metric_grid_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "g_xx", "curvature"])
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def report_json(command: str, flags: dict, seed: int, tolerances: dict, body: dict) -> str:
    """JSON document with a reproducibility header; key order is fixed."""
    doc = {
        "header": {
            "tool": "kpcut",
            "version": __version__,
            "command": command,
            "flags": _clean(flags),
            "seed": int(seed),
            "tolerances": _clean(tolerances),
        },
        "result": _clean(body),
    }
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=True) + "\n"
