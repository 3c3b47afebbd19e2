"""Command-line front end: ``kpcut <command> [options]``.

Exit codes: 0 success (an "unreached" sweep is a success), 2 validation
error, 3 numerical failure. The default seed is read from ``KPCUT_SEED``.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .cutlocus import DiscGrid, SweepGrid, cut_locus_report, sweep_distance
from .geodesics import GeodesicSpec, controls, sample_geodesic
from .io import (
    curve_to_csv,
    curve_to_json,
    disc_curve_to_csv,
    matrix_to_json,
    metric_grid_csv,
    parse_matrix,
    read_disc_curve_csv,
    report_json,
)
from .lie import NULLSPACE_TOL, aiii_regular_witness, isotropy_algebra_dim, make_aiii
from .quotient import EPS_BOUNDARY, SingularPointError, disc_velocity, lift_curve, metric_components, project_many, sectional_curvature

SEED_ENV = "KPCUT_SEED"
EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3

DEFAULT_TOLERANCES = {
    "eps_boundary": EPS_BOUNDARY,
    "eps_target": SweepGrid.seed_radius,
    "tie": None,
    "nullspace_tol": NULLSPACE_TOL,
}


class NumericalFailure(RuntimeError):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _tolerances(args) -> dict:
    tol = dict(DEFAULT_TOLERANCES)
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        unknown = set(cfg) - set(tol)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        tol.update(cfg)
    return tol


def _flags(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}


def _write(args, text: str) -> None:
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)


def _sweep_grid(args, tol) -> SweepGrid:
    return SweepGrid(
        n_phases=args.phases,
        a_steps=args.a_steps,
        a_max=args.a_max,
        dt=args.dt,
        t_max=args.t_max,
        tie=tol["tie"],
        seed_radius=tol["eps_target"],
        projective=args.projective,
    )


# commands


def cmd_geodesic(args, tol, seed):
    dec = make_aiii(args.n, args.q)
    A = parse_matrix(args.A, args.n)
    P = parse_matrix(args.P, args.n)
    spec = GeodesicSpec(dec, A, P, t_max=args.t_max, dt=args.dt, normalize=args.normalize)
    samples = sample_geodesic(spec)
    if args.disc_out:
        if args.n != 2:
            raise ValueError("--disc-out needs n = 2")
        keep = samples.times >= args.t0
        pts = samples.disc[keep]
        # the start projects onto the rim: skip leading rim samples, stop at the next rim approach
        keep_r = 1.0 - np.sum(pts**2, axis=1) >= tol["eps_boundary"]
        if not np.any(keep_r):
            raise NumericalFailure("projected curve never leaves the boundary layer")
        first = int(np.argmax(keep_r))
        stop = first + int(np.argmin(keep_r[first:])) if not np.all(keep_r[first:]) else len(keep_r)
        keep_r[:] = False
        keep_r[first:stop] = True
        t = samples.times[keep][keep_r]
        X = samples.points[keep][keep_r]
        V = disc_velocity(X, controls(spec, t))
        with open(args.disc_out, "w", newline="") as fh:
            fh.write(disc_curve_to_csv(t, project_many(X), V))
    if args.format == "csv":
        _write(args, curve_to_csv(samples))
    else:
        body = curve_to_json(samples)
        _write(args, report_json("geodesic", _flags(args), seed, tol, body))


def cmd_metric_grid(args, tol, seed):
    if not (0.0 < args.r_max < 1.0):
        raise ValueError("--r-max must satisfy 0 < r-max < 1")
    if args.resolution < 1:
        raise ValueError("--resolution must be positive")
    radii = np.linspace(0.0, args.r_max, args.resolution)
    angles = 2.0 * math.pi * np.arange(args.resolution) / args.resolution
    rows = []
    for r in radii:
        for th in angles:
            p = np.array([r * math.cos(th), r * math.sin(th)])
            rows.append((p[0], p[1], metric_components(p)[0, 0], sectional_curvature(p)))
    _write(args, metric_grid_csv(rows))


def cmd_sweep(args, tol, seed):
    U = parse_matrix(args.target, 2)
    res = sweep_distance(U, _sweep_grid(args, tol))
    _write(args, report_json("sweep", _flags(args), seed, tol, res.to_dict()))


def cmd_isotropy(args, tol, seed):
    x = parse_matrix(args.x)
    n = x.shape[0]
    q = args.q if args.q is not None else n // 2
    dec = make_aiii(n, q)
    dim = isotropy_algebra_dim(x, dec, tol["nullspace_tol"])
    body = {"n": n, "q": q, "isotropy_dim": dim, "regular": dim == 0}
    _write(args, report_json("isotropy", _flags(args), seed, tol, body))


def cmd_witness(args, tol, seed):
    try:
        W = aiii_regular_witness(args.n, args.q, seed=seed)
    except RuntimeError as exc:
        raise NumericalFailure(str(exc)) from None
    dec = make_aiii(args.n, args.q)
    body = {
        "n": args.n,
        "q": args.q,
        "matrix": matrix_to_json(W),
        "isotropy_dim": isotropy_algebra_dim(W, dec, tol["nullspace_tol"]),
    }
    _write(args, report_json("witness", _flags(args), seed, tol, body))


def cmd_lift(args, tol, seed):
    with open(args.curve) as fh:
        times, points, velocities = read_disc_curve_csv(fh.read())
    if args.q0:
        q0 = parse_matrix(args.q0, 2)
    else:
        z = complex(points[0, 0], points[0, 1])
        w = math.sqrt(max(0.0, 1.0 - abs(z) ** 2))
        q0 = np.array([[z, w], [-w, z.conjugate()]])
    samples = lift_curve(times, points, velocities, q0)
    err = float(np.max(np.linalg.norm(samples.disc - points, axis=1)))
    if not np.all(np.isfinite(samples.points)):
        raise NumericalFailure("lift produced non-finite values")
    if args.format == "csv":
        _write(args, curve_to_csv(samples))
    else:
        body = curve_to_json(samples)
        body["roundtrip_projection_error"] = err
        _write(args, report_json("lift", _flags(args), seed, tol, body))
    sys.stderr.write(f"round-trip projection sup error: {err:.3e}\n")


def cmd_cutlocus(args, tol, seed):
    grid = DiscGrid(
        radii=tuple(args.radii),
        n_angles=args.angles,
        include_center=not args.no_center,
        diagonal_angles=tuple(args.diag_angles),
    )
    rep = cut_locus_report(grid, _sweep_grid(args, tol))
    body = {"passed": rep.passed, "rows": rep.rows}
    _write(args, report_json("cutlocus", _flags(args), seed, tol, body))


# parser


def _add_sweep_options(p):
    d = SweepGrid()
    p.add_argument("--phases", type=int, default=d.n_phases)
    p.add_argument("--a-steps", type=int, default=d.a_steps)
    p.add_argument("--a-max", type=float, default=d.a_max)
    p.add_argument("--t-max", type=float, default=d.t_max)
    p.add_argument("--dt", type=float, default=d.dt)
    p.add_argument("--projective", action="store_true", help="match the target up to sign")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kpcut", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"kpcut {__version__}")
    parser.add_argument("--seed", type=int, default=None, help=f"RNG seed (default: ${SEED_ENV} or 0)")
    parser.add_argument("--config", help="JSON file overriding eps_boundary, eps_target, tie, nullspace_tol")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("geodesic", help="sample exp(At) exp((P-A)t)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--A", required=True, help='JSON matrix of [re, im] pairs, or "zero"')
    p.add_argument("--P", required=True)
    p.add_argument("--t-max", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--disc-out", help="also write the projected disc curve (t, x, y, vx, vy) here")
    p.add_argument("--t0", type=float, default=1e-3, help="first time written to --disc-out")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_geodesic)

    p = sub.add_parser("metric-grid", help="metric and curvature on a polar disc grid")
    p.add_argument("--resolution", type=int, default=21)
    p.add_argument("--r-max", type=float, default=0.9)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_metric_grid)

    p = sub.add_parser("sweep", help="earliest arrival time at an SU(2) target")
    p.add_argument("--target", required=True)
    _add_sweep_options(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("isotropy", help="isotropy dimension of x under K conjugation")
    p.add_argument("--x", required=True)
    p.add_argument("--q", type=int, default=None, help="K block size (default n // 2)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_isotropy)

    p = sub.add_parser("witness", help="AIII element with discrete isotropy")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("lift", help="horizontal lift of a disc curve CSV")
    p.add_argument("--curve", required=True)
    p.add_argument("--q0", help="starting group element (default: w real positive above the first point)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("cutlocus", help="minimizer multiplicity table over disc targets")
    d = DiscGrid()
    p.add_argument("--radii", type=float, nargs="+", default=list(d.radii))
    p.add_argument("--angles", type=int, default=d.n_angles)
    p.add_argument("--no-center", action="store_true")
    p.add_argument("--diag-angles", type=float, nargs="*", default=list(d.diagonal_angles))
    _add_sweep_options(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_cutlocus)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        seed = args.seed if args.seed is not None else _default_seed()
        args.seed = seed
        tol = _tolerances(args)
        args.func(args, tol, seed)
    except (NumericalFailure, SingularPointError, FloatingPointError) as exc:
        sys.stderr.write(f"kpcut: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"kpcut: error: {exc}\n")
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
