"""Acceptance criteria 1-10, each at its stated tolerance.

Every test prints one ``criterion N [PASS|FAIL]`` line and the summary is
repeated at the end of the pytest run (see conftest.py).
"""
import itertools
import math
import time

import numpy as np

from _oracles import fd_curvature, fd_derivatives, fiber_point, random_disc_points
from conftest import record
from kpcut.cutlocus import (
    SweepGrid,
    convexity_check,
    cut_locus_report,
    first_singular_hit,
    regular_non_intersection_check,
    su2_spec,
    sweep_distance,
)
from kpcut.geodesics import GeodesicSpec, controls, curve_length, geodesic_points, sample_geodesic
from kpcut.lie import aiii_regular_witness, isotropy_algebra_dim, killing_inner, make_aiii
from kpcut.numerics import make_rng, mat_exp
from kpcut.quotient import (
    disc_velocity,
    geodesic_rhs,
    lift_curve,
    lift_tangent,
    metric_components,
    project_many,
    quotient_geodesic,
    sectional_curvature,
)

SU2 = make_aiii(2, 1)
K1 = SU2.basis_K[0]
P1 = SU2.basis_P[0]


def test_criterion_01_metric_reproduction():
    start = time.perf_counter()
    rng = make_rng(101)
    pts = random_disc_points(rng, 200, 0.95)
    worst = 0.0
    for p in pts:
        q = fiber_point(p, rng.uniform(0, 2 * math.pi))
        lifts = [lift_tangent(q, e) for e in np.eye(2)]
        g = np.array([[killing_inner(a, b, 0.5) for b in lifts] for a in lifts])
        closed = np.eye(2) / (1 - p @ p)
        worst = max(worst, np.abs(g - closed).max(), np.abs(metric_components(p) - closed).max())
    elapsed = time.perf_counter() - start
    ok = worst < 1e-10 and elapsed < 1.0
    record(1, "quotient metric from lifted tangents", ok, f"max entry error {worst:.2e}, {elapsed:.2f}s")
    assert ok


def test_criterion_02_curvature_formula():
    start = time.perf_counter()
    g = np.linspace(-0.9, 0.9, 21)
    X, Y = np.meshgrid(g, g)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= 0.9 + 1e-12]
    err = np.abs(fd_curvature(metric_components, pts) - sectional_curvature(pts)).max()
    elapsed = time.perf_counter() - start
    ok = err < 1e-5 and elapsed < 1.0
    record(2, "curvature -2/(1-r^2) vs finite-difference tensor", ok, f"{len(pts)} points, max error {err:.2e}, {elapsed:.2f}s")
    assert ok


def test_criterion_03_projected_geodesics_solve_quotient_ode():
    start = time.perf_counter()
    rng = make_rng(303)
    dt = 1e-3
    worst = 0.0
    for _ in range(50):
        A = SU2.random_K(rng, norm=1.0) * rng.uniform(0, 2.0) / np.linalg.norm(K1)  # Frobenius norm <= 2
        P = SU2.random_P(rng, norm=1.0)
        spec = GeodesicSpec(SU2, A, P, t_max=4.0, dt=dt)
        hit = first_singular_hit(spec)[0]
        t_end = min(2.0, hit - 0.05)
        times = np.arange(int(round(0.05 / dt)) - 2, int(math.floor(t_end / dt)) + 3) * dt
        z = project_many(geodesic_points(spec, times))
        v, acc = fd_derivatives(z, dt)
        state = np.concatenate([z[2:-2], v], axis=1)
        res = acc - geodesic_rhs(state)[:, 2:]
        worst = max(worst, np.abs(res).max())
    elapsed = time.perf_counter() - start
    ok = worst < 1e-5 and elapsed < 10.0
    record(3, "projected K-P geodesics satisfy the disc geodesic ODE", ok, f"50 specs, sup residual {worst:.2e}, {elapsed:.2f}s")
    assert ok


def test_criterion_04_roundtrip_lift():
    spec = GeodesicSpec(SU2, np.zeros((2, 2)), P1, t_max=2.0, dt=1e-4)
    times = spec.times()
    times = times[times >= 0.05 - 1e-12]
    X = geodesic_points(spec, times)
    pts = project_many(X)
    vel = disc_velocity(X, controls(spec, times))
    start = time.perf_counter()
    lifted = lift_curve(times, pts, vel, X[0])
    elapsed = time.perf_counter() - start
    err = np.linalg.norm(lifted.points - X, axis=(1, 2)).max()
    ok = err < 1e-8 and elapsed < 5.0
    record(4, "round-trip lift of a projected geodesic", ok, f"sup Frobenius error {err:.2e}, {elapsed:.2f}s")
    assert ok


def test_criterion_05_radial_closed_form():
    g = quotient_geodesic([0.0, 0.0, 1.0, 0.0], 3.0, 1e-3)
    mask = g.times <= 1.4
    err = np.abs(g.points[mask, 0] - np.sin(g.times[mask])).max()
    hit_err = abs(g.hit_time - math.pi / 2)
    rel = []
    for t in (0.3, 0.8, 1.5, 2.5):
        res = sweep_distance(mat_exp(P1, t))
        rel.append(abs(res.best_time - t) / t)
    ok = err < 1e-7 and g.hit_boundary and hit_err < 1e-4 and max(rel) < 0.02
    record(5, "radial quotient geodesic x = sin s", ok, f"max |x - sin s| {err:.2e}, hit error {hit_err:.1e}, sweep rel error {max(rel):.1e}")
    assert ok


def test_criterion_06_cartan_relations():
    worst_bracket = worst_orth = 0.0
    for n in range(2, 7):
        for q in range(1, n // 2 + 1):
            dec = make_aiii(n, q)
            for Bs, Cs, wrong in ((dec.basis_K, dec.basis_K, 1), (dec.basis_K, dec.basis_P, 0), (dec.basis_P, dec.basis_P, 1)):
                for B, C in itertools.product(Bs, Cs):
                    part = dec.split(B @ C - C @ B)[wrong]
                    worst_bracket = max(worst_bracket, np.linalg.norm(part))
            gram = np.array([[dec.inner(K, P) for P in dec.basis_P] for K in dec.basis_K])
            worst_orth = max(worst_orth, np.abs(gram).max())
    ok = worst_bracket < 1e-12 and worst_orth < 1e-12
    record(6, "Cartan relations and K-P orthogonality, n <= 6", ok, f"bracket residual {worst_bracket:.1e}, orthogonality {worst_orth:.1e}")
    assert ok


def test_criterion_07_isotropy_classification():
    start = time.perf_counter()
    rng = make_rng(707)
    diag = [isotropy_algebra_dim(np.diag([np.exp(1j * th), np.exp(-1j * th)]), SU2, 1e-8) for th in rng.uniform(0, 2 * np.pi, 8)]
    off = [isotropy_algebra_dim(fiber_point(p, rng.uniform(0, 6.3)), SU2, 1e-8) for p in random_disc_points(rng, 8, 0.95)]
    wit = {nq: isotropy_algebra_dim(aiii_regular_witness(*nq), make_aiii(*nq), 1e-8) for nq in [(2, 1), (3, 1), (4, 1), (4, 2), (5, 2)]}
    elapsed = time.perf_counter() - start
    ok = set(diag) == {1} and set(off) == {0} and set(wit.values()) == {0} and elapsed < 5.0
    record(7, "isotropy dimensions (diagonal 1, off-diagonal 0, witnesses 0)", ok, f"witness dims {wit}, {elapsed:.2f}s")
    assert ok


def test_criterion_08_cut_locus():
    start = time.perf_counter()
    report = cut_locus_report()
    regular = [r for r in report.rows if r["kind"] == "regular"]
    singular = {round(math.atan2(r["z"][1], r["z"][0]), 6): r["multiplicity"] for r in report.rows if r["kind"] == "singular"}
    hits = [first_singular_hit(su2_spec(phi, 0.0, t_max=4.0))[0] for phi in np.linspace(0, 2 * math.pi, 8, endpoint=False)]
    hit_err = max(abs(t - math.pi) for t in hits)
    elapsed = time.perf_counter() - start
    ok = (
        len(regular) == 9
        and all(r["multiplicity"] == 1 and math.hypot(*r["z"]) <= 0.75 + 1e-12 for r in regular)
        and singular.get(round(math.pi, 6), 0) >= 2
        and singular.get(round(math.pi / 3, 6), 0) >= 2
        and hit_err < 1e-6
        and elapsed < 60.0
    )
    record(8, "cut locus = singular circle", ok, f"regular multiplicities {[r['multiplicity'] for r in regular]}, diagonal {singular}, hit error {hit_err:.1e}, {elapsed:.1f}s")
    assert ok


def test_criterion_09_convexity_and_non_intersection():
    rng = make_rng(909)
    worst = math.inf
    failures = 0
    specs = []
    for _ in range(10):
        a1, a2 = rng.uniform(-1.5, 1.5, 2)
        s1 = su2_spec(rng.uniform(0, 2 * math.pi), a1, t_max=4.0)
        s2 = su2_spec(rng.uniform(0, 2 * math.pi), a2, t_max=4.0)
        specs += [s1, s2]
        T = min(math.pi / math.sqrt(1 + a1 * a1), math.pi / math.sqrt(1 + a2 * a2))
        rep = convexity_check(s1, s2, np.linspace(0.1 * T, 0.9 * T, 12))
        worst = min(worst, rep.min_second_difference)
        failures += len(rep.failures)
    cross = regular_non_intersection_check(specs, 4.0, 1e-2, 0.02)
    ok = worst >= -1e-3 and failures == 0 and cross.passed
    record(9, "distance convexity and regular non-intersection", ok, f"min second difference {worst:.2e}, shooting failures {failures}, crossings {len(cross.intersections)}")
    assert ok


def test_criterion_10_K_symmetry():
    rng = make_rng(1010)
    spec = GeodesicSpec(SU2, 0.7 * K1, SU2.random_P(rng, norm=1.0), t_max=3.0, dt=1e-3)
    base = sample_geodesic(spec)
    L0 = curve_length(base, SU2).length
    h0 = first_singular_hit(spec)[0]
    prof0 = np.abs(base.points[:, 0, 0])
    dL = dh = dz = 0.0
    for _ in range(16):
        conj = spec.conjugated(SU2.random_k(rng))
        s = sample_geodesic(conj)
        dL = max(dL, abs(curve_length(s, SU2).length - L0))
        dh = max(dh, abs(first_singular_hit(conj)[0] - h0))
        dz = max(dz, np.abs(np.abs(s.points[:, 0, 0]) - prof0).max())
    ok = max(dL, dh, dz) < 1e-9
    record(10, "invariance under conjugation by K", ok, f"length {dL:.1e}, hit time {dh:.1e}, |z| profile {dz:.1e}")
    assert ok
