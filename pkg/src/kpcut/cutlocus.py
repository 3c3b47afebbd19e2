"""Cut-locus evidence for the SU(2) K-P problem.

Geodesics from the identity are parametrised by a P-phase ``phi`` and a
K-coefficient ``a``: ``A = a * i diag(1, -1)`` and
``P = [[0, e^{i phi}], [-e^{-i phi}, 0]]`` (unit speed). With
``s = sqrt(1 + a^2)`` the geodesic is

    z(t) = e^{iat} (cos st - i (a/s) sin st),   w(t) = e^{i(at + phi)} sin(st) / s

so every (phi, a) hits the diagonal (singular) set first at ``t = pi / s``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from .geodesics import GeodesicSpec, geodesic_control, geodesic_point, geodesic_points
from .lie import check_group, make_aiii
from .quotient import project_many, quotient_distance

__all__ = [
    "su2_geodesic",
    "su2_spec",
    "first_singular_hit",
    "SweepGrid",
    "SweepResult",
    "sweep_distance",
    "regular_non_intersection_check",
    "NonIntersectionReport",
    "convexity_check",
    "ConvexityReport",
    "DiscGrid",
    "cut_locus_report",
    "CutLocusReport",
]


def su2_geodesic(phi, a, t):
    """Closed-form ``(z, w)`` of the unit-speed SU(2) geodesic; broadcasts over inputs."""
    phi, a, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (phi, a, t)))
    s = np.sqrt(1.0 + a * a)
    sn = np.sin(s * t) / s
    rot = np.exp(1j * a * t)
    z = rot * (np.cos(s * t) - 1j * a * sn)
    w = rot * np.exp(1j * phi) * sn
    return z, w


def su2_matrix(z, w) -> np.ndarray:
    return np.array([[z, w], [-np.conj(w), np.conj(z)]])


def su2_spec(phi: float, a: float, t_max: float = math.pi, dt: float = 1e-3) -> GeodesicSpec:
    """GeodesicSpec for the (phi, a) parametrisation on AIII(2, 1)."""
    dec = make_aiii(2, 1)
    A = a * dec.basis_K[0]
    P = math.cos(phi) * dec.basis_P[0] + math.sin(phi) * dec.basis_P[1]
    return GeodesicSpec(dec, A, P, t_max=t_max, dt=dt)


# first singular hit


def _h_and_slope(spec: GeodesicSpec, t: float):
    X = geodesic_point(spec, t)
    V = geodesic_control(spec, t)
    z = X[0, 0]
    zdot = (V @ X)[0, 0]
    return 1.0 - abs(z) ** 2, -2.0 * (np.conj(z) * zdot).real


def first_singular_hit(spec: GeodesicSpec, tol: float = 1e-10, t_precision: float = 1e-12):
    """First ``t > 0`` where the projected geodesic reaches ``|z| = 1``.

    Local minima of ``1 - |z|^2`` on the sample grid are refined by
    bisection on the sign of its time derivative; the first one whose
    refined value is below ``tol`` is returned as ``(t, X(t))``. Returns
    None when there is no hit in ``(0, t_max]``.
    """
    if spec.n != 2:
        raise ValueError("first_singular_hit is defined for SU(2)")
    times = spec.times()
    if len(times) < 3:
        return None
    pts = geodesic_points(spec, times)
    h = 1.0 - np.abs(pts[:, 0, 0]) ** 2
    for k in range(1, len(times)):
        right_ok = k == len(times) - 1 or h[k] <= h[k + 1]
        if not (h[k] <= h[k - 1] and right_ok):
            continue
        lo, hi = times[k - 1], times[min(k + 1, len(times) - 1)]
        if _h_and_slope(spec, hi)[1] < 0:
            t_star = hi
        else:
            while hi - lo > t_precision:
                mid = 0.5 * (lo + hi)
                if _h_and_slope(spec, mid)[1] < 0:
                    lo = mid
                else:
                    hi = mid
            t_star = 0.5 * (lo + hi)
        if _h_and_slope(spec, t_star)[0] < tol:
            return float(t_star), geodesic_point(spec, min(t_star, spec.t_max))
    return None


# distance sweep


@dataclass
class SweepGrid:
    """Sweep parameters.

    ``seed_radius`` is the operator-norm distance below which a grid
    near-approach is handed to local refinement; ``tie`` defaults to
    ``2 * dt``.
    """

    n_phases: int = 64
    a_steps: int = 33
    a_max: float = 4.0
    dt: float = 1e-3
    t_max: float = 1.2 * math.pi
    tie: Optional[float] = None
    seed_radius: float = 0.5
    projective: bool = False
    refine_tol: float = 1e-10
    dedup_tol: float = 1e-5
    margin: float = 0.3

    @property
    def tie_window(self) -> float:
        return 2.0 * self.dt if self.tie is None else self.tie

    def phases(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.n_phases) / self.n_phases

    def a_values(self) -> np.ndarray:
        return np.linspace(-self.a_max, self.a_max, self.a_steps)


@dataclass
class SweepResult:
    status: str
    best_time: Optional[float]
    minimizers: list = field(default_factory=list)
    multiplicity: int = 0
    runner_up_time: Optional[float] = None
    closest_approach: float = float("inf")
    n_seeds: int = 0
    n_refined: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _op_distance(z, w, u, v):
    # X - U has quaternion form for SU(2), so its operator norm is this.
    return np.sqrt(np.abs(z - u) ** 2 + np.abs(w - v) ** 2)


def _refine(seed, u, v, tol):
    phi0, a0, t0 = seed

    def residual(x):
        z, w = su2_geodesic(x[0], x[1], x[2])
        d = np.array([z - u, w - v])
        return np.concatenate([d.real, d.imag])

    sol = optimize.least_squares(residual, [phi0, a0, t0], method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    res = float(np.linalg.norm(residual(sol.x)))
    return sol.x, res < tol, res


def _cluster(solutions, tol):
    clusters = []
    for phi, a, t in solutions:
        for c in clusters:
            dphi = abs((phi - c[0] + math.pi) % (2 * math.pi) - math.pi)
            if dphi < tol and abs(a - c[1]) < tol:
                break
        else:
            clusters.append((phi % (2 * math.pi), a, t))
    return clusters


def sweep_distance(target, grid: SweepGrid | None = None) -> SweepResult:
    """Earliest arrival time at ``target`` over the (phase, K-coefficient) family.

    Every grid cell's geodesic is scanned on the time grid; near-approaches
    within ``seed_radius`` seed a local least-squares solve for an exact hit
    ``X(t; phi, a) = target``. Solutions within ``tie`` of the best time are
    the minimizers; distinct (phi, a) clusters give the multiplicity (more
    than one means a cut point). In projective mode ``-target`` also counts.
    """
    grid = grid or SweepGrid()
    U = check_group(target)
    if U.shape != (2, 2):
        raise ValueError("sweep_distance is defined for SU(2)")
    signs = (1.0, -1.0) if grid.projective else (1.0,)
    if min(np.linalg.norm(s * U - np.eye(2)) for s in signs) < 1e-12:
        return SweepResult("identity", 0.0, closest_approach=0.0)

    times = np.arange(1, int(math.floor(grid.t_max / grid.dt)) + 1) * grid.dt
    phases = grid.phases()
    seeds = []
    closest = float("inf")
    for a in grid.a_values():
        z, w = su2_geodesic(phases[:, None], a, times[None, :])
        for sign in signs:
            D = _op_distance(z, w, sign * U[0, 0], sign * U[0, 1])
            closest = min(closest, float(D.min()))
            inner = (D[:, 1:-1] <= D[:, :-2]) & (D[:, 1:-1] <= D[:, 2:]) & (D[:, 1:-1] < grid.seed_radius)
            for j, k in zip(*np.nonzero(inner)):
                seeds.append((times[k + 1], phases[j], a, sign, D[j, k + 1]))
    seeds.sort()

    solutions = []
    best = math.inf
    refined = 0
    for t0, phi0, a0, sign, _ in seeds:
        if t0 > best + grid.margin:
            break
        x, ok, _ = _refine((phi0, a0, t0), sign * U[0, 0], sign * U[0, 1], grid.refine_tol)
        refined += 1
        if ok and 0.0 < x[2] <= grid.t_max * (1 + 1e-9):
            solutions.append((float(x[0]), float(x[1]), float(x[2])))
            best = min(best, x[2])
    if not solutions:
        return SweepResult("unreached", None, closest_approach=closest, n_seeds=len(seeds), n_refined=refined)

    solutions.sort(key=lambda s: s[2])
    best = solutions[0][2]
    winners = [s for s in solutions if s[2] <= best + grid.tie_window]
    clusters = _cluster(winners, grid.dedup_tol)
    others = [s for s in solutions if s[2] > best + grid.tie_window]
    minimizers = [{"phase": c[0], "a": c[1], "time": c[2]} for c in sorted(clusters)]
    return SweepResult(
        "reached",
        float(best),
        minimizers,
        len(clusters),
        runner_up_time=float(others[0][2]) if others else None,
        closest_approach=closest,
        n_seeds=len(seeds),
        n_refined=refined,
    )


# non-intersection of projected geodesics


@dataclass
class PairRecord:
    i: int
    j: int
    coincident: bool
    crossings: list
    min_separation: float


@dataclass
class NonIntersectionReport:
    pairs: list
    start_radius: float

    @property
    def intersections(self) -> list:
        return [p for p in self.pairs if not p.coincident and p.crossings]

    @property
    def passed(self) -> bool:
        return not self.intersections


def _regular_disc_curve(spec: GeodesicSpec, t_max: float, dt: float) -> np.ndarray:
    s = GeodesicSpec(spec.dec, spec.A, spec.P, t_max=t_max, dt=dt)
    hit = first_singular_hit(s)
    times = s.times()
    if hit is not None:
        times = times[times < hit[0]]
    return project_many(geodesic_points(s, times))


def _segment_crossings(c1, c2):
    a0, a1 = c1[:-1], c1[1:]
    b0, b1 = c2[:-1], c2[1:]
    found = []

    def cross(o, p, q):
        return (p[..., 0] - o[..., 0]) * (q[..., 1] - o[..., 1]) - (p[..., 1] - o[..., 1]) * (q[..., 0] - o[..., 0])

    chunk = 512
    for s in range(0, len(a0), chunk):
        A0, A1 = a0[s : s + chunk, None, :], a1[s : s + chunk, None, :]
        B0, B1 = b0[None, :, :], b1[None, :, :]
        d1 = cross(B0, B1, A0)
        d2 = cross(B0, B1, A1)
        d3 = cross(A0, A1, B0)
        d4 = cross(A0, A1, B1)
        hit = (d1 * d2 < 0) & (d3 * d4 < 0)
        for i, j in zip(*np.nonzero(hit)):
            lam = d1[i, j] / (d1[i, j] - d2[i, j])
            found.append((a0[s + i] + lam * (a1[s + i] - a0[s + i])).tolist())
    return found


def regular_non_intersection_check(
    specs: Sequence[GeodesicSpec], t_max: float, dt: float, tol: float, start_radius: Optional[float] = None
) -> NonIntersectionReport:
    """Check that projected geodesics from the identity do not cross in the open disc.

    Each projected curve is cut at its first singular hit. Proper crossings
    between the polylines are reported, ignoring the ball of radius
    ``start_radius`` (default ``tol``) around the shared start point (1, 0).
    ``min_separation`` is the closest-point distance between the curves
    outside that ball. Pairs whose projections coincide (conjugate
    geodesics) are flagged ``coincident``.
    """
    start_radius = tol if start_radius is None else start_radius
    curves = [_regular_disc_curve(s, t_max, dt) for s in specs]
    start = np.array([1.0, 0.0])
    trimmed = [c[np.linalg.norm(c - start, axis=1) >= start_radius] for c in curves]
    pairs = []
    for i, j in itertools.combinations(range(len(specs)), 2):
        m = min(len(curves[i]), len(curves[j]))
        coincident = m > 1 and np.max(np.linalg.norm(curves[i][:m] - curves[j][:m], axis=1)) < 1e-9
        c1, c2 = trimmed[i], trimmed[j]
        if len(c1) < 2 or len(c2) < 2:
            pairs.append(PairRecord(i, j, coincident, [], float("inf")))
            continue
        sep = min(float(np.min(np.linalg.norm(c1[k : k + 256, None, :] - c2[None, :, :], axis=2))) for k in range(0, len(c1), 256))
        crossings = [] if coincident else _segment_crossings(c1, c2)
        pairs.append(PairRecord(i, j, coincident, crossings, sep))
    return NonIntersectionReport(pairs, start_radius)


# convexity of the distance between projected geodesics


@dataclass
class ConvexityReport:
    t_grid: list
    distances: list
    second_differences: list
    failures: list

    @property
    def min_second_difference(self) -> float:
        return min(self.second_differences) if self.second_differences else 0.0


def convexity_check(spec1: GeodesicSpec, spec2: GeodesicSpec, t_grid: Sequence[float], ds: float = 2e-3) -> ConvexityReport:
    """Sample ``f(t) = d_Q(pi(gamma_1(t)), pi(gamma_2(t)))`` and its second differences.

    Distances come from quotient geodesic shooting; a failed shot is listed
    in ``failures`` and contributes the chord-length bound instead.
    """
    t_grid = [float(t) for t in t_grid]
    p1 = project_many(geodesic_points(spec1, t_grid))
    p2 = project_many(geodesic_points(spec2, t_grid))
    f, failures = [], []
    for t, a, b in zip(t_grid, p1, p2):
        d = quotient_distance(a, b, ds=ds)
        if not d.converged:
            failures.append({"t": t, "residual": d.residual, "chord_bound": d.chord_bound})
        f.append(d.distance)
    second = [f[k + 1] - 2 * f[k] + f[k - 1] for k in range(1, len(f) - 1)]
    return ConvexityReport(t_grid, f, second, failures)


# cut-locus table


@dataclass
class DiscGrid:
    """Targets for :func:`cut_locus_report`.

    Regular targets sit at ``radii x angles`` (plus the centre) with
    ``w`` real positive; singular targets are ``diag(e^{i theta}, e^{-i theta})``.
    """

    radii: tuple = (0.4, 0.75)
    n_angles: int = 4
    include_center: bool = True
    diagonal_angles: tuple = (math.pi, math.pi / 3)

    def regular_targets(self):
        zs = [0j] if self.include_center else []
        for r in self.radii:
            for k in range(self.n_angles):
                zs.append(r * np.exp(2j * math.pi * k / self.n_angles))
        return zs


@dataclass
class CutLocusReport:
    rows: list

    @property
    def passed(self) -> bool:
        return all(r["passed"] for r in self.rows)


def _regular_target(z: complex) -> np.ndarray:
    return su2_matrix(z, math.sqrt(max(0.0, 1.0 - abs(z) ** 2)))


def cut_locus_report(grid: DiscGrid | None = None, sweep: SweepGrid | None = None) -> CutLocusReport:
    """Unique minimizers at regular targets, multiple ones at diagonal targets."""
    grid = grid or DiscGrid()
    rows = []
    targets = [("regular", z, _regular_target(z)) for z in grid.regular_targets()]
    targets += [("singular", np.exp(1j * th), su2_matrix(np.exp(1j * th), 0.0)) for th in grid.diagonal_angles]
    for kind, z, U in targets:
        if np.linalg.norm(U - np.eye(2)) < 1e-12:
            continue
        res = sweep_distance(U, sweep)
        if kind == "regular":
            passed = res.status == "reached" and res.multiplicity == 1
        else:
            passed = res.status == "reached" and res.multiplicity >= 2
        rows.append(
            {
                "kind": kind,
                "z": [float(np.real(z)), float(np.imag(z))],
                "status": res.status,
                "best_time": res.best_time,
                "multiplicity": res.multiplicity,
                "passed": bool(passed),
            }
        )
    return CutLocusReport(rows)
