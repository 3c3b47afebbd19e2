"""The SU(2)/K quotient: disc chart, metric, curvature, geodesics and lifts.

A matrix ``[[z, w], [-w*, z*]]`` in SU(2) projects to ``z = x + iy`` in the
closed unit disc. The open disc is the regular part and carries the metric
``g = delta / (1 - r^2)``; the unit circle (diagonal matrices) is singular.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, optimize

from .geodesics import CurveSamples
from .numerics import DimensionError, DomainExit, integrate_ode, rk4_step, time_grid

__all__ = [
    "SingularPointError",
    "project",
    "project_many",
    "metric_components",
    "christoffel",
    "sectional_curvature",
    "lift_tangent",
    "disc_velocity",
    "geodesic_rhs",
    "QuotientGeodesic",
    "quotient_geodesic",
    "lift_curve",
    "quotient_length",
    "metric_speed",
    "chord_length",
    "QuotientDistance",
    "quotient_distance",
]

EPS_BOUNDARY = 1e-6
_SUBSTEP_SCALE = 0.005
_MAX_SUBSTEPS = 1000
# the seeding fan in quotient_distance only needs a rough endpoint
_FAN_SUBSTEP_SCALE = 0.05
_FAN_STEP_FACTOR = 4


class SingularPointError(ValueError):
    """A chart quantity was requested at a point with ``r^2 >= 1``."""


def project(X) -> np.ndarray:
    """Chart coordinates ``(Re X_11, Im X_11)`` of an SU(2) element."""
    X = np.asarray(X)
    if X.shape != (2, 2):
        raise DimensionError(f"projection is defined for SU(2) only, got shape {X.shape}")
    return np.array([X[0, 0].real, X[0, 0].imag])


def project_many(points) -> np.ndarray:
    points = np.asarray(points)
    if points.shape[-2:] != (2, 2):
        raise DimensionError("projection is defined for SU(2) only")
    return np.stack([points[..., 0, 0].real, points[..., 0, 0].imag], axis=-1)


def _one_minus_r2(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    D = 1.0 - p[..., 0] ** 2 - p[..., 1] ** 2
    if np.any(D <= 0):
        raise SingularPointError("point is not in the open unit disc (singular stratum)")
    return D


def metric_components(p) -> np.ndarray:
    """``g_ij = delta_ij / (1 - r^2)``; broadcasts over leading axes of ``p``."""
    f = 1.0 / _one_minus_r2(p)
    g = np.zeros(np.shape(f) + (2, 2))
    g[..., 0, 0] = f
    g[..., 1, 1] = f
    return g


def christoffel(p) -> np.ndarray:
    """Christoffel symbols ``(G^x_xx, G^x_xy, G^x_yy, G^y_xx, G^y_xy, G^y_yy)``."""
    p = np.asarray(p, dtype=float)
    D = _one_minus_r2(p)
    x, y = p[..., 0] / D, p[..., 1] / D
    return np.stack([x, y, -x, -y, x, y], axis=-1)


def sectional_curvature(p) -> np.ndarray | float:
    """Gaussian curvature ``-2 / (1 - r^2)``."""
    K = -2.0 / _one_minus_r2(p)
    return float(K) if np.ndim(K) == 0 else K


def lift_tangent(q, v) -> np.ndarray:
    """Unique ``P`` in P with ``d/dt project(exp(tP) q) = v`` at ``t = 0``.

    Parameters
    ----------
    q : (2, 2) array
        Fiber point in SU(2), regular (``|z| < 1``).
    v : (2,) array
        Chart tangent ``(vx, vy)``.
    """
    q = np.asarray(q)
    z, w = q[0, 0], q[0, 1]
    D = 1.0 - abs(z) ** 2
    if D <= 0:
        raise SingularPointError("cannot lift at a singular fiber (|z| = 1)")
    vx, vy = float(v[0]), float(v[1])
    alpha = (-vx * w.real + vy * w.imag) / D
    beta = (-vx * w.imag - vy * w.real) / D
    return np.array([[0.0, alpha + 1j * beta], [-alpha + 1j * beta, 0.0]])


def disc_velocity(X, V) -> np.ndarray:
    """Chart velocity of ``t -> exp(tV) X`` at ``t = 0``, i.e. ``(V X)_11``."""
    zdot = V[..., 0, 0] * X[..., 0, 0] + V[..., 0, 1] * X[..., 1, 0]
    return np.stack([np.real(zdot), np.imag(zdot)], axis=-1)


def geodesic_rhs(state) -> np.ndarray:
    """Right-hand side of the geodesic equation for states ``(x, y, vx, vy)``."""
    x, y, vx, vy = state[..., 0], state[..., 1], state[..., 2], state[..., 3]
    D = 1.0 - x * x - y * y
    ax = -(x * vx * vx + 2.0 * y * vx * vy - x * vy * vy) / D
    ay = -(-y * vx * vx + 2.0 * x * vx * vy + y * vy * vy) / D
    return np.stack([vx, vy, ax, ay], axis=-1)


def metric_speed(p, v) -> np.ndarray | float:
    """``sqrt(g(v, v))`` at chart point ``p``."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    s = np.sqrt((v[..., 0] ** 2 + v[..., 1] ** 2) / _one_minus_r2(p))
    return float(s) if np.ndim(s) == 0 else s


@dataclass
class QuotientGeodesic:
    """Integrated quotient geodesic.

    ``states`` rows are ``(x, y, vx, vy)``. When the curve reaches the
    boundary guard, ``hit_boundary`` is set and ``hit_time`` is the
    extrapolated arrival time at ``r = 1``.
    """

    times: np.ndarray
    states: np.ndarray
    hit_boundary: bool = False
    hit_time: Optional[float] = None

    @property
    def points(self) -> np.ndarray:
        return self.states[:, :2]

    @property
    def velocities(self) -> np.ndarray:
        return self.states[:, 2:]

    def speeds(self) -> np.ndarray:
        return metric_speed(self.points, self.velocities)


def _remaining_to_boundary(state) -> float:
    # Near r = 1 geodesics arrive radially; radial metric distance is arccos(r).
    x, y, vx, vy = state
    r = math.hypot(x, y)
    speed = metric_speed(state[:2], state[2:])
    v = math.hypot(vx, vy)
    cos_a = (x * vx + y * vy) / (r * v) if r > 0 and v > 0 else 1.0
    return math.acos(min(r, 1.0)) / (speed * max(cos_a, 1e-12))


def quotient_geodesic(start, t_max: float, dt: float, eps_boundary: float = EPS_BOUNDARY) -> QuotientGeodesic:
    """Integrate the disc geodesic equation with RK4 from ``start = (x, y, vx, vy)``.

    Integration stops early when ``r^2 >= 1 - eps_boundary``; this is an
    expected outcome and is reported through ``hit_boundary``/``hit_time``.
    """
    start = np.asarray(start, dtype=float)
    if start[0] ** 2 + start[1] ** 2 >= 1.0 - eps_boundary:
        raise SingularPointError("start point is on or beyond the boundary guard")

    def valid(s):
        return s[0] ** 2 + s[1] ** 2 < 1.0 - eps_boundary

    def substeps(s):
        # the solution varies on the time scale sqrt(1 - r^2) / speed near the rim
        D = 1.0 - s[0] ** 2 - s[1] ** 2
        speed = math.hypot(s[2], s[3]) / math.sqrt(D)
        return min(_MAX_SUBSTEPS, math.ceil(dt * speed / (_SUBSTEP_SCALE * math.sqrt(D))))

    try:
        times, states = integrate_ode(lambda t, s: geodesic_rhs(s), start, 0.0, t_max, dt, valid=valid, substeps=substeps)
    except DomainExit as exit_:
        hit = exit_.time + _remaining_to_boundary(exit_.state)
        return QuotientGeodesic(exit_.times, exit_.states, True, hit)
    return QuotientGeodesic(times, states)


def _lift_rhs(gamma: np.ndarray, v) -> np.ndarray:
    return lift_tangent(gamma, v) @ gamma


def lift_curve(times, points, velocities, q0, point_tol: float = 1e-8) -> CurveSamples:
    """Horizontal lift of a disc curve starting at ``q0``.

    Integrates ``dX/dt = P(t) X`` with ``P(t) = lift_tangent(X(t), v(t))`` by
    RK4 over the sample intervals. Mid-interval velocities come from the
    cubic Hermite interpolant of the sampled positions and velocities.
    """
    times = np.asarray(times, dtype=float)
    points = np.asarray(points, dtype=float)
    velocities = np.asarray(velocities, dtype=float)
    q0 = np.asarray(q0, dtype=complex)
    if np.linalg.norm(project(q0) - points[0]) > point_tol:
        raise ValueError("q0 does not project onto the first disc point")
    _one_minus_r2(points)

    out = np.empty((len(times), 2, 2), dtype=complex)
    out[0] = q0
    X = q0
    for i in range(len(times) - 1):
        h = times[i + 1] - times[i]
        v0, v1 = velocities[i], velocities[i + 1]
        vmid = 1.5 * (points[i + 1] - points[i]) / h - 0.25 * (v0 + v1)
        k1 = _lift_rhs(X, v0)
        k2 = _lift_rhs(X + 0.5 * h * k1, vmid)
        k3 = _lift_rhs(X + 0.5 * h * k2, vmid)
        k4 = _lift_rhs(X + h * k3, v1)
        X = X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 1] = X
    return CurveSamples(times, out, project_many(out))


def quotient_length(times, points, velocities) -> float:
    """Trapezoidal ``integral sqrt(g(v, v)) dt`` along a sampled disc curve."""
    times = np.asarray(times, dtype=float)
    if len(times) < 2:
        return 0.0
    return float(np.trapezoid(metric_speed(points, velocities), times))


# Shooting


def chord_length(p, q) -> float:
    """Metric length of the straight chart segment from ``p`` to ``q`` (an upper bound on distance)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = q - p
    n = float(np.linalg.norm(d))
    if n == 0:
        return 0.0
    # adaptive quadrature copes with the near-singular integrand close to the rim
    f = lambda s: n / math.sqrt(1.0 - (p[0] + s * d[0]) ** 2 - (p[1] + s * d[1]) ** 2)
    val, _ = integrate.quad(f, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)
    return float(val)


def _unit_substeps(x, y, h, scale: float = _SUBSTEP_SCALE) -> int:
    # unit metric speed: the solution varies on the time scale sqrt(1 - r^2)
    D = 1.0 - x * x - y * y
    if D <= 0:
        return 1
    return min(_MAX_SUBSTEPS, max(1, math.ceil(h / (scale * math.sqrt(D)))))


def _shoot(x, y, vx, vy, length, steps, guard):
    """Scalar RK4 endpoint of the unit-speed geodesic; returns (x, y, ok)."""
    H = length / steps

    def acc(x, y, vx, vy):
        D = 1.0 - x * x - y * y
        return (
            -(x * vx * vx + 2.0 * y * vx * vy - x * vy * vy) / D,
            -(-y * vx * vx + 2.0 * x * vx * vy + y * vy * vy) / D,
        )

    for _ in range(steps):
        m = _unit_substeps(x, y, H)
        h = H / m
        for _ in range(m):
            a1x, a1y = acc(x, y, vx, vy)
            x2, y2 = x + 0.5 * h * vx, y + 0.5 * h * vy
            vx2, vy2 = vx + 0.5 * h * a1x, vy + 0.5 * h * a1y
            a2x, a2y = acc(x2, y2, vx2, vy2)
            x3, y3 = x + 0.5 * h * vx2, y + 0.5 * h * vy2
            vx3, vy3 = vx + 0.5 * h * a2x, vy + 0.5 * h * a2y
            a3x, a3y = acc(x3, y3, vx3, vy3)
            x4, y4 = x + h * vx3, y + h * vy3
            vx4, vy4 = vx + h * a3x, vy + h * a3y
            a4x, a4y = acc(x4, y4, vx4, vy4)
            nx = x + h / 6.0 * (vx + 2 * vx2 + 2 * vx3 + vx4)
            ny = y + h / 6.0 * (vy + 2 * vy2 + 2 * vy3 + vy4)
            vx = vx + h / 6.0 * (a1x + 2 * a2x + 2 * a3x + a4x)
            vy = vy + h / 6.0 * (a1y + 2 * a2y + 2 * a3y + a4y)
            if not (nx * nx + ny * ny < guard):
                return x, y, False
            x, y = nx, ny
    return x, y, True


def _batch_paths(p, angles, length, steps, guard):
    """Vectorised RK4 of unit-speed geodesics from ``p``; positions after exit are NaN."""
    D = 1.0 - p[0] ** 2 - p[1] ** 2
    s = np.empty((len(angles), 4))
    s[:, 0], s[:, 1] = p
    s[:, 2] = np.cos(angles) * math.sqrt(D)
    s[:, 3] = np.sin(angles) * math.sqrt(D)
    H = length / steps
    alive = np.ones(len(angles), dtype=bool)
    out = np.full((steps + 1, len(angles), 2), np.nan)
    out[0] = s[:, :2]
    f = lambda t, y: geodesic_rhs(y)
    for i in range(1, steps + 1):
        if not alive.any():
            break
        r2 = np.max(np.sum(s[alive, :2] ** 2, axis=1))
        m = _unit_substeps(math.sqrt(r2), 0.0, H, _FAN_SUBSTEP_SCALE)
        for _ in range(m):
            new = rk4_step(f, 0.0, s, H / m)
            ok = alive & (new[:, 0] ** 2 + new[:, 1] ** 2 < guard) & np.all(np.isfinite(new), axis=1)
            alive = ok
            s = np.where(ok[:, None], new, s)
        out[i, alive] = s[alive, :2]
    return out


@dataclass
class QuotientDistance:
    """Result of geodesic shooting between two disc points."""

    distance: float
    converged: bool
    angle: float
    residual: float
    chord_bound: float


def quotient_distance(
    p,
    q,
    ds: float = 2e-3,
    tol: float = 1e-10,
    n_angles: int = 64,
    eps_boundary: float = EPS_BOUNDARY,
) -> QuotientDistance:
    """Riemannian distance between disc points by geodesic shooting.

    A coarse fan of ``n_angles`` unit-speed geodesics locates the initial
    direction passing closest to ``q``; the pair (angle, length) is then
    solved so that the endpoint hits ``q`` and polished with a step count
    matched to the final length. A solution longer than the straight chart
    segment is rejected. On failure ``converged`` is False and ``distance``
    falls back to the chord-length bound.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    _one_minus_r2(np.stack([p, q]))
    gap = float(np.linalg.norm(q - p))
    bound = chord_length(p, q)
    if gap < 1e-14:
        return QuotientDistance(0.0, True, 0.0, gap, 0.0)
    guard = 1.0 - eps_boundary
    L_scan = 1.25 * bound + 4 * ds
    steps_scan = max(32, int(math.ceil(L_scan / (_FAN_STEP_FACTOR * ds))))
    angles = math.atan2(q[1] - p[1], q[0] - p[0]) + np.linspace(-math.pi, math.pi, n_angles, endpoint=False)
    # the fan only seeds the solve: rays running much closer to the rim than p and q are dropped
    D_ends = min(1.0 - p @ p, 1.0 - q @ q)
    fan_guard = 1.0 - max(eps_boundary, min(1e-4, 0.25 * D_ends))
    paths = _batch_paths(p, angles, L_scan, steps_scan, fan_guard)
    miss = np.linalg.norm(paths - q[None, None, :], axis=2)
    miss = np.where(np.isnan(miss), np.inf, miss)
    idx = np.argmin(miss, axis=0)
    order = np.argsort(miss[idx, np.arange(n_angles)])

    root_D = math.sqrt(1.0 - p[0] ** 2 - p[1] ** 2)

    def solve(theta0, L0):
        steps = max(64, int(math.ceil(L0 / ds)))

        def residual(u):
            theta, L = u
            x, y, _ = _shoot(p[0], p[1], math.cos(theta) * root_D, math.sin(theta) * root_D, abs(L), steps, guard)
            return [x - q[0], y - q[1]]

        sol = optimize.root(residual, [theta0, L0], method="hybr", options={"xtol": 1e-13})
        return float(sol.x[0]), abs(float(sol.x[1])), float(np.linalg.norm(residual(sol.x)))

    best = None
    for cand in order[:4]:
        L0 = max(float(idx[cand]) * L_scan / steps_scan, gap)
        theta, L, res = solve(float(angles[cand]), L0)
        if L <= 1.25 * bound:
            theta, L, res = solve(theta, L)
        ok = res < tol and L <= bound * (1 + 1e-9) + tol
        if best is None or (ok and not best.converged) or (ok == best.converged and res < best.residual):
            best = QuotientDistance(L, ok, theta, res, bound)
        if best.converged:
            break
    if not best.converged:
        best.distance = bound
    return best
