"""Dense complex matrix utilities, matrix exponentials, fixed-step RK4 and seeded RNG."""
from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

__all__ = [
    "DimensionError",
    "DomainExit",
    "mat_exp",
    "expm_normal_path",
    "rk4_step",
    "integrate_ode",
    "make_rng",
    "random_su",
    "random_anti_hermitian",
    "fro",
    "fd_derivative",
]

# Taylor degree used after scaling ||tX||_1 below 1/2; remainder < 0.5**19/19! ~ 1e-23.
_TAYLOR_DEGREE = 18
_SCALE_TARGET = 0.5


class DimensionError(ValueError):
    """Raised when matrix shapes are incompatible with an operation."""


class DomainExit(Exception):
    """Raised by :func:`integrate_ode` when the state leaves the validity region.

    Attributes
    ----------
    time, state
        Last valid sample before the exit.
    times, states
        All valid samples produced so far (inclusive of the last one).
    """

    def __init__(self, times, states):
        self.times = np.asarray(times)
        self.states = np.asarray(states)
        self.time = float(self.times[-1])
        self.state = self.states[-1]
        super().__init__(f"state left the validity region after t = {self.time:.12g}")


def fro(X) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(X))


def _square(X) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {X.shape}")
    return X


def mat_exp(X, t: float = 1.0) -> np.ndarray:
    """Return ``exp(t X)`` by scaling and squaring with a truncated Taylor series.

    Parameters
    ----------
    X : (n, n) array_like
        Square complex matrix.
    t : float
        Scalar multiplier.
    """
    M = _square(X) * t
    n = M.shape[0]
    norm = np.linalg.norm(M, 1)
    squarings = 0
    if norm > _SCALE_TARGET:
        squarings = int(math.ceil(math.log2(norm / _SCALE_TARGET)))
    M = M / (2.0**squarings)

    # Horner evaluation of sum_k M^k / k!
    E = np.eye(n, dtype=complex)
    for k in range(_TAYLOR_DEGREE, 0, -1):
        E = np.eye(n, dtype=complex) + (M @ E) / k
    for _ in range(squarings):
        E = E @ E
    return E


def expm_normal_path(X, times) -> np.ndarray:
    """Return ``exp(t X)`` for every ``t`` in ``times`` for anti-Hermitian ``X``.

    Uses one Hermitian eigendecomposition of ``iX``, so each exponential is
    exact up to rounding regardless of ``t``. Output shape is ``(len(times), n, n)``.
    """
    X = _square(X)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    H = 0.5 * (1j * X + (1j * X).conj().T)
    w, V = np.linalg.eigh(H)
    phases = np.exp(-1j * np.outer(times, w))
    return np.einsum("ij,tj,kj->tik", V, phases, V.conj())


def rk4_step(f: Callable, t: float, y, h: float):
    """One classical Runge-Kutta step of size ``h`` for ``y' = f(t, y)``."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def time_grid(t0: float, t1: float, dt: float) -> np.ndarray:
    """Uniform grid ``t0 + k dt`` up to ``t1`` plus the exact endpoint when off-grid."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t1 < t0:
        raise ValueError("t1 must not precede t0")
    n = int(math.floor((t1 - t0) / dt + 1e-9))
    times = t0 + dt * np.arange(n + 1)
    if t1 - times[-1] > 1e-9 * max(1.0, abs(t1)):
        times = np.append(times, t1)
    else:
        times[-1] = t1 if n > 0 else t0
    return times


def integrate_ode(
    f: Callable,
    y0,
    t0: float,
    t1: float,
    dt: float,
    valid: Optional[Callable] = None,
    substeps: Optional[Callable] = None,
):
    """Integrate ``y' = f(t, y)`` with fixed-step RK4.

    Samples are returned at ``t0 + k dt`` plus the exact endpoint ``t1``.
    The state may be any numpy array (real or complex).

    Parameters
    ----------
    f : callable
        ``f(t, y)`` returning an array shaped like ``y``.
    y0 : array_like
        Initial state.
    t0, t1 : float
        Integration interval, ``t1 >= t0``.
    dt : float
        Step size, positive.
    valid : callable, optional
        Predicate on the state. When a step produces a state for which it
        returns False (or any non-finite entry), :class:`DomainExit` is raised
        carrying the samples up to the last valid one.
    substeps : callable, optional
        ``substeps(y) -> int``; the step from a state ``y`` is split into that
        many equal RK4 sub-steps. Output times are unchanged, so the result is
        still deterministic on the fixed grid.

    Returns
    -------
    times : ndarray, shape (m,)
    states : ndarray, shape (m,) + y0.shape
    """
    times = time_grid(t0, t1, dt)
    y = np.array(y0, dtype=np.result_type(np.asarray(y0).dtype, float))
    states = np.empty((len(times),) + y.shape, dtype=y.dtype)
    states[0] = y
    for i in range(1, len(times)):
        h = times[i] - times[i - 1]
        m = 1 if substeps is None else max(1, int(substeps(y)))
        y_new, t = y, times[i - 1]
        for _ in range(m):
            y_new = rk4_step(f, t, y_new, h / m)
            t += h / m
            if not np.all(np.isfinite(y_new)) or (valid is not None and not valid(y_new)):
                raise DomainExit(times[:i], states[:i])
        y = y_new
        states[i] = y
    return times, states


def fd_derivative(times, values, points: int = 5) -> np.ndarray:
    """First derivative of sampled ``values`` along axis 0 by local polynomial fits.

    Each sample uses the ``points`` nearest grid nodes (shifted inward at the
    ends), so the result is of order ``points - 1`` on any grid, including the
    uniform-plus-endpoint grids produced by :func:`time_grid`.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values)
    m = len(t)
    if m < 2:
        raise ValueError("need at least 2 samples")
    p = min(points, m)
    start = np.clip(np.arange(m) - p // 2, 0, m - p)
    idx = start[:, None] + np.arange(p)[None, :]
    h = np.diff(t).mean()
    nodes = (t[idx] - t[:, None]) / h
    # weights w solve sum_j w_j nodes_j^k = [k == 1] for k < p
    V = nodes[:, None, :] ** np.arange(p)[None, :, None]
    rhs = np.zeros((m, p))
    rhs[:, 1] = 1.0
    w = np.linalg.solve(V, rhs[..., None])[..., 0] / h
    # differences from the centre value make constants differentiate to exactly 0
    return np.einsum("tj,tj...->t...", w, v[idx] - v[:, None])


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator; the seed is the only source of randomness."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def random_su(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of SU(n) via QR of a complex Gaussian matrix."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    Q = Q * (d / np.abs(d))
    det = np.linalg.det(Q)
    return Q / det ** (1.0 / n)


def random_anti_hermitian(n: int, rng: np.random.Generator, norm: Optional[float] = None) -> np.ndarray:
    """Random traceless anti-Hermitian matrix, optionally rescaled to Frobenius ``norm``."""
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    X = 0.5 * (Z - Z.conj().T)
    X -= np.trace(X) / n * np.eye(n)
    if norm is not None:
        X *= norm / np.linalg.norm(X)
    return X
