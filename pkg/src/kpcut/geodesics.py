"""Closed-form K-P geodesics ``X(t) = exp(At) exp((P - A)t)`` and their sampling.

Velocities are handled in right-invariant form ``dX/dt X^{-1}``; a curve is
horizontal when that velocity lies in P.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np

from .lie import KPDecomposition, check_algebra, killing_inner
from .numerics import expm_normal_path, fd_derivative, mat_exp, time_grid

__all__ = [
    "GeodesicSpec",
    "CurveSamples",
    "CurveLength",
    "geodesic_point",
    "geodesic_points",
    "geodesic_control",
    "sample_geodesic",
    "horizontality_residual",
    "curve_length",
    "right_velocities",
]


@dataclass(frozen=True)
class GeodesicSpec:
    """A K-P geodesic from the identity.

    Parameters
    ----------
    dec : KPDecomposition
    A : (n, n) array, element of K
    P : (n, n) array, element of P
    t_max : float
        Duration, ``>= 0``.
    dt : float
        Sampling step.
    normalize : bool
        Rescale ``P`` so that ``<P|P> = 1`` (unit speed).
    """

    dec: KPDecomposition
    A: np.ndarray = field(repr=False)
    P: np.ndarray = field(repr=False)
    t_max: float = 1.0
    dt: float = 1e-3
    normalize: bool = False

    def __post_init__(self):
        A = check_algebra(self.A)
        P = check_algebra(self.P)
        n = self.dec.n
        if A.shape != (n, n) or P.shape != (n, n):
            raise ValueError(f"A and P must be {n}x{n}")
        if not self.dec.in_K(A):
            raise ValueError("A is not in K (block-diagonal part required)")
        if not self.dec.in_P(P):
            raise ValueError("P is not in P (block-anti-diagonal part required)")
        if self.t_max < 0 or self.dt <= 0:
            raise ValueError("need t_max >= 0 and dt > 0")
        if self.normalize:
            norm = np.sqrt(self.dec.inner(P, P))
            if norm == 0:
                raise ValueError("cannot normalize P = 0")
            P = P / norm
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "P", P)

    @property
    def n(self) -> int:
        return self.dec.n

    @cached_property
    def drift(self) -> np.ndarray:
        """``P - A``, the generator of the second factor."""
        return self.P - self.A

    def times(self) -> np.ndarray:
        if self.t_max == 0:
            return np.zeros(1)
        return time_grid(0.0, self.t_max, min(self.dt, self.t_max))

    def conjugated(self, k) -> "GeodesicSpec":
        """Spec with ``(k A k^-1, k P k^-1)``."""
        kinv = k.conj().T
        return GeodesicSpec(self.dec, k @ self.A @ kinv, k @ self.P @ kinv, self.t_max, self.dt)


def _check_t(spec: GeodesicSpec, t: float) -> None:
    if not (0.0 <= t <= spec.t_max * (1 + 1e-12) + 1e-15):
        raise ValueError(f"t = {t} outside [0, {spec.t_max}]")


def geodesic_point(spec: GeodesicSpec, t: float) -> np.ndarray:
    """``exp(At) exp((P - A)t)`` via :func:`mat_exp`."""
    _check_t(spec, t)
    return mat_exp(spec.A, t) @ mat_exp(spec.drift, t)


def geodesic_points(spec: GeodesicSpec, times) -> np.ndarray:
    """Vectorised :func:`geodesic_point` using spectral exponentials (no range check)."""
    return expm_normal_path(spec.A, times) @ expm_normal_path(spec.drift, times)


def geodesic_control(spec: GeodesicSpec, t: float) -> np.ndarray:
    """Optimal control ``exp(At) P exp(-At)``; stays in P with constant norm."""
    _check_t(spec, t)
    E = mat_exp(spec.A, t)
    return E @ spec.P @ E.conj().T


def controls(spec: GeodesicSpec, times) -> np.ndarray:
    """Vectorised :func:`geodesic_control`."""
    E = expm_normal_path(spec.A, times)
    return E @ spec.P @ np.swapaxes(E.conj(), -1, -2)


@dataclass
class CurveSamples:
    """Sampled group curve; ``disc`` holds chart coordinates when ``n = 2``."""

    times: np.ndarray
    points: np.ndarray
    disc: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.times)

    @property
    def n(self) -> int:
        return self.points.shape[-1]


def sample_geodesic(spec: GeodesicSpec) -> CurveSamples:
    """Sample the geodesic on ``0, dt, 2dt, ...`` plus the endpoint ``t_max``."""
    times = spec.times()
    points = geodesic_points(spec, times)
    disc = None
    if spec.n == 2:
        disc = np.stack([points[:, 0, 0].real, points[:, 0, 0].imag], axis=1)
    return CurveSamples(times, points, disc)


def right_velocities(samples: CurveSamples) -> np.ndarray:
    """Finite-difference ``dX/dt X^{-1}`` at every sample (fourth-order, 5-point stencils)."""
    if len(samples) < 3:
        raise ValueError("need at least 3 samples")
    dX = fd_derivative(samples.times, samples.points)
    return dX @ np.swapaxes(samples.points.conj(), -1, -2)


def horizontality_residual(samples: CurveSamples, dec: KPDecomposition) -> float:
    """Max over interior samples of ``||(dX/dt X^{-1})_K||_F``."""
    V = right_velocities(samples)[1:-1]
    q = dec.q
    VK = V.copy()
    VK[:, :q, q:] = 0.0
    VK[:, q:, :q] = 0.0
    return float(np.max(np.linalg.norm(VK, axis=(1, 2))))


class CurveLength(NamedTuple):
    length: float
    residual: float
    horizontal: bool


def curve_length(samples: CurveSamples, dec: KPDecomposition, horizontal_tol: float = 1e-3) -> CurveLength:
    """Trapezoidal sub-Riemannian length of a sampled curve.

    ``horizontal`` is False when the horizontality residual exceeds
    ``horizontal_tol``; the length is still reported.
    """
    if len(samples) < 2 or samples.times[-1] == samples.times[0]:
        return CurveLength(0.0, 0.0, True)
    if len(samples) == 2:
        # too short for central differences; chord estimate in the algebra
        h = samples.times[1] - samples.times[0]
        V = (samples.points[1] - samples.points[0]) @ samples.points[0].conj().T / h
        speed = np.sqrt(max(killing_inner(V, V, dec.killing_scale), 0.0))
        return CurveLength(float(speed * h), float("nan"), True)
    V = right_velocities(samples)
    speed = np.sqrt(np.maximum(-dec.killing_scale * np.real(np.einsum("tij,tji->t", V, V)), 0.0))
    length = float(np.trapezoid(speed, samples.times))
    residual = horizontality_residual(samples, dec)
    return CurveLength(length, residual, residual <= horizontal_tol)
