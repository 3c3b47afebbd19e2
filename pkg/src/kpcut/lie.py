"""su(n) machinery: inner product, AIII K-P split, conjugation, isotropy.

Algebra elements and group elements are plain ``(n, n)`` complex arrays;
:func:`check_algebra` and :func:`check_group` enforce their invariants at API
boundaries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import DimensionError, make_rng, mat_exp, random_su

__all__ = [
    "InvariantError",
    "KPDecomposition",
    "check_algebra",
    "check_group",
    "killing_inner",
    "aiii_split",
    "make_aiii",
    "conjugate",
    "isotropy_algebra_dim",
    "is_regular",
    "aiii_regular_witness",
    "witness_blocks",
]

ALGEBRA_TOL = 1e-12
GROUP_TOL = 1e-10
NULLSPACE_TOL = 1e-8


class InvariantError(ValueError):
    """An input violates an algebra/group invariant (message names it)."""


def _as_square(X) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {X.shape}")
    return X


def check_algebra(X, tol: float = ALGEBRA_TOL) -> np.ndarray:
    """Validate an element of su(n) and return it as a complex array."""
    X = _as_square(X)
    scale = max(1.0, np.linalg.norm(X))
    if np.linalg.norm(X + X.conj().T) > tol * scale:
        raise InvariantError("matrix is not anti-Hermitian")
    if abs(np.trace(X)) > tol * scale:
        raise InvariantError("matrix is not traceless")
    return X


def check_group(U, tol: float = GROUP_TOL) -> np.ndarray:
    """Validate an element of SU(n) and return it as a complex array."""
    U = _as_square(U)
    n = U.shape[0]
    if np.linalg.norm(U.conj().T @ U - np.eye(n)) > tol:
        raise InvariantError("matrix is not unitary")
    if abs(np.linalg.det(U) - 1.0) > tol:
        raise InvariantError("matrix determinant is not 1 (not special unitary)")
    return U


def killing_inner(P, Q, scale: float = 0.5) -> float:
    """Bi-invariant inner product ``scale * (-Re tr(P Q))``.

    ``scale = 1/2`` on su(2) gives ``<P|P> = 1`` for ``P = [[0, 1], [-1, 0]]``.
    """
    P = np.asarray(P)
    Q = np.asarray(Q)
    if P.shape != Q.shape:
        raise DimensionError(f"shape mismatch {P.shape} vs {Q.shape}")
    if scale <= 0:
        raise ValueError("scale must be positive")
    # tr(PQ) without forming the product
    return float(-scale * np.real(np.sum(P * Q.T)))


def _check_q(n: int, q: int) -> None:
    if not (1 <= q <= n - q):
        raise ValueError(f"invalid AIII block size q={q} for n={n} (need 1 <= q <= n - q)")


def aiii_split(X, q: int):
    """Split ``X`` into its block-diagonal and block-anti-diagonal parts.

    The blocks have sizes ``q`` and ``n - q``. Returns ``(X_K, X_P)`` with
    ``X = X_K + X_P``. Purely structural: no invariant check is made, so
    finite-difference estimates can be projected as well.
    """
    X = _as_square(X)
    _check_q(X.shape[0], q)
    XK = np.zeros_like(X)
    XK[:q, :q] = X[:q, :q]
    XK[q:, q:] = X[q:, q:]
    return XK, X - XK


def _unit(i: int, j: int, n: int) -> np.ndarray:
    E = np.zeros((n, n), dtype=complex)
    E[i, j] = 1.0
    return E


@dataclass(frozen=True)
class KPDecomposition:
    """AIII K-P decomposition of su(n) with orthonormal bases.

    ``basis_K`` and ``basis_P`` are stacked arrays of shape ``(dim, n, n)``,
    orthonormal for ``killing_inner(., ., killing_scale)``.
    """

    n: int
    q: int
    basis_K: np.ndarray = field(repr=False)
    basis_P: np.ndarray = field(repr=False)
    killing_scale: float = 0.5

    @property
    def dim_K(self) -> int:
        return len(self.basis_K)

    @property
    def dim_P(self) -> int:
        return len(self.basis_P)

    def split(self, X):
        return aiii_split(X, self.q)

    def inner(self, P, Q) -> float:
        return killing_inner(P, Q, self.killing_scale)

    def coords_K(self, X) -> np.ndarray:
        """Coordinates of ``X``'s K-part in ``basis_K``."""
        return np.array([self.inner(B, X) for B in self.basis_K])

    def coords_P(self, X) -> np.ndarray:
        """Coordinates of ``X``'s P-part in ``basis_P``."""
        return np.array([self.inner(B, X) for B in self.basis_P])

    def from_K(self, coeffs) -> np.ndarray:
        return np.tensordot(np.asarray(coeffs, dtype=float), self.basis_K, axes=1)

    def from_P(self, coeffs) -> np.ndarray:
        return np.tensordot(np.asarray(coeffs, dtype=float), self.basis_P, axes=1)

    def in_K(self, X, tol: float = ALGEBRA_TOL) -> bool:
        return np.linalg.norm(self.split(X)[1]) <= tol * max(1.0, np.linalg.norm(X))

    def in_P(self, X, tol: float = ALGEBRA_TOL) -> bool:
        return np.linalg.norm(self.split(X)[0]) <= tol * max(1.0, np.linalg.norm(X))

    def random_K(self, rng: np.random.Generator, norm: float | None = None) -> np.ndarray:
        c = rng.standard_normal(self.dim_K)
        if norm is not None:
            c *= norm / np.linalg.norm(c)
        return self.from_K(c)

    def random_P(self, rng: np.random.Generator, norm: float | None = None) -> np.ndarray:
        c = rng.standard_normal(self.dim_P)
        if norm is not None:
            c *= norm / np.linalg.norm(c)
        return self.from_P(c)

    def random_k(self, rng: np.random.Generator) -> np.ndarray:
        """Random element of the group K (exponential of a random K element)."""
        return mat_exp(self.random_K(rng, norm=math.pi * rng.uniform(0.1, 1.0)))


def make_aiii(n: int, q: int, scale: float = 0.5) -> KPDecomposition:
    """Build the AIII(n, q) decomposition with orthonormal bases.

    Basis ordering: off-diagonal generators per entry position ``(i, j)``,
    ``i < j``, row-major, real part (``E_ij - E_ji``) then imaginary part
    (``i(E_ij + E_ji)``); for K these come first (within-block positions),
    followed by the traceless diagonal generators.
    """
    _check_q(n, q)
    if scale <= 0:
        raise ValueError("scale must be positive")
    off_norm = 1.0 / math.sqrt(2.0 * scale)
    K, P = [], []
    for i in range(n):
        for j in range(i + 1, n):
            real = (_unit(i, j, n) - _unit(j, i, n)) * off_norm
            imag = 1j * (_unit(i, j, n) + _unit(j, i, n)) * off_norm
            same_block = (i < q) == (j < q)
            (K if same_block else P).extend([real, imag])
    for m in range(1, n):
        h = np.zeros(n)
        h[:m] = 1.0
        h[m] = -m
        h /= math.sqrt(m * (m + 1))
        K.append(1j * np.diag(h).astype(complex) / math.sqrt(scale))
    return KPDecomposition(n=n, q=q, basis_K=np.array(K), basis_P=np.array(P), killing_scale=scale)


def conjugate(k, X) -> np.ndarray:
    """Return ``k X k^{-1}`` (``k`` unitary, so ``k^{-1} = k^dagger``)."""
    k = np.asarray(k, dtype=complex)
    X = np.asarray(X, dtype=complex)
    if k.shape != X.shape or k.ndim != 2:
        raise DimensionError(f"shape mismatch {k.shape} vs {X.shape}")
    return k @ X @ k.conj().T


def isotropy_algebra_dim(x, dec: KPDecomposition, tol: float = NULLSPACE_TOL) -> int:
    """Dimension of ``{A in K : x A x^{-1} = A}``.

    Computed as the number of singular values below ``tol`` of the real
    linear map ``A -> x A x^{-1} - A`` expressed on ``dec.basis_K``.
    """
    x = np.asarray(x, dtype=complex)
    if x.shape != (dec.n, dec.n):
        raise DimensionError(f"expected ({dec.n}, {dec.n}), got {x.shape}")
    xinv = np.linalg.inv(x)
    cols = []
    for B in dec.basis_K:
        D = x @ B @ xinv - B
        cols.append(np.concatenate([D.real.ravel(), D.imag.ravel()]))
    M = np.array(cols).T
    sv = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(sv < tol))


def is_regular(x, dec: KPDecomposition, tol: float = NULLSPACE_TOL) -> bool:
    """True when ``x`` has discrete isotropy in K (AIII minimal isotropy type)."""
    return isotropy_algebra_dim(x, dec, tol) == 0


def _block_slices(n: int, q: int):
    k, j = divmod(n, q)
    blocks = [slice(l * q, (l + 1) * q) for l in range(k)]
    if j:
        blocks.append(slice(k * q, n))
    return k, j, blocks


def witness_blocks(n: int, q: int, seed: int = 0):
    """Return the factor matrices ``[F_1, ..., F_{k-1}]`` and the pieces of the last one.

    The returned dict holds ``factors`` and the chosen ``P_last`` (diagonal,
    distinct phases), ``T`` (the unitary completion) and ``T12`` (empty when
    ``j == 0``).
    """
    _check_q(n, q)
    k, j, blocks = _block_slices(n, q)
    rng = make_rng(seed)
    eye = np.eye(n, dtype=complex)
    r = 1.0 / math.sqrt(2.0)

    def rotation(l):
        A = eye.copy()
        a, b = blocks[l], blocks[l + 1]
        Iq = np.eye(q)
        A[a, a] = r * Iq
        A[a, b] = r * Iq
        A[b, a] = -r * Iq
        A[b, b] = r * Iq
        return A

    factors = []
    for l in range(k - 2):
        Ph = eye.copy()
        Ph[blocks[l], blocks[l]] = random_su(q, rng) if q > 1 else 1.0
        factors.append(rotation(l) @ Ph)

    # Unitary completion T on the last q + j rows/columns (Gram-Schmidt via QR).
    m = q + j
    Z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    T, R = np.linalg.qr(Z)
    T = T * (np.diag(R) / np.abs(np.diag(R)))
    # Distinct phases on P_{k-1}; the total phase cancels det(T).
    phases = 2.0 * math.pi * (np.arange(q) + rng.uniform(0.1, 0.9)) / (q + 1)
    phases += (-np.angle(np.linalg.det(T)) - phases.sum()) / q
    P_last = np.diag(np.exp(1j * phases))

    Ph = eye.copy()
    last = slice(blocks[k - 2].start, n)
    block = np.zeros((q + m, q + m), dtype=complex)
    block[:q, :q] = P_last
    block[q:, q:] = T
    Ph[last, last] = block
    factors.append(rotation(k - 2) @ Ph)
    return {"factors": factors, "P_last": P_last, "T": T, "T12": T[:q, q:], "k": k, "j": j}


def _requirements_hold(parts, q: int, tol: float = 1e-6) -> bool:
    phases = np.angle(np.diag(parts["P_last"]))
    diffs = np.abs(np.exp(1j * phases)[:, None] - np.exp(1j * phases)[None, :])
    if q > 1 and np.min(diffs[~np.eye(q, dtype=bool)]) < tol:  # R1
        return False
    T11 = parts["T"][:q, :q]
    if q > 1 and np.min(np.abs(T11[0, 1:])) < tol:  # R2
        return False
    T12 = parts["T12"]
    if T12.size:  # R3: pseudo-inverse is a left inverse with lambda = 1
        L = np.linalg.pinv(T12)
        if np.linalg.norm(L @ T12 - np.eye(T12.shape[1])) > tol:
            return False
    return True


def aiii_regular_witness(n: int, q: int, seed: int = 0, max_tries: int = 32) -> np.ndarray:
    """Special unitary element of SU(n) whose isotropy in K is discrete.

    Built as the product ``F_1 F_2 ... F_{k-1}`` where ``n = k q + j``; each
    ``F_l`` is a block rotation times a block phase matrix, and the last one
    carries a diagonal block with distinct phases and a unitary completion
    satisfying the nonvanishing/full-rank requirements. The seed is
    incremented until every requirement and the isotropy solve pass.
    """
    _check_q(n, q)
    dec = make_aiii(n, q)
    for attempt in range(max_tries):
        parts = witness_blocks(n, q, seed + attempt)
        if not _requirements_hold(parts, q):
            continue
        W = np.eye(n, dtype=complex)
        for F in parts["factors"]:
            W = W @ F
        if isotropy_algebra_dim(W, dec) == 0:
            return W
    raise RuntimeError(f"no regular witness found for n={n}, q={q} in {max_tries} seeds")
