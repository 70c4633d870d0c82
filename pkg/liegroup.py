# liegroup.py
"""Dense numerics for O(n) and its Lie algebra o(n).

Every function takes either a single matrix ``(n, n)`` or a stack
``(..., n, n)``; n = 2 and n = 3 use closed forms, larger n goes through
scipy.  Algebra elements are stored as full skew-symmetric matrices.

Conventions:

* inner product on o(n): ``<X, Y> = tr(X^T Y)``, so ``<hat2(1), hat2(1)> = 2``;
* ``hat2(w) = [[0, -w], [w, 0]]``;
* ``hat3`` follows ``X_ij = eps_ijk w_k``, so ``hat3(e3)`` has ``+1`` in
  position (0, 1) and ``[hat3(u), hat3(v)] = hat3(v x u)``.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
from scipy.spatial.transform import Rotation as _ScipyRotation
from scipy.stats import special_ortho_group

from config import ANGLE_CUT_MARGIN
from errors import AngleAtCut, ComponentMismatch, DimensionMismatch, SingularMatrix

_SMALL_ANGLE = 1e-4       # switch to Taylor series below this angle


# ------- shape helpers -------

def _square(M: np.ndarray, name: str = "matrix") -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise DimensionMismatch(f"{name} must be square, got shape {M.shape}")
    return M


def _same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[-2:] != b.shape[-2:]:
        raise DimensionMismatch(f"dimension mismatch: {a.shape} vs {b.shape}")


def skew(M: np.ndarray) -> np.ndarray:
    """Skew-symmetric part (M - M^T) / 2."""
    M = _square(M)
    return 0.5 * (M - np.swapaxes(M, -1, -2))


def transpose(M: np.ndarray) -> np.ndarray:
    return np.swapaxes(M, -1, -2)


# ------- coordinate isomorphisms -------

def hat2(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    out = np.zeros(w.shape + (2, 2))
    out[..., 0, 1] = -w
    out[..., 1, 0] = w
    return out


def vee2(W: np.ndarray):
    W = _square(W)
    if W.shape[-1] != 2:
        raise DimensionMismatch(f"vee2 needs 2x2 input, got {W.shape}")
    w = 0.5 * (W[..., 1, 0] - W[..., 0, 1])
    return float(w) if np.ndim(w) == 0 else w


def hat3(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape[-1:] != (3,):
        raise DimensionMismatch(f"hat3 needs 3-vectors, got shape {w.shape}")
    out = np.zeros(w.shape[:-1] + (3, 3))
    out[..., 0, 1] = w[..., 2]
    out[..., 1, 0] = -w[..., 2]
    out[..., 0, 2] = -w[..., 1]
    out[..., 2, 0] = w[..., 1]
    out[..., 1, 2] = w[..., 0]
    out[..., 2, 1] = -w[..., 0]
    return out


def vee3(W: np.ndarray) -> np.ndarray:
    W = _square(W)
    if W.shape[-1] != 3:
        raise DimensionMismatch(f"vee3 needs 3x3 input, got {W.shape}")
    W = skew(W)
    return np.stack([W[..., 1, 2], W[..., 2, 0], W[..., 0, 1]], axis=-1)


def algebra_dim(n: int) -> int:
    return n * (n - 1) // 2


def algebra_basis(n: int) -> np.ndarray:
    """Basis E_ij - E_ji (i < j) of o(n), shape (dim, n, n)."""
    basis = np.zeros((algebra_dim(n), n, n))
    for idx, (i, j) in enumerate(zip(*np.triu_indices(n, k=1))):
        basis[idx, i, j] = 1.0
        basis[idx, j, i] = -1.0
    return basis


def algebra_coords(W: np.ndarray) -> np.ndarray:
    """Strict upper triangle of W; inverse of ``from_algebra_coords``."""
    W = _square(W)
    i, j = np.triu_indices(W.shape[-1], k=1)
    return W[..., i, j]


def from_algebra_coords(z, n: int) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != algebra_dim(n):
        raise DimensionMismatch(f"expected {algebra_dim(n)} coordinates for o({n}), got {z.shape[-1]}")
    out = np.zeros(z.shape[:-1] + (n, n))
    i, j = np.triu_indices(n, k=1)
    out[..., i, j] = z
    out[..., j, i] = -z
    return out


# ------- algebra operations -------

def inner_algebra(a: np.ndarray, b: np.ndarray):
    """tr(a^T b), batched over leading axes."""
    a, b = _square(a), _square(b)
    _same_shape(a, b)
    val = np.einsum("...ij,...ij->...", a, b)
    return float(val) if np.ndim(val) == 0 else val


def norm_algebra(a: np.ndarray):
    return np.sqrt(inner_algebra(a, a))


def dual_pairing(mu: np.ndarray, omega: np.ndarray):
    """Pairing tr(mu omega) of o(n)* (identified with skew matrices) with o(n)."""
    mu, omega = _square(mu), _square(omega)
    _same_shape(mu, omega)
    val = np.einsum("...ij,...ji->...", mu, omega)
    return float(val) if np.ndim(val) == 0 else val


def bracket(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = _square(a), _square(b)
    _same_shape(a, b)
    return a @ b - b @ a


def dexpinv(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Inverse derivative of exp at u applied to v, truncated after the [u,[u,v]] term."""
    uv = bracket(u, v)
    return v - 0.5 * uv + bracket(u, uv) / 12.0


# ------- exponential / logarithm -------

def exp_algebra(W: np.ndarray) -> np.ndarray:
    """Matrix exponential of a (stack of) skew-symmetric matrices."""
    W = skew(W)
    n = W.shape[-1]
    if n == 1:
        return np.ones_like(W)
    if n == 2:
        t = W[..., 1, 0]
        c, s = np.cos(t), np.sin(t)
        return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
    if n == 3:
        theta = np.sqrt(0.5 * np.einsum("...ij,...ij->...", W, W))
        small = theta < _SMALL_ANGLE
        t = np.where(small, 1.0, theta)
        t2 = theta * theta
        a = np.where(small, 1.0 - t2 / 6.0 + t2 * t2 / 120.0, np.sin(t) / t)
        b = np.where(small, 0.5 - t2 / 24.0 + t2 * t2 / 720.0, (1.0 - np.cos(t)) / (t * t))
        W2 = W @ W
        return np.eye(3) + a[..., None, None] * W + b[..., None, None] * W2
    return scipy.linalg.expm(W)


def log_rotation(R: np.ndarray) -> np.ndarray:
    """Principal logarithm of a rotation in the identity component.

    Raises AngleAtCut when any rotation angle is within 1e-8 of pi.
    """
    R = _square(R, "rotation")
    n = R.shape[-1]
    if np.any(np.linalg.det(R) < 0):
        raise ComponentMismatch("log_rotation needs det = +1")
    limit = np.pi - ANGLE_CUT_MARGIN
    if n == 2:
        theta = np.arctan2(R[..., 1, 0] - R[..., 0, 1], R[..., 0, 0] + R[..., 1, 1])
        if np.any(np.abs(theta) >= limit):
            raise AngleAtCut(np.max(np.abs(theta)))
        return hat2(theta)
    if n == 3:
        A = 0.5 * (R - transpose(R))
        sin_t = np.sqrt(0.5 * np.einsum("...ij,...ij->...", A, A))
        cos_t = 0.5 * (np.trace(R, axis1=-2, axis2=-1) - 1.0)
        theta = np.arctan2(sin_t, cos_t)
        if np.any(theta >= limit):
            raise AngleAtCut(np.max(theta))
        small = theta < _SMALL_ANGLE
        s = np.where(small, 1.0, sin_t)
        t2 = theta * theta
        factor = np.where(small, 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0, theta / s)
        return factor[..., None, None] * A
    if R.ndim > 2:
        return np.stack([log_rotation(r) for r in R.reshape(-1, n, n)]).reshape(R.shape)
    angles = np.abs(np.angle(np.linalg.eigvals(R)))
    if angles.max() >= limit:
        raise AngleAtCut(angles.max())
    return skew(np.real(scipy.linalg.logm(R)))


# ------- group helpers -------

def rotation_2d(theta) -> np.ndarray:
    return exp_algebra(hat2(theta))


def component(R: np.ndarray):
    """+1 or -1, the sign of det R."""
    d = np.sign(np.linalg.det(_square(R)))
    return int(d) if np.ndim(d) == 0 else d.astype(int)


def reflection(n: int) -> np.ndarray:
    """diag(-1, 1, ..., 1), a fixed representative of the det = -1 component."""
    F = np.eye(n)
    F[0, 0] = -1.0
    return F


def orthogonality_error(R: np.ndarray):
    R = _square(R)
    E = transpose(R) @ R - np.eye(R.shape[-1])
    return np.sqrt(np.einsum("...ij,...ij->...", E, E))


def is_rotation(R: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.all(orthogonality_error(R) <= tol))


def project_rotation(M: np.ndarray) -> np.ndarray:
    """Nearest orthogonal matrix (polar factor); keeps the sign of det M."""
    M = _square(M)
    if M.ndim > 2:
        n = M.shape[-1]
        return np.stack([project_rotation(m) for m in M.reshape(-1, n, n)]).reshape(M.shape)
    svals = np.linalg.svd(M, compute_uv=False)
    if svals[-1] <= 1e-12 * max(svals[0], 1.0):
        raise SingularMatrix(f"cannot project a singular matrix onto O(n) (sigma_min = {svals[-1]:.3e})")
    U, _ = scipy.linalg.polar(M)
    return U


def random_rotation(n: int, rng: np.random.Generator, det: int = 1) -> np.ndarray:
    if n == 1:
        return np.array([[float(det)]])
    R = special_ortho_group.rvs(n, random_state=rng)
    return R if det > 0 else reflection(n) @ R


def random_algebra(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    return from_algebra_coords(scale * rng.standard_normal(algebra_dim(n)), n)


def spread_rotations(n: int, count: int, seed: int = 0) -> list[np.ndarray]:
    """Deterministic rotations spread over SO(n); the first one is always I.

    n = 2 uses the angles 2*pi*j/count, n = 3 the octahedral group, larger n
    draws Haar samples from a fixed seed.
    """
    if n == 2:
        return [rotation_2d(2.0 * np.pi * j / count) for j in range(count)]
    if n == 3:
        group = _ScipyRotation.create_group("O").as_matrix()
        order = np.argsort([np.linalg.norm(g - np.eye(3)) for g in group], kind="stable")
        mats = [group[i] for i in order]
        if count > len(mats):
            rng = np.random.default_rng(seed)
            mats += [random_rotation(3, rng) for _ in range(count - len(mats))]
        return mats[:count]
    rng = np.random.default_rng(seed)
    return [np.eye(n)] + [random_rotation(n, rng) for _ in range(count - 1)]
