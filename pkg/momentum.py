# momentum.py
"""The diamond operator: momentum map of the O(n) action on jet space."""

from __future__ import annotations

import numpy as np

from errors import DimensionMismatch
from jets import flat, inner_L
from liegroup import dual_pairing


def _check(A: np.ndarray, B: np.ndarray, weights: np.ndarray) -> None:
    if A.shape != B.shape:
        raise DimensionMismatch(f"diamond needs equal jet shapes, got {A.shape} and {B.shape}")
    if A.shape[-1] != weights.shape[-1]:
        raise DimensionMismatch(f"jets have {A.shape[-1]} columns but {weights.shape[-1]} weights")


def diamond(A, B, weights) -> np.ndarray:
    """A <> B^flat = (A L B^T - B L A^T) / 2, batched over leading axes.

    B is passed raw; the flat (multiplication by L) happens here.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    weights = np.asarray(weights, dtype=float)
    _check(A, B, weights)
    ALBt = np.einsum("...ik,k,...jk->...ij", A, weights, B)
    return 0.5 * (ALBt - np.swapaxes(ALBt, -1, -2))


def diamond_pairing_check(A, B, weights, omega) -> tuple[float, float]:
    """Both sides of the defining identity <A <> B^flat, omega> = <B^flat, omega A>.

    The left side pairs o(n)* with o(n) via tr(mu omega).
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (A.shape[0], A.shape[0]):
        raise DimensionMismatch(f"omega must be {A.shape[0]}x{A.shape[0]}, got {omega.shape}")
    lhs = dual_pairing(diamond(A, B, weights), omega)
    rhs = inner_L(B, omega @ A, weights)
    return lhs, rhs


def momentum_2d(A, B, lam1: float):
    """Scalar form in o(2): -(lambda_1 / 2) det[a b] for first-order jets a, b."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    a, b = A[..., 0], B[..., 0]
    return -0.5 * lam1 * (a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0])


def momentum_3d(A, B, weights) -> np.ndarray:
    """Vector form in R^3: (1/2) sum_i lambda_i a_i x b_i."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    weights = np.asarray(weights, dtype=float)
    _check(A, B, weights)
    return 0.5 * np.cross(A, flat(B, weights), axis=-2).sum(axis=-1)
