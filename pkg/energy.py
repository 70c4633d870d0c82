# energy.py
"""Discrete registration energy over rotation paths and its exact gradient.

On the grid s_m = m / N (ds = 1 / N):

    potential = 1/2 sum_m w_m |g_m A1_m - A2_m|_L^2 ds
    kinetic   = 1/2 sum_{m<N} |log(g_m^T g_{m+1})|^2 / ds

with trapezoid weights w_0 = w_N = 1/2 (or all ones for the "uniform"
quadrature).  The "chord" kinetic form replaces the log by g_{m+1} - g_m.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from config import ROTATION_TOL
from errors import ComponentMismatch, DimensionMismatch, InvalidConfig, NotARotation
from jets import JetField, inner_L
from liegroup import (
    component,
    exp_algebra,
    log_rotation,
    norm_algebra,
    orthogonality_error,
    skew,
    transpose,
)
from momentum import diamond

logger = logging.getLogger("curvedist.energy")


# ------- rotation paths -------

@dataclass(frozen=True, eq=False)
class RotationPath:
    rotations: np.ndarray         # (N+1, n, n)

    def __post_init__(self):
        g = np.array(self.rotations, dtype=float)
        if g.ndim != 3 or g.shape[1] != g.shape[2] or g.shape[0] < 2:
            raise DimensionMismatch(f"rotation path must have shape (N+1, n, n) with N >= 1, got {g.shape}")
        err = orthogonality_error(g).max()
        if err > ROTATION_TOL:
            raise NotARotation(f"path node is not orthogonal (|g^T g - I| = {err:.3e})")
        signs = component(g)
        if np.any(signs != signs[0]):
            raise ComponentMismatch("rotation path switches between det = +1 and det = -1")
        g.setflags(write=False)
        object.__setattr__(self, "rotations", g)

    @classmethod
    def constant(cls, R: np.ndarray, N: int) -> "RotationPath":
        return cls(np.repeat(np.asarray(R, dtype=float)[None], N + 1, axis=0))

    @classmethod
    def identity(cls, n: int, N: int) -> "RotationPath":
        return cls.constant(np.eye(n), N)

    @property
    def N(self) -> int:
        return self.rotations.shape[0] - 1

    @property
    def n(self) -> int:
        return self.rotations.shape[1]

    @property
    def ds(self) -> float:
        return 1.0 / self.N

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.N + 1)

    @property
    def component(self) -> int:
        return int(component(self.rotations[0]))

    def inverse(self) -> "RotationPath":
        return RotationPath(transpose(self.rotations))

    def relative(self) -> np.ndarray:
        """g_m^T g_{m+1} for m < N."""
        return transpose(self.rotations[:-1]) @ self.rotations[1:]

    def relative_logs(self) -> np.ndarray:
        return log_rotation(self.relative())

    def transformed(self, left: np.ndarray, right: np.ndarray) -> "RotationPath":
        """m -> left g_m right^{-1}."""
        return RotationPath(np.asarray(left) @ self.rotations @ np.asarray(right).T)

    def retract(self, sigmas: np.ndarray, step: float = 1.0) -> "RotationPath":
        """m -> g_m exp(step sigma_m)."""
        return RotationPath(self.rotations @ exp_algebra(step * np.asarray(sigmas)))

    def sup_distance(self, other: "RotationPath") -> float:
        diff = self.rotations - other.rotations
        return float(np.sqrt(np.einsum("mij,mij->m", diff, diff)).max())

    def max_orthogonality_error(self) -> float:
        return float(orthogonality_error(self.rotations).max())


@dataclass(frozen=True)
class EnergyBreakdown:
    total: float
    potential: float
    kinetic: float
    residuals: tuple[float, ...]      # |Q_m|_L^2 per node

    def as_dict(self) -> dict:
        return {"total": self.total, "potential": self.potential, "kinetic": self.kinetic}


# ------- helpers -------

def quadrature_weights(N: int, quadrature: str = "trapezoid") -> np.ndarray:
    w = np.ones(N + 1)
    if quadrature == "trapezoid":
        w[0] = w[-1] = 0.5
    elif quadrature != "uniform":
        raise InvalidConfig(f"unknown quadrature {quadrature!r}")
    return w


def _check_inputs(path: RotationPath, J1: JetField, J2: JetField) -> None:
    J1.check_compatible(J2)
    if J1.N != path.N:
        raise DimensionMismatch(f"path has N = {path.N} but jets have N = {J1.N}")
    if J1.n != path.n:
        raise DimensionMismatch(f"path acts on R^{path.n} but curves live in R^{J1.n}")


def jet_mismatch(path: RotationPath, J1: JetField, J2: JetField) -> np.ndarray:
    """Q_m = g_m A1_m - A2_m, shape (N+1, n, k)."""
    return path.rotations @ J1.values - J2.values


# ------- main API -------

def discrete_energy(
    path: RotationPath,
    J1: JetField,
    J2: JetField,
    kinetic: str = "log",
    quadrature: str = "trapezoid",
) -> EnergyBreakdown:
    _check_inputs(path, J1, J2)
    ds = path.ds
    Q = jet_mismatch(path, J1, J2)
    residuals = inner_L(Q, Q, J1.weights)
    w = quadrature_weights(path.N, quadrature)
    potential = 0.5 * float(np.sum(w * residuals)) * ds

    if kinetic == "log":
        xi = path.relative_logs()
        kin = 0.5 * float(np.sum(np.einsum("mij,mij->m", xi, xi))) / ds
    elif kinetic == "chord":
        d = path.rotations[1:] - path.rotations[:-1]
        kin = 0.5 * float(np.sum(np.einsum("mij,mij->m", d, d))) / ds
    else:
        raise InvalidConfig(f"unknown kinetic form {kinetic!r}")

    return EnergyBreakdown(
        total=potential + kin,
        potential=potential,
        kinetic=kin,
        residuals=tuple(float(r) for r in residuals),
    )


def potential_force(path: RotationPath, J1: JetField, J2: JetField) -> np.ndarray:
    """diamond(A1_m, g_m^T A2_m) per node; the right-trivialized potential gradient up to w_m ds."""
    return diamond(J1.values, transpose(path.rotations) @ J2.values, J1.weights)


def energy_gradient(
    path: RotationPath,
    J1: JetField,
    J2: JetField,
    kinetic: str = "log",
    quadrature: str = "trapezoid",
) -> np.ndarray:
    """Gradient for right perturbations g_m -> g_m exp(eps sigma_m), shape (N+1, n, n).

    Directional derivatives are <grad_m, sigma_m> with <X, Y> = tr(X^T Y).
    """
    _check_inputs(path, J1, J2)
    ds = path.ds
    w = quadrature_weights(path.N, quadrature)
    grad = (w * ds)[:, None, None] * potential_force(path, J1, J2)

    if kinetic == "log":
        rel = path.relative_logs()
    elif kinetic == "chord":
        rel = skew(path.relative())
    else:
        raise InvalidConfig(f"unknown kinetic form {kinetic!r}")
    grad[1:] += rel / ds
    grad[:-1] -= rel / ds
    return grad


def gradient_sup_norm(grad: np.ndarray) -> float:
    return float(np.max(norm_algebra(grad)))


def negative_log_posterior(
    path: RotationPath,
    J1: JetField,
    J2: JetField,
    noise_var: float = 1.0,
) -> float:
    """Discrete negative log-posterior, up to its normalizing constant.

    (1 / noise_var) sum_m |g_m A1_m - A2_m|_L^2 ds + sum_{m<N} |g_{m+1} - g_m|^2 / ds
    """
    if not noise_var > 0:
        raise InvalidConfig(f"noise variance must be positive, got {noise_var}")
    e = discrete_energy(path, J1, J2, kinetic="chord", quadrature="uniform")
    return 2.0 * e.potential / noise_var + 2.0 * e.kinetic
