# checks.py
"""Invariant suite behind ``cli check``.

Each check draws seeded random instances, measures the worst deviation from
an identity and compares it to a fixed bound.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from bvp import integrate_ivp
from config import RunConfig
from curves import make_circle, make_helix, make_line
from energy import RotationPath, discrete_energy, energy_gradient
from jets import JetField, inner_L, jet_field
from liegroup import (
    algebra_basis,
    bracket,
    exp_algebra,
    hat3,
    inner_algebra,
    log_rotation,
    orthogonality_error,
    random_algebra,
    random_rotation,
    vee2,
    vee3,
)
from momentum import diamond, diamond_pairing_check, momentum_2d, momentum_3d

logger = logging.getLogger("curvedist.checks")

TRIALS = 100
IDENTITY_BOUND = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    bound: float

    @property
    def passed(self) -> bool:
        return bool(self.measured <= self.bound)

    def as_dict(self) -> dict:
        return {"name": self.name, "measured": self.measured, "bound": self.bound, "passed": self.passed}


# ------- helpers -------

def _random_jets(rng: np.random.Generator, n: int, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    A = rng.standard_normal((n, k))
    B = rng.standard_normal((n, k))
    lam = np.concatenate([[rng.uniform(0.1, 2.0)], rng.uniform(0.0, 2.0, k - 1)])
    return A, B, lam


def random_smooth_path(rng: np.random.Generator, n: int, N: int, scale: float = 2.0) -> RotationPath:
    """exp-integrated random velocities; consecutive steps stay far from the cut."""
    g = [random_rotation(n, rng)]
    for _ in range(N):
        g.append(g[-1] @ exp_algebra(random_algebra(n, rng, scale / N)))
    return RotationPath(np.stack(g))


def line_circle_jets(lam: float, N: int, radius: float = 1.0):
    J1 = jet_field(make_line([1.0, 0.0], [0.0, 0.0]), 1, N, [lam])
    J2 = jet_field(make_circle(radius), 1, N, [lam])
    return J1, J2


def gradient_fd_error(path: RotationPath, J1, J2, step: float = 1e-6) -> float:
    """Worst |central difference - <grad, E>| over nodes and basis directions, relative to |grad|."""
    grad = energy_gradient(path, J1, J2)
    basis = algebra_basis(path.n)
    worst, scale = 0.0, 0.0
    for m in range(path.N + 1):
        for E in basis:
            sig = np.zeros((path.N + 1, path.n, path.n))
            sig[m] = E
            e_plus = discrete_energy(path.retract(sig, step), J1, J2).total
            e_minus = discrete_energy(path.retract(sig, -step), J1, J2).total
            fd = (e_plus - e_minus) / (2.0 * step)
            exact = inner_algebra(grad[m], E)
            worst = max(worst, abs(fd - exact))
            scale = max(scale, abs(exact))
    return worst / max(scale, 1e-12)


# ------- checks -------

def check_diamond_antisymmetry(rng: np.random.Generator) -> CheckResult:
    err = 0.0
    for _ in range(TRIALS):
        n, k = rng.integers(2, 5), rng.integers(1, 4)
        A, B, lam = _random_jets(rng, n, k)
        err = max(err, np.abs(diamond(A, B, lam) + diamond(B, A, lam)).max())
    return CheckResult("diamond antisymmetry", float(err), IDENTITY_BOUND)


def check_diamond_pairing(rng: np.random.Generator) -> CheckResult:
    err = 0.0
    for _ in range(TRIALS):
        n, k = rng.integers(2, 5), rng.integers(1, 4)
        A, B, lam = _random_jets(rng, n, k)
        lhs, rhs = diamond_pairing_check(A, B, lam, random_algebra(n, rng))
        err = max(err, abs(lhs - rhs))
    return CheckResult("diamond defining pairing", float(err), IDENTITY_BOUND)


def check_bracket_orthogonality(rng: np.random.Generator) -> CheckResult:
    err = 0.0
    for _ in range(TRIALS):
        n = rng.integers(2, 6)
        omega, sigma = random_algebra(n, rng), random_algebra(n, rng)
        err = max(err, abs(inner_algebra(omega, bracket(sigma, omega))))
    return CheckResult("<Omega, [sigma, Omega]> = 0", float(err), IDENTITY_BOUND)


def check_jet_norm_invariance(rng: np.random.Generator) -> CheckResult:
    err = 0.0
    for _ in range(TRIALS):
        n, k = rng.integers(2, 5), rng.integers(1, 4)
        A, B, lam = _random_jets(rng, n, k)
        g = random_rotation(n, rng, det=int(rng.choice([-1, 1])))
        err = max(err, abs(inner_L(g @ A, g @ B, lam) - inner_L(A, B, lam)))
    return CheckResult("O(n)-invariance of <,>_L", float(err), IDENTITY_BOUND)


def check_ad_invariance(rng: np.random.Generator) -> CheckResult:
    err = 0.0
    for _ in range(TRIALS):
        n = rng.integers(2, 6)
        g = random_rotation(n, rng)
        a, b = random_algebra(n, rng), random_algebra(n, rng)
        err = max(err, abs(inner_algebra(g @ a @ g.T, g @ b @ g.T) - inner_algebra(a, b)))
    return CheckResult("Ad-invariance of <,>_o(n)", float(err), IDENTITY_BOUND)


def check_momentum_2d(rng: np.random.Generator) -> CheckResult:
    err = 0.0
    for _ in range(TRIALS):
        A, B, lam = _random_jets(rng, 2, 1)
        err = max(err, abs(vee2(diamond(A, B, lam)) - momentum_2d(A, B, lam[0])))
    return CheckResult("planar determinant formula", float(err), IDENTITY_BOUND)


def check_momentum_3d(rng: np.random.Generator) -> CheckResult:
    err = 0.0
    for _ in range(TRIALS):
        A, B, lam = _random_jets(rng, 3, int(rng.integers(1, 4)))
        err = max(err, np.abs(vee3(diamond(A, B, lam)) - momentum_3d(A, B, lam)).max())
    return CheckResult("spatial cross-product formula", float(err), IDENTITY_BOUND)


def check_hat3_bracket(rng: np.random.Generator) -> CheckResult:
    err = 0.0
    for _ in range(TRIALS):
        u, v = rng.standard_normal(3), rng.standard_normal(3)
        err = max(err, np.abs(bracket(hat3(u), hat3(v)) - hat3(np.cross(v, u))).max())
    return CheckResult("[hat3(u), hat3(v)] = hat3(v x u)", float(err), 1e-13)


def check_exp_log(rng: np.random.Generator) -> CheckResult:
    err = 0.0
    for _ in range(TRIALS):
        n = rng.integers(2, 5)
        omega = random_algebra(n, rng)
        omega *= rng.uniform(0.0, 3.0) / np.sqrt(inner_algebra(omega, omega))
        err = max(err, np.abs(log_rotation(exp_algebra(omega)) - omega).max())
    return CheckResult("exp/log roundtrip", float(err), 1e-9)


def check_exp_orthogonality(rng: np.random.Generator) -> CheckResult:
    err = 0.0
    for _ in range(TRIALS):
        n = rng.integers(2, 6)
        err = max(err, float(orthogonality_error(exp_algebra(random_algebra(n, rng, 3.0)))))
    return CheckResult("exp stays orthogonal", err, IDENTITY_BOUND)


def check_energy_invariance(rng: np.random.Generator) -> CheckResult:
    N = 40
    J1 = jet_field(make_helix(1.0, 0.5), 1, N, [1.0])
    J2 = jet_field(make_line([0.0, 1.0, 0.0], [0.0, 0.0, 0.0]), 1, N, [1.0])
    path = random_smooth_path(rng, 3, N)
    base = discrete_energy(path, J1, J2).total
    err = 0.0
    for _ in range(20):
        g1, g2 = random_rotation(3, rng), random_rotation(3, rng)
        K1 = JetField(g1 @ J1.values, J1.weights)
        K2 = JetField(g2 @ J2.values, J2.weights)
        moved = discrete_energy(path.transformed(g2, g1), K1, K2).total
        err = max(err, abs(moved - base) / max(base, 1.0))
    return CheckResult("energy invariance under rigid motions", err, 1e-12)


def check_energy_symmetry(rng: np.random.Generator) -> CheckResult:
    N = 40
    J1, J2 = line_circle_jets(3.0, N)
    err = 0.0
    for _ in range(10):
        path = random_smooth_path(rng, 2, N)
        e12 = discrete_energy(path, J1, J2).total
        e21 = discrete_energy(path.inverse(), J2, J1).total
        err = max(err, abs(e12 - e21) / max(e12, 1.0))
    return CheckResult("energy symmetry under path inversion", err, 1e-12)


def check_gradient(rng: np.random.Generator) -> CheckResult:
    N = 50
    err = 0.0
    J1, J2 = line_circle_jets(2.0, N)
    for _ in range(5):
        err = max(err, gradient_fd_error(random_smooth_path(rng, 2, N), J1, J2))
    H1 = jet_field(make_helix(1.0, 0.5), 1, N, [1.0])
    H2 = jet_field(make_line([1.0, 0.0, 0.0], [0.0, 0.0, 0.0], {"name": "linear", "v": 2.0}), 1, N, [1.0])
    for _ in range(5):
        err = max(err, gradient_fd_error(random_smooth_path(rng, 3, N), H1, H2))
    return CheckResult("energy gradient vs finite differences", err, 1e-5)


def check_integrator_orthogonality(rng: np.random.Generator) -> CheckResult:
    J1, J2 = line_circle_jets(10.0, 400)
    traj = integrate_ivp(random_rotation(2, rng), J1, J2)
    return CheckResult("integrator orthogonality", traj.path.max_orthogonality_error(), 1e-10)


def check_straight_lines(rng: np.random.Generator) -> CheckResult:
    N = 100
    J1 = jet_field(make_line([1.0, 0.0], [0.0, 0.0]), 1, N, [1.0])
    J2 = jet_field(make_line([1.0, 0.0], [0.0, 0.0], {"name": "linear", "v": 2.0}), 1, N, [1.0])
    e = discrete_energy(RotationPath.identity(2, N), J1, J2).total
    return CheckResult("straight-line energy 1/2 |f1' - f2'|^2", abs(e - 0.5), 1e-12)


CHECKS: list[Callable[[np.random.Generator], CheckResult]] = [
    check_diamond_antisymmetry,
    check_diamond_pairing,
    check_bracket_orthogonality,
    check_jet_norm_invariance,
    check_ad_invariance,
    check_momentum_2d,
    check_momentum_3d,
    check_hat3_bracket,
    check_exp_log,
    check_exp_orthogonality,
    check_energy_invariance,
    check_energy_symmetry,
    check_gradient,
    check_integrator_orthogonality,
    check_straight_lines,
]


def run_checks(config: RunConfig) -> list[CheckResult]:
    rng = np.random.default_rng(config.seed)
    results = []
    for check in CHECKS:
        result = check(rng)
        level = logging.INFO if result.passed else logging.WARNING
        logger.log(level, "%s: %.3e (bound %.0e)", result.name, result.measured, result.bound)
        results.append(result)
    return results
