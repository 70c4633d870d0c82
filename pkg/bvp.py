# bvp.py
"""Variational equations and the shooting solver.

State (g, Omega) with g' = g Omega and Omega' = diamond(A1, g^T A2); natural
boundary conditions Omega(0) = Omega(1) = 0.  Shooting fixes Omega(0) = 0,
parametrizes g(0) = g_start exp(zeta) and drives r(zeta) = Omega(1) to zero
with a damped Newton iteration.

The default "leapfrog" scheme kicks Omega by half steps around each drift
g <- g exp(ds Omega_half), weighting the end kicks like the trapezoid rule.
Its shooting solutions are exact stationary points of ``energy.discrete_energy``
and it converges at second order.  "midpoint" evaluates the force once at the
half step; its measured self-convergence rate is close to third order.  "rk4" is
the Munthe-Kaas fourth-order method.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.optimize

from config import (
    DEDUP_TOL,
    DEFAULT_MAX_ITER,
    DEFAULT_STARTS,
    DEFAULT_TOL,
    INTEGRATOR_SCHEMES,
    JACOBIAN_STEP,
    KINETIC_FORMS,
    MAX_HALVINGS,
    MIN_GRID,
    PROJECTION_INTERVAL,
    SCAN_ANGLES,
    SINGULAR_CONDITION,
    WINDING_PHASES,
)
from energy import EnergyBreakdown, RotationPath, discrete_energy, quadrature_weights
from errors import (
    AllStartsFailed,
    AngleAtCut,
    DimensionMismatch,
    GridTooCoarse,
    InvalidConfig,
    NoConvergence,
    SingularJacobian,
    SolverError,
)
from jets import JetField
from liegroup import (
    algebra_coords,
    algebra_dim,
    dexpinv,
    exp_algebra,
    from_algebra_coords,
    hat2,
    is_rotation,
    project_rotation,
    reflection,
    rotation_2d,
    spread_rotations,
    vee2,
)
from momentum import diamond

logger = logging.getLogger("curvedist.bvp")

TWO_PI = 2.0 * np.pi


# ------- types -------

@dataclass(frozen=True, eq=False)
class ShootingProblem:
    jets1: JetField
    jets2: JetField
    scheme: str = "leapfrog"
    quadrature: str = "trapezoid"
    kinetic: str = "log"          # discrete kinetic form used to score critical points

    def __post_init__(self):
        self.jets1.check_compatible(self.jets2)
        if self.jets1.N < MIN_GRID:
            raise GridTooCoarse(f"shooting needs N >= {MIN_GRID}, got {self.jets1.N}")
        if self.scheme not in INTEGRATOR_SCHEMES:
            raise InvalidConfig(f"unknown integrator scheme {self.scheme!r}")
        if self.kinetic not in KINETIC_FORMS:
            raise InvalidConfig(f"unknown kinetic form {self.kinetic!r}")

    @property
    def n(self) -> int:
        return self.jets1.n

    @property
    def k(self) -> int:
        return self.jets1.k

    @property
    def N(self) -> int:
        return self.jets1.N

    @property
    def weights(self) -> np.ndarray:
        return self.jets1.weights

    @property
    def dim(self) -> int:
        return algebra_dim(self.n)


@dataclass(frozen=True, eq=False)
class Trajectory:
    path: RotationPath
    omegas: np.ndarray            # (N+1, n, n), Omega at the nodes


@dataclass(frozen=True, eq=False)
class CriticalPoint:
    path: RotationPath
    omegas: np.ndarray
    energy: EnergyBreakdown
    residual: float               # |Omega(1)|
    iterations: int
    start_index: int

    @property
    def winding(self) -> Optional[int]:
        if self.path.n != 2:
            return None
        return winding_number(theta_lift(self.path))

    def summary(self) -> dict:
        return {
            "energy": self.energy.total,
            "kinetic": self.energy.kinetic,
            "potential": self.energy.potential,
            "residual": self.residual,
            "iterations": self.iterations,
            "start_index": self.start_index,
            "winding": self.winding,
        }


@dataclass(frozen=True)
class PendulumCheck:
    residual: float               # sup |phi'' + pi lambda r cos(phi)| over interior nodes
    dphi_start: float
    dphi_end: float


# ------- right-hand side / integration -------

def rhs(s: float, g: np.ndarray, omega: np.ndarray, J1: JetField, J2: JetField):
    """(g', Omega') of the variational system at parameter s."""
    g = np.asarray(g, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if g.shape != (J1.n, J1.n) or omega.shape != g.shape:
        raise DimensionMismatch(f"state shapes {g.shape}, {omega.shape} do not match n = {J1.n}")
    return g @ omega, diamond(J1.at(s), g.T @ J2.at(s), J1.weights)


def integrate_ivp(
    g0: np.ndarray,
    J1: JetField,
    J2: JetField,
    n_steps: Optional[int] = None,
    scheme: str = "leapfrog",
    quadrature: str = "trapezoid",
) -> Trajectory:
    """Integrate from g(0) = g0, Omega(0) = 0 over [0, 1] in n_steps steps."""
    n_steps = J1.N if n_steps is None else int(n_steps)
    if n_steps < MIN_GRID:
        raise GridTooCoarse(f"integration needs at least {MIN_GRID} steps, got {n_steps}")
    J1.check_compatible(J2)
    h = 1.0 / n_steps
    on_grid = n_steps == J1.N
    lam = J1.weights

    def force(s: float, g: np.ndarray, node: Optional[int] = None) -> np.ndarray:
        if on_grid and node is not None:
            a1, a2 = J1.values[node], J2.values[node]
        else:
            a1, a2 = J1.at(s), J2.at(s)
        return diamond(a1, g.T @ a2, lam)

    g = np.array(g0, dtype=float)
    omega = np.zeros_like(g)
    gs, omegas = [g], [omega]

    if scheme == "leapfrog":
        w = quadrature_weights(n_steps, quadrature)
        F = force(0.0, g, 0)
        for m in range(n_steps):
            half = omega + (w[0] if m == 0 else 0.5) * h * F
            g = g @ exp_algebra(h * half)
            if (m + 1) % PROJECTION_INTERVAL == 0:
                g = project_rotation(g)
            F = force((m + 1) * h, g, m + 1)
            omega = half + (w[-1] if m + 1 == n_steps else 0.5) * h * F
            gs.append(g)
            omegas.append(omega)
    elif scheme == "midpoint":
        for m in range(n_steps):
            s = m * h
            F0 = force(s, g, m)
            g_mid = g @ exp_algebra(0.5 * h * omega)
            om_mid = omega + 0.5 * h * F0
            F_mid = force(s + 0.5 * h, g_mid)
            g = g @ exp_algebra(h * om_mid)
            omega = omega + h * F_mid
            if (m + 1) % PROJECTION_INTERVAL == 0:
                g = project_rotation(g)
            gs.append(g)
            omegas.append(omega)
    elif scheme == "rk4":
        for m in range(n_steps):
            s = m * h
            F1 = force(s, g, m)
            K1 = omega
            u2 = 0.5 * h * K1
            om2 = omega + 0.5 * h * F1
            F2 = force(s + 0.5 * h, g @ exp_algebra(u2))
            K2 = dexpinv(u2, om2)
            u3 = 0.5 * h * K2
            om3 = omega + 0.5 * h * F2
            F3 = force(s + 0.5 * h, g @ exp_algebra(u3))
            K3 = dexpinv(u3, om3)
            u4 = h * K3
            om4 = omega + h * F3
            F4 = force(s + h, g @ exp_algebra(u4), m + 1)
            K4 = dexpinv(u4, om4)
            g = g @ exp_algebra(h / 6.0 * (K1 + 2 * K2 + 2 * K3 + K4))
            omega = omega + h / 6.0 * (F1 + 2 * F2 + 2 * F3 + F4)
            if (m + 1) % PROJECTION_INTERVAL == 0:
                g = project_rotation(g)
            gs.append(g)
            omegas.append(omega)
    else:
        raise InvalidConfig(f"unknown integrator scheme {scheme!r}")

    return Trajectory(RotationPath(np.stack(gs)), np.stack(omegas))


# ------- shooting -------

def _shoot(problem: ShootingProblem, start: np.ndarray, z: np.ndarray) -> tuple[Trajectory, np.ndarray]:
    g0 = start @ exp_algebra(from_algebra_coords(z, problem.n))
    traj = integrate_ivp(g0, problem.jets1, problem.jets2, scheme=problem.scheme, quadrature=problem.quadrature)
    return traj, algebra_coords(traj.omegas[-1])


def _residual_norm(r: np.ndarray) -> float:
    # coordinates are the strict upper triangle, the o(n) norm counts each twice
    return float(np.sqrt(2.0) * np.linalg.norm(r))


def solve_shooting(
    problem: ShootingProblem,
    start: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    start_index: int = 0,
) -> CriticalPoint:
    """Newton iteration on r(zeta) = Omega(1), g(0) = start exp(zeta)."""
    if not tol > 0:
        raise InvalidConfig("tolerance must be positive")
    start = np.asarray(start, dtype=float)
    if start.shape != (problem.n, problem.n) or not is_rotation(start, 1e-10):
        raise DimensionMismatch(f"start must be an orthogonal {problem.n}x{problem.n} matrix")

    z = np.zeros(problem.dim)
    traj, r = _shoot(problem, start, z)
    rn = _residual_norm(r)
    iterations = 0
    while rn > tol:
        if iterations >= max_iter:
            raise NoConvergence(iterations, rn)
        jac = np.empty((problem.dim, problem.dim))
        for j in range(problem.dim):
            dz = np.zeros(problem.dim)
            dz[j] = JACOBIAN_STEP
            _, r_plus = _shoot(problem, start, z + dz)
            _, r_minus = _shoot(problem, start, z - dz)
            jac[:, j] = (r_plus - r_minus) / (2.0 * JACOBIAN_STEP)
        cond = np.linalg.cond(jac)
        if not np.isfinite(cond) or cond > SINGULAR_CONDITION:
            raise SingularJacobian(cond)
        delta = -np.linalg.solve(jac, r)

        alpha = 1.0
        for _ in range(MAX_HALVINGS + 1):
            trial_traj, trial_r = _shoot(problem, start, z + alpha * delta)
            trial_rn = _residual_norm(trial_r)
            if np.isfinite(trial_rn) and trial_rn < rn:
                break
            alpha *= 0.5
        else:
            raise NoConvergence(iterations + 1, rn, "line search could not reduce the residual")

        z = z + alpha * delta
        traj, r, rn = trial_traj, trial_r, trial_rn
        iterations += 1
        logger.debug("start %d: newton iter %d, step %.3g, |r| = %.3e", start_index, iterations, alpha, rn)

    energy = discrete_energy(traj.path, problem.jets1, problem.jets2, problem.kinetic, problem.quadrature)
    logger.info("start %d converged in %d iterations, E = %.10g", start_index, iterations, energy.total)
    return CriticalPoint(traj.path, traj.omegas, energy, rn, iterations, start_index)


def default_starts(
    n: int,
    count: int = DEFAULT_STARTS,
    include_reflections: bool = False,
    seed: int = 0,
) -> list[np.ndarray]:
    starts = spread_rotations(n, count, seed)
    if include_reflections:
        starts += [reflection(n) @ R for R in starts]
    return starts


def dedup_critical_points(points: list[CriticalPoint], tol: float) -> list[CriticalPoint]:
    kept: list[CriticalPoint] = []
    for p in points:
        if all(p.path.sup_distance(q.path) >= tol for q in kept):
            kept.append(p)
    return kept


def solve_bvp_multistart(
    problem: ShootingProblem,
    starts: Optional[Sequence[np.ndarray]] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    workers: int = 1,
    dedup_tol: float = DEDUP_TOL,
    scan: int = 0,
) -> list[CriticalPoint]:
    """Shoot from every start; distinct critical points sorted by energy, then start index.

    With ``scan`` > 0 on planar problems the starts also include every root of
    Omega(1) bracketed by ``scan`` samples of theta(0).
    """
    starts = default_starts(problem.n) if starts is None else list(starts)
    if scan and problem.n == 2:
        starts += bracketed_starts(problem, scan)
    if not starts:
        raise InvalidConfig("multi-start needs at least one start")

    def attempt(item):
        idx, R = item
        try:
            return solve_shooting(problem, R, tol, max_iter, start_index=idx)
        except (SolverError, AngleAtCut) as exc:
            logger.warning("start %d failed: %s", idx, exc)
            return exc

    items = list(enumerate(starts))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(attempt, items))
    else:
        outcomes = [attempt(item) for item in items]

    points = [o for o in outcomes if isinstance(o, CriticalPoint)]
    if not points:
        raise AllStartsFailed([str(o) for o in outcomes])
    points.sort(key=lambda p: (p.energy.total, p.start_index))
    return dedup_critical_points(points, dedup_tol)


# ------- 2D scalar form -------

def theta_rhs(theta, A1: np.ndarray, A2: np.ndarray, weights: np.ndarray):
    """theta'' = sum_i (lambda_i / 2) (R(-theta) a2_i x a1_i) for planar jets.

    ``theta`` may be an array of angles; the result then has its shape.
    """
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta)[..., None], np.sin(theta)[..., None]
    bx = c * A2[0] + s * A2[1]
    by = -s * A2[0] + c * A2[1]
    out = 0.5 * ((bx * A1[1] - by * A1[0]) @ weights)
    return float(out) if theta.ndim == 0 else out


def end_rates(problem: ShootingProblem, theta0) -> np.ndarray:
    """theta'(1) of the leapfrog theta trajectories started at each theta(0), theta'(0) = 0."""
    N, h = problem.N, 1.0 / problem.N
    A1, A2, lam = problem.jets1.values, problem.jets2.values, problem.weights
    w = quadrature_weights(N, problem.quadrature)
    theta = np.array(theta0, dtype=float, ndmin=1)
    omega = np.zeros_like(theta)
    F = theta_rhs(theta, A1[0], A2[0], lam)
    for m in range(N):
        half = omega + (w[0] if m == 0 else 0.5) * h * F
        theta = theta + h * half
        F = theta_rhs(theta, A1[m + 1], A2[m + 1], lam)
        omega = half + (w[-1] if m + 1 == N else 0.5) * h * F
    return omega


def bracketed_starts(problem: ShootingProblem, count: int = SCAN_ANGLES) -> list[np.ndarray]:
    """Rotations R(theta0) at every sign change of theta'(1) over ``count`` samples of theta0."""
    if problem.n != 2:
        raise DimensionMismatch(f"bracketed starts need planar curves, got n = {problem.n}")
    if count < 2:
        raise InvalidConfig(f"a scan needs at least 2 angles, got {count}")
    step = TWO_PI / count
    angles = np.arange(count) * step
    rates = end_rates(problem, angles)
    following = np.roll(rates, -1)

    def rate(t: float) -> float:
        return float(end_rates(problem, t)[0])

    starts = []
    for i in np.flatnonzero(np.sign(rates) != np.sign(following)):
        if not (np.isfinite(rates[i]) and np.isfinite(following[i])):
            continue
        root = scipy.optimize.brentq(rate, angles[i], angles[i] + step, xtol=1e-14)
        starts.append(rotation_2d(root))
    logger.debug("scan of %d angles bracketed %d roots", count, len(starts))
    return starts


def winding_paths(N: int, windings: Sequence[int] = (-1, 1), phases: int = WINDING_PHASES) -> list[RotationPath]:
    """Planar paths theta(s) = 2 pi (j / phases + w s) that turn w times."""
    s = np.linspace(0.0, 1.0, N + 1)
    return [RotationPath(rotation_2d(TWO_PI * (j / phases + w * s))) for w in windings for j in range(phases)]


def _theta_trajectory(problem: ShootingProblem, theta0: float) -> tuple[np.ndarray, np.ndarray]:
    N, h = problem.N, 1.0 / problem.N
    A1, A2, lam = problem.jets1.values, problem.jets2.values, problem.weights
    w = quadrature_weights(N, problem.quadrature)
    theta = np.empty(N + 1)
    omega = np.empty(N + 1)
    theta[0], omega[0] = theta0, 0.0
    F = theta_rhs(theta0, A1[0], A2[0], lam)
    for m in range(N):
        half = omega[m] + (w[0] if m == 0 else 0.5) * h * F
        theta[m + 1] = theta[m] + h * half
        F = theta_rhs(theta[m + 1], A1[m + 1], A2[m + 1], lam)
        omega[m + 1] = half + (w[-1] if m + 1 == N else 0.5) * h * F
    return theta, omega


def solve_theta_2d(
    problem: ShootingProblem,
    start_angle: float = 0.0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    start_index: int = 0,
) -> CriticalPoint:
    """Scalar shooting on theta(0) with theta'(0) = theta'(1) = 0 (n = 2)."""
    if problem.n != 2:
        raise DimensionMismatch(f"solve_theta_2d needs planar curves, got n = {problem.n}")
    theta0 = float(start_angle)
    theta, omega = _theta_trajectory(problem, theta0)
    rn = abs(omega[-1])
    iterations = 0
    while np.sqrt(2.0) * rn > tol:
        if iterations >= max_iter:
            raise NoConvergence(iterations, np.sqrt(2.0) * rn)
        _, om_plus = _theta_trajectory(problem, theta0 + JACOBIAN_STEP)
        _, om_minus = _theta_trajectory(problem, theta0 - JACOBIAN_STEP)
        slope = (om_plus[-1] - om_minus[-1]) / (2.0 * JACOBIAN_STEP)
        if slope == 0.0 or not np.isfinite(slope):
            raise SingularJacobian(np.inf)
        delta = -omega[-1] / slope
        alpha = 1.0
        for _ in range(MAX_HALVINGS + 1):
            t_theta, t_omega = _theta_trajectory(problem, theta0 + alpha * delta)
            if np.isfinite(t_omega[-1]) and abs(t_omega[-1]) < rn:
                break
            alpha *= 0.5
        else:
            raise NoConvergence(iterations + 1, np.sqrt(2.0) * rn, "line search could not reduce the residual")
        theta0 += alpha * delta
        theta, omega, rn = t_theta, t_omega, abs(t_omega[-1])
        iterations += 1

    path = RotationPath(rotation_2d(theta))
    energy = discrete_energy(path, problem.jets1, problem.jets2, problem.kinetic, problem.quadrature)
    return CriticalPoint(path, hat2(omega), energy, float(np.sqrt(2.0) * rn), iterations, start_index)


def theta_lift(path: RotationPath) -> np.ndarray:
    """Continuous rotation angle along a planar path."""
    if path.n != 2:
        raise DimensionMismatch(f"theta lift needs n = 2, got n = {path.n}")
    g0 = path.rotations[0] if path.component > 0 else reflection(2) @ path.rotations[0]
    theta0 = np.arctan2(g0[1, 0], g0[0, 0])
    increments = np.atleast_1d(vee2(path.relative_logs()))
    return theta0 + np.concatenate([[0.0], np.cumsum(increments)])


def winding_number(theta: np.ndarray) -> int:
    return int(np.round((theta[-1] - theta[0]) / TWO_PI))


def pendulum_residual(point: CriticalPoint, lam: float, radius: float = 1.0) -> PendulumCheck:
    """Check phi = 2 pi s - theta + pi against phi'' + pi lam r cos(phi) = 0, phi'(0) = phi'(1) = 2 pi.

    Valid for a unit-speed line along e1 matched to a circle of the given radius.
    """
    theta = theta_lift(point.path)
    N = point.path.N
    s = point.path.grid
    phi = TWO_PI * s - theta + np.pi
    phi_dd = (phi[2:] - 2.0 * phi[1:-1] + phi[:-2]) * N * N
    res = np.abs(phi_dd + np.pi * lam * radius * np.cos(phi[1:-1]))
    return PendulumCheck(
        residual=float(res.max()),
        dphi_start=float(TWO_PI - vee2(point.omegas[0])),
        dphi_end=float(TWO_PI - vee2(point.omegas[-1])),
    )
