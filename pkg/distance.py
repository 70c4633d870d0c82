# distance.py
"""d(c1, c2) = min over rotation paths of the discrete registration energy.

Two independent methods are combined: multi-start shooting on the variational
equations and direct gradient descent on the discrete energy.  The reported
distance is the lower of the two, with a flag recording whether they agree.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from bvp import (
    CriticalPoint,
    ShootingProblem,
    default_starts,
    solve_bvp_multistart,
    solve_shooting,
    theta_lift,
    winding_number,
    winding_paths,
)
from config import (
    AGREEMENT_ATOL,
    AGREEMENT_RTOL,
    ARMIJO_C,
    ARMIJO_MAX_HALVINGS,
    DIRECT_MAX_ITER,
    DIRECT_TOL,
    STALL_RTOL,
    RunConfig,
)
from curves import Curve
from energy import (
    EnergyBreakdown,
    RotationPath,
    discrete_energy,
    energy_gradient,
    gradient_sup_norm,
    quadrature_weights,
)
from errors import AllStartsFailed, AngleAtCut, DimensionMismatch, MaxIterReached, SolverError
from jets import JetField, jet_field

logger = logging.getLogger("curvedist.distance")


# ------- results -------

@dataclass(frozen=True, eq=False)
class DirectResult:
    path: RotationPath
    energy: EnergyBreakdown
    iterations: int
    gradient_norm: float
    converged: bool
    max_iter_reached: bool
    stalled: bool = False         # line search could no longer resolve a decrease


@dataclass(frozen=True, eq=False)
class DistanceResult:
    value: float
    path: RotationPath
    method: str                   # "shooting", "direct" or "agree"
    energy: EnergyBreakdown
    critical_points: tuple[CriticalPoint, ...]
    agree: bool
    diagnostics: dict = field(default_factory=dict)

    @property
    def metric(self) -> float:
        """sqrt(d): the form of the distance that satisfies the triangle inequality."""
        return float(np.sqrt(max(self.value, 0.0)))

    @property
    def theta(self) -> Optional[np.ndarray]:
        return theta_lift(self.path) if self.path.n == 2 else None

    @property
    def winding(self) -> Optional[int]:
        theta = self.theta
        return None if theta is None else winding_number(theta)

    def as_dict(self, include_timing: bool = False) -> dict:
        diagnostics = dict(self.diagnostics)
        if not include_timing:
            diagnostics.pop("wall_time", None)
        out = {
            "value": self.value,
            "metric": self.metric,
            "method": self.method,
            "agree": self.agree,
            "energy": self.energy.as_dict(),
            "critical_points": [p.summary() for p in self.critical_points],
            "diagnostics": diagnostics,
        }
        if self.path.n == 2:
            theta = self.theta
            out["winding"] = {
                "number": winding_number(theta),
                "theta_start": float(theta[0]),
                "theta_end": float(theta[-1]),
            }
        return out


# ------- direct minimizer -------

def _metric_operator(N: int, mass: float, quadrature: str) -> np.ndarray:
    """Banded H^1 metric (1/ds) Laplacian + mass ds W in solve_banded layout."""
    ds = 1.0 / N
    w = quadrature_weights(N, quadrature)
    ab = np.zeros((3, N + 1))
    diag = np.full(N + 1, 2.0)
    diag[0] = diag[-1] = 1.0
    ab[0, 1:] = -1.0 / ds
    ab[1] = diag / ds + mass * ds * w
    ab[2, :-1] = -1.0 / ds
    return ab


def _potential_scale(J1: JetField, J2: JetField) -> float:
    """Typical curvature of the potential term per unit length."""
    n1 = np.sqrt(np.einsum("mik,mik->mk", J1.values, J1.values))
    n2 = np.sqrt(np.einsum("mik,mik->mk", J2.values, J2.values))
    scale = float(np.sum(J1.weights * np.mean(n1 * n2, axis=0)))
    return max(scale, 1e-6)


def minimize_direct(
    init: RotationPath,
    J1: JetField,
    J2: JetField,
    tol: float = DIRECT_TOL,
    max_iter: int = DIRECT_MAX_ITER,
    kinetic: str = "log",
    quadrature: str = "trapezoid",
    strict: bool = False,
) -> DirectResult:
    """Armijo gradient descent, g_m <- g_m exp(-t P_m), in the H^1 metric of the path space.

    P solves K P = grad with K the tridiagonal metric operator, so the step is
    a Riemannian gradient step for that metric.  Accepted steps never raise
    the energy.  With ``strict`` an exhausted iteration budget raises
    MaxIterReached instead of returning the flagged best-so-far path.
    """
    N = init.N
    ab = _metric_operator(N, _potential_scale(J1, J2), quadrature)

    def evaluate(path: RotationPath) -> float:
        return discrete_energy(path, J1, J2, kinetic, quadrature).total

    path = init
    E = evaluate(path)
    grad = energy_gradient(path, J1, J2, kinetic, quadrature)
    gnorm = gradient_sup_norm(grad)
    step = 1.0
    iterations = 0
    stalled = False

    while gnorm > tol and iterations < max_iter:
        P = scipy.linalg.solve_banded((1, 1), ab, grad.reshape(N + 1, -1)).reshape(grad.shape)
        slope = float(np.einsum("mij,mij->", grad, P))
        t = min(1.0, 2.0 * step)
        for _ in range(ARMIJO_MAX_HALVINGS):
            try:
                trial = path.retract(P, -t)
                E_trial = evaluate(trial)
            except AngleAtCut:
                E_trial = np.inf
            if E_trial <= E - ARMIJO_C * t * slope:
                break
            t *= 0.5
        else:
            stalled = True
            logger.debug("direct descent stalled at iteration %d, |grad| = %.3e", iterations, gnorm)
            break
        decrease = E - E_trial
        path, E, step = trial, E_trial, t
        grad = energy_gradient(path, J1, J2, kinetic, quadrature)
        gnorm = gradient_sup_norm(grad)
        iterations += 1
        if gnorm > tol and decrease <= STALL_RTOL * abs(E):
            stalled = True
            logger.debug("direct descent stalled at iteration %d, |grad| = %.3e", iterations, gnorm)
            break

    converged = gnorm <= tol
    hit_cap = not converged and not stalled and iterations >= max_iter
    if hit_cap:
        logger.warning("direct minimizer reached %d iterations with |grad| = %.3e", iterations, gnorm)
        if strict:
            raise MaxIterReached(iterations, gnorm)
    energy = discrete_energy(path, J1, J2, kinetic, quadrature)
    return DirectResult(path, energy, iterations, gnorm, converged, hit_cap, stalled)


# ------- main API -------

def _agreement(e_shoot: float, e_direct: float) -> tuple[bool, float]:
    gap = abs(e_shoot - e_direct)
    scale = max(abs(e_shoot), abs(e_direct))
    rel = gap / scale if scale > 0 else 0.0
    return gap <= AGREEMENT_RTOL * scale + AGREEMENT_ATOL, rel


def distance(c1: Curve, c2: Curve, config: Optional[RunConfig] = None) -> DistanceResult:
    """Registration distance between two curves on the configured grid."""
    cfg = config or RunConfig()
    if c1.n != c2.n:
        raise DimensionMismatch(f"curves live in R^{c1.n} and R^{c2.n}")
    started = time.perf_counter()
    J1 = jet_field(c1, cfg.k, cfg.grid, cfg.weights)
    J2 = jet_field(c2, cfg.k, cfg.grid, cfg.weights)
    return distance_between_jets(J1, J2, cfg, started)


def distance_between_jets(
    J1: JetField,
    J2: JetField,
    cfg: RunConfig,
    started: Optional[float] = None,
    extra_starts: Sequence[np.ndarray] = (),
) -> DistanceResult:
    """Distance for precomputed jets; ``extra_starts`` are appended to the default shooting starts.

    The shooting energy is the best critical point multi-start shooting found on
    its own.  The direct optimum is re-shot afterwards and reported separately
    under ``certified_direct``, so agreement means both methods reached the same
    energy independently.
    """
    started = time.perf_counter() if started is None else started
    problem = ShootingProblem(J1, J2, cfg.scheme, cfg.quadrature, cfg.kinetic)
    starts = default_starts(problem.n, cfg.starts, cfg.include_reflections, cfg.seed) + list(extra_starts)

    points: list[CriticalPoint] = []
    shooting_error: Optional[SolverError] = None
    try:
        points = solve_bvp_multistart(problem, starts, cfg.tol, cfg.max_iter, cfg.workers, scan=cfg.scan)
    except SolverError as exc:
        shooting_error = exc
        logger.warning("shooting failed: %s", exc)

    inits = [p.path for p in points] + [RotationPath.constant(R, cfg.grid) for R in starts]
    if problem.n == 2:
        inits += winding_paths(cfg.grid)

    def descend(init: RotationPath):
        try:
            return minimize_direct(init, J1, J2, cfg.direct_tol, cfg.direct_max_iter, cfg.kinetic, cfg.quadrature)
        except (AngleAtCut, SolverError) as exc:
            logger.warning("direct descent failed: %s", exc)
            return None

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            runs = list(pool.map(descend, inits))
    else:
        runs = [descend(init) for init in inits]
    direct = [r for r in runs if r is not None]

    if not points and not direct:
        raise shooting_error or AllStartsFailed(["no shooting start and no direct run succeeded"])

    best_direct = min(direct, key=lambda r: r.energy.total) if direct else None

    # the direct optimum as a critical point of the variational equations
    certified: Optional[CriticalPoint] = None
    if best_direct is not None:
        try:
            certified = solve_shooting(
                problem, best_direct.path.rotations[0], cfg.tol, cfg.max_iter, start_index=len(starts)
            )
        except (SolverError, AngleAtCut) as exc:
            logger.info("direct optimum could not be re-shot: %s", exc)

    def energy_of(path: RotationPath) -> EnergyBreakdown:
        return discrete_energy(path, J1, J2, cfg.kinetic, cfg.quadrature)

    shoot_best = energy_of(points[0].path) if points else None
    candidates = []
    if shoot_best is not None:
        candidates.append((shoot_best.total, 0, "shooting", points[0].path))
    if best_direct is not None:
        candidates.append((best_direct.energy.total, 1, "direct", best_direct.path))
    value, _, method, best_path = min(candidates, key=lambda c: (c[0], c[1]))

    agree, rel_gap = False, None
    if shoot_best is not None and best_direct is not None:
        agree, rel_gap = _agreement(shoot_best.total, best_direct.energy.total)
        if agree:
            method = "agree"
        else:
            logger.warning(
                "shooting (%.12g) and direct (%.12g) energies disagree", shoot_best.total, best_direct.energy.total
            )

    energy = energy_of(best_path)
    grad = energy_gradient(best_path, J1, J2, cfg.kinetic, cfg.quadrature)
    diagnostics = {
        "gradient_norm": gradient_sup_norm(grad),
        "residual": points[0].residual if points else None,
        "shooting_energy": shoot_best.total if shoot_best is not None else None,
        "direct_energy": best_direct.energy.total if best_direct is not None else None,
        "certified_direct": certified.summary() if certified is not None else None,
        "relative_gap": rel_gap,
        "direct_iterations": best_direct.iterations if best_direct is not None else None,
        "direct_converged": best_direct.converged if best_direct is not None else None,
        "starts": len(starts),
        "orthogonality_error": best_path.max_orthogonality_error(),
        "wall_time": time.perf_counter() - started,
    }
    logger.info("distance = %.12g via %s", energy.total, method)
    return DistanceResult(
        value=energy.total,
        path=best_path,
        method=method,
        energy=energy,
        critical_points=tuple(points),
        agree=agree,
        diagnostics=diagnostics,
    )
