"""
Variational equations and shooting.

 Group 1 - integrators
 Group 2 - Newton shooting and multi-start
 Group 3 - planar scalar form and diagnostics
"""

import numpy as np
import pytest

from bvp import (
    ShootingProblem,
    bracketed_starts,
    dedup_critical_points,
    default_starts,
    end_rates,
    integrate_ivp,
    pendulum_residual,
    rhs,
    solve_bvp_multistart,
    solve_shooting,
    solve_theta_2d,
    theta_lift,
    theta_rhs,
    winding_number,
    winding_paths,
)
from checks import line_circle_jets
from curves import make_line
from energy import RotationPath, discrete_energy, energy_gradient, gradient_sup_norm
from errors import AllStartsFailed, DimensionMismatch, GridTooCoarse, InvalidConfig, NoConvergence
from jets import jet_field
from liegroup import component, reflection, rotation_2d, vee2
from momentum import diamond

ALPHA = 0.5


def rotated_lines(N=64, alpha=ALPHA, lam=1.0):
    """Unit-speed line along e1 and the same line turned by alpha."""
    J1 = jet_field(make_line([1.0, 0.0], [0.0, 0.0]), 1, N, [lam])
    J2 = jet_field(make_line([np.cos(alpha), np.sin(alpha)], [0.0, 0.0]), 1, N, [lam])
    return ShootingProblem(J1, J2)


# ── Group 1: integrators ──────────────────────────────────────────────────────

def test_rhs_matches_momentum_map():
    J1, J2 = line_circle_jets(2.0, 32)
    g = rotation_2d(0.3)
    omega = np.array([[0.0, -1.0], [1.0, 0.0]])
    dg, domega = rhs(0.25, g, omega, J1, J2)
    assert np.allclose(dg, g @ omega)
    assert np.allclose(domega, diamond(J1.at(0.25), g.T @ J2.at(0.25), [2.0]))
    with pytest.raises(DimensionMismatch):
        rhs(0.25, np.eye(3), np.zeros((3, 3)), J1, J2)


@pytest.mark.parametrize("scheme", ["leapfrog", "midpoint", "rk4"])
def test_integrators_stay_orthogonal(scheme):
    J1, J2 = line_circle_jets(10.0, 400)
    traj = integrate_ivp(rotation_2d(0.3), J1, J2, scheme=scheme)
    assert traj.path.max_orthogonality_error() < 1e-10
    assert traj.omegas.shape == (401, 2, 2)
    assert np.array_equal(traj.omegas[0], np.zeros((2, 2)))


@pytest.mark.parametrize("scheme", ["midpoint", "rk4"])
def test_schemes_agree_to_discretization_order(scheme):
    J1, J2 = line_circle_jets(0.5, 200)
    ref = integrate_ivp(rotation_2d(0.3), J1, J2)
    other = integrate_ivp(rotation_2d(0.3), J1, J2, scheme=scheme)
    assert ref.path.sup_distance(other.path) < 1e-2


@pytest.mark.parametrize("scheme, low, high", [("leapfrog", 1.8, 2.2), ("midpoint", 2.7, 3.3)])
def test_self_convergence_order(scheme, low, high):
    def terminal_state(N):
        J1, J2 = line_circle_jets(10.0, N)
        traj = integrate_ivp(rotation_2d(0.3), J1, J2, scheme=scheme)
        return np.concatenate([traj.path.rotations[-1].ravel(), traj.omegas[-1].ravel()])

    coarse, mid, fine = (terminal_state(N) for N in (128, 256, 512))
    order = np.log2(np.abs(coarse - mid).max() / np.abs(mid - fine).max())
    assert low <= order <= high


def test_integrate_off_grid_steps():
    J1, J2 = line_circle_jets(0.5, 100)
    on = integrate_ivp(np.eye(2), J1, J2)
    off = integrate_ivp(np.eye(2), J1, J2, n_steps=200)
    assert off.path.N == 200
    assert np.abs(on.path.rotations[-1] - off.path.rotations[-1]).max() < 2e-2


def test_integrator_input_checks():
    J1, J2 = line_circle_jets(2.0, 100)
    with pytest.raises(GridTooCoarse):
        integrate_ivp(np.eye(2), J1, J2, n_steps=8)
    with pytest.raises(InvalidConfig):
        integrate_ivp(np.eye(2), J1, J2, scheme="euler")


def test_problem_needs_fine_grid():
    J1, J2 = line_circle_jets(2.0, 8)
    with pytest.raises(GridTooCoarse):
        ShootingProblem(J1, J2)


# ── Group 2: shooting ─────────────────────────────────────────────────────────

def test_identical_curves_converge_without_iterating(unit_circle):
    J = jet_field(unit_circle, 1, 40)
    point = solve_shooting(ShootingProblem(J, J), np.eye(2))
    assert point.iterations == 0
    assert point.energy.total < 1e-20


def test_rotated_line_recovers_rotation():
    point = solve_shooting(rotated_lines(), np.eye(2))
    assert point.residual <= 1e-9
    assert np.abs(point.path.rotations - rotation_2d(ALPHA)).max() < 1e-8
    assert point.energy.total < 1e-15


def test_shooting_solutions_are_discrete_stationary_points():
    J1, J2 = line_circle_jets(2.0, 200)
    point = solve_bvp_multistart(ShootingProblem(J1, J2))[0]
    assert gradient_sup_norm(energy_gradient(point.path, J1, J2)) < 1e-7


def test_multistart_finds_minimum_and_saddle():
    points = solve_bvp_multistart(rotated_lines())
    energies = [p.energy.total for p in points]
    assert energies == sorted(energies)
    assert len(points) == 2
    assert energies[0] < 1e-15
    # the flipped constant path: 1/2 |R(pi) e1 - e1|^2
    assert energies[1] == pytest.approx(2.0, abs=1e-8)
    assert points[0].path.sup_distance(points[1].path) > 1.0


def test_dedup_keeps_first_of_equal_paths():
    point = solve_shooting(rotated_lines(), np.eye(2))
    again = solve_shooting(rotated_lines(), rotation_2d(0.2), start_index=3)
    kept = dedup_critical_points([point, again], 1e-4)
    assert kept == [point]


def test_default_starts_with_reflections():
    starts = default_starts(2, 4, include_reflections=True)
    assert len(starts) == 8
    assert [component(R) for R in starts] == [1] * 4 + [-1] * 4


def test_reflected_start_stays_in_its_component():
    J1 = jet_field(make_line([1.0, 0.0], [0.0, 0.0]), 1, 64)
    J2 = jet_field(make_line([-1.0, 0.0], [0.0, 0.0]), 1, 64)
    point = solve_shooting(ShootingProblem(J1, J2), reflection(2))
    assert point.path.component == -1
    assert point.energy.total < 1e-15


def test_newton_iteration_cap():
    with pytest.raises(NoConvergence):
        solve_shooting(rotated_lines(alpha=1.0), np.eye(2), tol=1e-12, max_iter=1)


def test_all_starts_failing():
    with pytest.raises(AllStartsFailed):
        solve_bvp_multistart(rotated_lines(alpha=1.0), [np.eye(2)], tol=1e-12, max_iter=1)


def test_start_must_be_orthogonal():
    with pytest.raises(DimensionMismatch):
        solve_shooting(rotated_lines(), 2.0 * np.eye(2))


def test_critical_points_are_scored_with_the_problem_kinetic_form():
    J1, J2 = line_circle_jets(2.0, 200)
    point = solve_shooting(ShootingProblem(J1, J2, kinetic="chord"), np.eye(2))
    assert point.energy.total == pytest.approx(discrete_energy(point.path, J1, J2, "chord").total, rel=1e-14)
    assert point.energy.total != discrete_energy(point.path, J1, J2, "log").total
    with pytest.raises(InvalidConfig):
        ShootingProblem(J1, J2, kinetic="arc")


def test_threaded_multistart_matches_serial():
    serial = solve_bvp_multistart(rotated_lines())
    threaded = solve_bvp_multistart(rotated_lines(), workers=4)
    assert [p.start_index for p in serial] == [p.start_index for p in threaded]
    assert [p.energy.total for p in serial] == [p.energy.total for p in threaded]


# ── Group 3: planar form ──────────────────────────────────────────────────────

def test_theta_rhs_matches_momentum_map():
    J1, J2 = line_circle_jets(3.0, 32)
    theta = 0.8
    F = diamond(J1.values[5], rotation_2d(theta).T @ J2.values[5], [3.0])
    assert theta_rhs(theta, J1.values[5], J2.values[5], np.array([3.0])) == pytest.approx(vee2(F), abs=1e-12)


def test_scalar_solver_matches_matrix_solver():
    problem = rotated_lines()
    matrix = solve_shooting(problem, np.eye(2))
    scalar = solve_theta_2d(problem, 0.0)
    assert scalar.path.sup_distance(matrix.path) < 1e-8
    assert scalar.energy.total == pytest.approx(matrix.energy.total, abs=1e-12)


def test_scalar_solver_needs_planar_curves():
    J = jet_field(make_line([1.0, 0.0, 0.0], [0.0, 0.0, 0.0]), 1, 32)
    with pytest.raises(DimensionMismatch):
        solve_theta_2d(ShootingProblem(J, J))


def test_theta_lift_and_winding():
    theta = np.linspace(0.0, 2.0 * np.pi, 101)
    path = RotationPath(rotation_2d(theta))
    assert np.allclose(theta_lift(path), theta, atol=1e-12)
    assert winding_number(theta_lift(path)) == 1
    assert winding_number(np.zeros(5)) == 0


def test_pendulum_reduction_line_circle():
    lam = 2.0
    J1, J2 = line_circle_jets(lam, 200)
    point = solve_bvp_multistart(ShootingProblem(J1, J2))[0]
    check = pendulum_residual(point, lam)
    assert check.residual < 1e-6
    assert check.dphi_start == pytest.approx(2.0 * np.pi)
    assert check.dphi_end == pytest.approx(2.0 * np.pi, abs=1e-8)


def test_theta_rhs_accepts_angle_arrays():
    J1, J2 = line_circle_jets(3.0, 32)
    angles = np.linspace(0.0, 6.0, 7)
    lam = np.array([3.0])
    batched = theta_rhs(angles, J1.values[5], J2.values[5], lam)
    assert batched.shape == (7,)
    assert np.allclose(batched, [theta_rhs(a, J1.values[5], J2.values[5], lam) for a in angles], atol=1e-14)


def test_end_rates_match_matrix_integrator():
    J1, J2 = line_circle_jets(2.0, 100)
    problem = ShootingProblem(J1, J2)
    rates = end_rates(problem, [0.3, 2.0])
    for angle, rate in zip([0.3, 2.0], rates):
        traj = integrate_ivp(rotation_2d(angle), J1, J2)
        assert rate == pytest.approx(vee2(traj.omegas[-1]), abs=1e-9)


def test_bracketed_starts_find_both_constant_paths():
    starts = bracketed_starts(rotated_lines(), 64)
    angles = sorted(np.mod(np.arctan2(R[1, 0], R[0, 0]), 2.0 * np.pi) for R in starts)
    assert angles == pytest.approx([ALPHA, ALPHA + np.pi], abs=1e-10)


def test_bracketed_starts_need_planar_curves():
    J = jet_field(make_line([1.0, 0.0, 0.0], [0.0, 0.0, 0.0]), 1, 32)
    with pytest.raises(DimensionMismatch):
        bracketed_starts(ShootingProblem(J, J))


def test_scan_reaches_the_branch_spread_starts_find():
    J1, J2 = line_circle_jets(20.0, 200)
    problem = ShootingProblem(J1, J2)
    spread = solve_bvp_multistart(problem, default_starts(2, 8))
    scanned = solve_bvp_multistart(problem, [np.eye(2)], scan=256)
    assert scanned[0].energy.total <= spread[0].energy.total + 1e-9
    assert scanned[0].winding == 1


def test_winding_paths_turn_once_either_way():
    paths = winding_paths(50)
    assert len(paths) == 8
    assert sorted(winding_number(theta_lift(p)) for p in paths) == [-1] * 4 + [1] * 4


def test_scalar_solver_matches_matrix_solver_on_line_circle():
    J1, J2 = line_circle_jets(10.0, 200)
    problem = ShootingProblem(J1, J2)
    R = bracketed_starts(problem)[0]
    matrix = solve_shooting(problem, R)
    scalar = solve_theta_2d(problem, np.arctan2(R[1, 0], R[0, 0]))
    assert scalar.path.sup_distance(matrix.path) < 1e-7
    assert scalar.energy.total == pytest.approx(matrix.energy.total, rel=1e-9)
