"""
Discrete energy over rotation paths.

 Group 1 - rotation paths
 Group 2 - energy values and invariances
 Group 3 - gradient
"""

import numpy as np
import pytest

from checks import gradient_fd_error, line_circle_jets, random_smooth_path
from curves import RigidTransform, apply_rigid, make_helix, make_line
from energy import (
    RotationPath,
    discrete_energy,
    energy_gradient,
    gradient_sup_norm,
    jet_mismatch,
    negative_log_posterior,
    quadrature_weights,
)
from errors import AngleAtCut, ComponentMismatch, DimensionMismatch, InvalidConfig, NotARotation
from jets import jet_field
from liegroup import algebra_basis, inner_algebra, random_rotation, reflection, rotation_2d


def _speed_lines(N, v2=2.0, lam=1.0):
    J1 = jet_field(make_line([1.0, 0.0], [0.0, 0.0]), 1, N, [lam])
    J2 = jet_field(make_line([1.0, 0.0], [0.0, 0.0], {"name": "linear", "v": v2}), 1, N, [lam])
    return J1, J2


# ── Group 1: rotation paths ───────────────────────────────────────────────────

def test_path_validation():
    with pytest.raises(DimensionMismatch):
        RotationPath(np.eye(2)[None])
    with pytest.raises(NotARotation):
        RotationPath(np.stack([np.eye(2), 2.0 * np.eye(2)]))
    with pytest.raises(ComponentMismatch):
        RotationPath(np.stack([np.eye(2), reflection(2)]))


def test_path_is_read_only():
    path = RotationPath.identity(2, 4)
    with pytest.raises(ValueError):
        path.rotations[0, 0, 0] = 3.0


def test_path_geometry():
    path = RotationPath.identity(3, 20)
    assert (path.N, path.n, path.component) == (20, 3, 1)
    assert path.ds == pytest.approx(0.05)
    assert path.grid[-1] == 1.0


def test_relative_logs_of_uniform_rotation():
    N = 10
    path = RotationPath(rotation_2d(np.linspace(0.0, 1.0, N + 1)))
    xi = path.relative_logs()
    assert np.allclose(xi[:, 1, 0], 0.1)


def test_retract_and_transform(rng):
    path = random_smooth_path(rng, 3, 12)
    assert path.sup_distance(path.retract(np.zeros((13, 3, 3)))) == 0.0
    a, b = random_rotation(3, rng), random_rotation(3, rng)
    moved = path.transformed(a, b)
    assert np.allclose(moved.rotations[5], a @ path.rotations[5] @ b.T)
    assert path.inverse().inverse().sup_distance(path) < 1e-15


def test_quadrature_weights():
    assert np.array_equal(quadrature_weights(4), [0.5, 1.0, 1.0, 1.0, 0.5])
    assert np.array_equal(quadrature_weights(4, "uniform"), np.ones(5))
    with pytest.raises(InvalidConfig):
        quadrature_weights(4, "simpson")


# ── Group 2: energy ───────────────────────────────────────────────────────────

def test_identical_curves_have_zero_energy(unit_circle):
    J = jet_field(unit_circle, 2, 50, [1.0, 0.5])
    e = discrete_energy(RotationPath.identity(2, 50), J, J)
    assert e.total == 0.0
    assert len(e.residuals) == 51


def test_straight_lines_different_speeds():
    J1, J2 = _speed_lines(100)
    e = discrete_energy(RotationPath.identity(2, 100), J1, J2)
    assert e.kinetic == 0.0
    assert e.potential == pytest.approx(0.5, abs=1e-12)
    assert jet_mismatch(RotationPath.identity(2, 100), J1, J2).shape == (101, 2, 1)


def test_kinetic_of_uniform_rotation():
    # theta(s) = s: kinetic 1/2 int |hat2(1)|^2 = 1
    N = 40
    path = RotationPath(rotation_2d(np.linspace(0.0, 1.0, N + 1)))
    J1, _ = _speed_lines(N)
    e = discrete_energy(path, J1, J1)
    assert e.kinetic == pytest.approx(1.0, abs=1e-12)


def test_chord_kinetic_is_below_log_kinetic():
    N = 40
    path = RotationPath(rotation_2d(np.linspace(0.0, 3.0, N + 1)))
    J1, _ = _speed_lines(N)
    log_form = discrete_energy(path, J1, J1, kinetic="log").kinetic
    chord_form = discrete_energy(path, J1, J1, kinetic="chord").kinetic
    assert chord_form < log_form
    assert chord_form == pytest.approx(log_form, rel=1e-3)


def test_energy_invariant_under_rigid_motions(rng):
    N = 40
    c1, c2 = make_helix(1.0, 0.4), make_line([0.0, 0.0, 1.0], [1.0, 0.0, 0.0])
    J1, J2 = jet_field(c1, 1, N, [2.0]), jet_field(c2, 1, N, [2.0])
    path = random_smooth_path(rng, 3, N)
    g1, g2 = random_rotation(3, rng), random_rotation(3, rng)
    K1 = jet_field(apply_rigid(RigidTransform(g1, [1.0, 2.0, 3.0]), c1), 1, N, [2.0])
    K2 = jet_field(apply_rigid(RigidTransform(g2, [0.0, -1.0, 0.0]), c2), 1, N, [2.0])
    e = discrete_energy(path, J1, J2).total
    moved = discrete_energy(path.transformed(g2, g1), K1, K2).total
    assert moved == pytest.approx(e, rel=1e-12)


def test_energy_symmetric_under_path_inversion(rng):
    J1, J2 = line_circle_jets(4.0, 60)
    path = random_smooth_path(rng, 2, 60)
    assert discrete_energy(path.inverse(), J2, J1).total == pytest.approx(discrete_energy(path, J1, J2).total,
                                                                           rel=1e-12)


def test_half_turn_step_hits_the_cut():
    J1, J2 = _speed_lines(16)
    rotations = np.stack([np.eye(2)] * 8 + [rotation_2d(np.pi)] * 9)
    with pytest.raises(AngleAtCut):
        discrete_energy(RotationPath(rotations), J1, J2)


def test_energy_shape_checks(unit_line, unit_circle):
    J1 = jet_field(unit_line, 1, 20)
    J2 = jet_field(unit_circle, 1, 20)
    with pytest.raises(DimensionMismatch):
        discrete_energy(RotationPath.identity(2, 30), J1, J2)
    with pytest.raises(DimensionMismatch):
        discrete_energy(RotationPath.identity(3, 20), J1, J2)
    with pytest.raises(InvalidConfig):
        discrete_energy(RotationPath.identity(2, 20), J1, J2, kinetic="geodesic")


def test_negative_log_posterior():
    N = 50
    J1, J2 = _speed_lines(N)
    path = RotationPath.identity(2, N)
    assert negative_log_posterior(path, J1, J1) == 0.0
    # uniform weights: 2 * (1/2) sum_m |f1' - f2'|^2 ds / sigma^2
    assert negative_log_posterior(path, J1, J2, noise_var=0.5) == pytest.approx((N + 1) / N / 0.5)
    with pytest.raises(InvalidConfig):
        negative_log_posterior(path, J1, J2, noise_var=0.0)


# ── Group 3: gradient ─────────────────────────────────────────────────────────

def test_gradient_vanishes_at_trivial_minimum(unit_circle):
    J = jet_field(unit_circle, 1, 30)
    assert gradient_sup_norm(energy_gradient(RotationPath.identity(2, 30), J, J)) < 1e-12


def test_gradient_is_skew(rng):
    J1, J2 = line_circle_jets(3.0, 30)
    grad = energy_gradient(random_smooth_path(rng, 2, 30), J1, J2)
    assert np.allclose(grad, -np.swapaxes(grad, 1, 2), atol=0.0)


def test_gradient_matches_finite_differences_planar(rng):
    J1, J2 = line_circle_jets(5.0, 40)
    assert gradient_fd_error(random_smooth_path(rng, 2, 40), J1, J2) < 1e-5


def test_gradient_matches_finite_differences_spatial(rng):
    N = 24
    J1 = jet_field(make_helix(1.0, 0.3), 2, N, [1.0, 0.1])
    J2 = jet_field(make_line([0.0, 1.0, 0.0], [0.0, 0.0, 0.0], {"name": "linear", "v": 3.0}), 2, N, [1.0, 0.1])
    assert gradient_fd_error(random_smooth_path(rng, 3, N), J1, J2) < 1e-5


def test_chord_gradient_matches_finite_differences(rng):
    N, step = 30, 1e-6
    J1, J2 = line_circle_jets(2.0, N)
    path = random_smooth_path(rng, 2, N)
    grad = energy_gradient(path, J1, J2, kinetic="chord")
    E = algebra_basis(2)[0]
    for m in (0, 7, N):
        sig = np.zeros((N + 1, 2, 2))
        sig[m] = E
        plus = discrete_energy(path.retract(sig, step), J1, J2, kinetic="chord").total
        minus = discrete_energy(path.retract(sig, -step), J1, J2, kinetic="chord").total
        assert (plus - minus) / (2 * step) == pytest.approx(inner_algebra(grad[m], E), abs=1e-6)
