"""
Metric axioms on seeded random curves.

The squared form d = inf E is symmetric, vanishes on rigid copies and is
invariant under rigid motions; the triangle inequality is checked on sqrt(d).
"""

import numpy as np
import pytest

from config import RunConfig
from curves import RigidTransform, apply_rigid, make_circle, make_graph, make_helix, make_line
from distance import distance
from liegroup import random_rotation

CFG = RunConfig(grid=48, weights=(1.0,))
SEEDS = range(10)


def _random_unit(rng, n):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_curve(rng, n):
    # straight lines in R^3 are fixed by rotations about their axis, which leaves a
    # continuum of minimizers
    kind = rng.choice(["line", "circle", "graph"] if n == 2 else ["circle", "graph", "helix"])
    if kind == "line":
        v = rng.uniform(0.5, 2.0)
        profile = {"name": "sinusoidal", "v": v, "eps": rng.uniform(-0.05, 0.05) * v}
        return make_line(_random_unit(rng, n), rng.standard_normal(n), profile)
    if kind == "circle":
        return make_circle(rng.uniform(0.1, 0.4), n)
    if kind == "graph":
        bend = rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 0.5)
        return make_graph({"name": "polynomial", "coeffs": [0.0, 0.0, bend]}, n)
    return make_helix(rng.uniform(0.1, 0.3), rng.uniform(0.5, 1.0))


def random_motion(rng, n):
    return RigidTransform(random_rotation(n, rng), rng.standard_normal(n))


@pytest.mark.slow
@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("seed", SEEDS)
def test_metric_axioms(seed, n):
    rng = np.random.default_rng(1000 * n + seed)
    c1, c2, c3 = (random_curve(rng, n) for _ in range(3))

    assert distance(c1, c1, CFG).value <= 1e-10
    assert distance(c1, apply_rigid(random_motion(rng, n), c1), CFG).value <= 1e-10

    d12 = distance(c1, c2, CFG)
    d21 = distance(c2, c1, CFG)
    assert d12.agree and d21.agree
    assert d12.value == pytest.approx(d21.value, abs=1e-8)

    moved = distance(apply_rigid(random_motion(rng, n), c1), c2, CFG)
    assert moved.value == pytest.approx(d12.value, abs=1e-8)

    d13 = distance(c1, c3, CFG).metric
    d23 = distance(c2, c3, CFG).metric
    assert d13 <= d12.metric + d23 + 1e-6


def test_positive_between_different_shapes():
    line = make_line([1.0, 0.0], [0.0, 0.0])
    bent = make_graph({"name": "polynomial", "coeffs": [0.0, 0.0, 1.0]})
    assert distance(line, bent, CFG).value > 1e-3


def test_squared_form_breaks_the_triangle_inequality():
    # collinear lines with speeds 1, 2, 3: d13 = 2 but d12 + d23 = 1
    lines = [make_line([1.0, 0.0], [0.0, 0.0], {"name": "linear", "v": v}) for v in (1.0, 2.0, 3.0)]
    d12, d23, d13 = (distance(a, b, CFG) for a, b in [(lines[0], lines[1]), (lines[1], lines[2]),
                                                       (lines[0], lines[2])])
    assert d13.value == pytest.approx(2.0, abs=1e-9)
    assert d13.value > d12.value + d23.value
    assert d13.metric <= d12.metric + d23.metric + 1e-12
