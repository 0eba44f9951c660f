import math

import numpy as np
import pytest

from medialkit.core.errors import BadWitness, NotOnX
from medialkit.services.nearest import (
    distance,
    limiting_normal_sequence,
    limiting_normals,
    lipschitz_probe,
    nearest_set,
    normal_directions,
    normal_set_probe,
    settled_moves,
    stable_limiting_fan,
    usc_probe,
)


def _has(dirs, target, within):
    return float(np.min(np.linalg.norm(np.asarray(dirs) - np.asarray(target, dtype=float), axis=1))) <= within


@pytest.mark.parametrize(
    "name, x, expected",
    [
        ("circle", (0, 0), 1.0),
        ("wristwatch", (0, 0), 2.0),
        ("two_points", (0, 2), math.sqrt(5.0)),
    ],
)
def test_distance(scene, tol, name, x, expected):
    assert distance(scene(name), x, tol) == pytest.approx(expected, abs=1e-9)


def test_two_points_bisector(scene, tol):
    ns = nearest_set(scene("two_points"), (0, 0), tol)
    assert ns.multiplicity == 2
    assert ns.diameter == pytest.approx(2.0)
    assert sorted(ns.representatives[:, 0]) == pytest.approx([-1.0, 1.0])


def test_double_x_origin(scene, tol):
    ns = nearest_set(scene("double_x"), (0, 0, 0), tol)
    assert ns.multiplicity == 2
    assert sorted(ns.representatives[:, 2]) == pytest.approx([-1.0, 1.0])
    assert np.allclose(ns.representatives[:, :2], 0.0, atol=1e-9)


def test_unique_projection(scene, tol):
    ns = nearest_set(scene("circle"), (0.5, 0), tol)
    assert ns.multiplicity == 1
    assert not ns.continuum
    assert np.allclose(ns.representatives[0], [1.0, 0.0])


def test_circle_center_is_a_continuum(scene, tol):
    ns = nearest_set(scene("circle"), (0, 0), tol)
    assert ns.continuum
    assert ns.multiplicity >= 8


def test_normal_directions(scene, tol):
    fan = normal_directions(scene("circle"), (1, 0), tol)
    assert fan.kind == "exact_at_point"
    assert len(fan.directions) == 2
    assert _has(fan.directions, (1, 0), 1e-12) and _has(fan.directions, (-1, 0), 1e-12)

    isolated = normal_directions(scene("two_points"), (1, 0), tol)
    assert len(isolated.directions) >= 16

    chazal = normal_directions(scene("chazal"), (0, 0, 0), tol)
    assert _has(chazal.directions, (0, 0, 1), 1e-9)
    assert _has(chazal.directions, (0, 0, -1), 1e-9)


def test_normal_directions_need_a_point_of_x(scene, tol):
    with pytest.raises(NotOnX):
        normal_directions(scene("circle"), (0.5, 0), tol)


def test_limiting_normals(scene, tol):
    fan = limiting_normals(scene("circle"), (1, 0), 0.1, tol)
    assert fan.eta == 0.1
    for u in fan.directions:
        assert min(np.linalg.norm(u - (1, 0)), np.linalg.norm(u + (1, 0))) <= 0.11

    two = limiting_normals(scene("two_points"), (1, 0), 0.5, tol)
    assert len(two.directions) == len(normal_directions(scene("two_points"), (1, 0), tol).directions)


def test_chazal_limiting_fan_grows(scene, tol):
    fan = limiting_normals(scene("chazal"), (0, 0, 0), 0.1, tol)
    dirs = np.asarray(fan.directions)
    assert _has(dirs, (0, 0, 1), 0.05)
    assert len(dirs) > len(normal_directions(scene("chazal"), (0, 0, 0), tol).directions)


def test_limiting_sequence_stabilizes_on_a_circle(scene, tol):
    fans, stable = limiting_normal_sequence(scene("circle"), (1, 0), [0.2, 0.1, 0.05], tol)
    assert len(fans) == 3
    assert stable


def test_settled_moves_allow_drift_in_proportion_to_the_eta_step():
    assert settled_moves([0.1, 0.05], [0.1, 0.05]) == [False, True]
    assert settled_moves([0.1, 0.3], [0.1, 0.05])[-1] is False
    assert settled_moves([0.005], [0.1]) == [True]


def test_stable_limiting_fan_uses_the_smallest_settled_eta(scene, tol):
    fan = stable_limiting_fan(scene("circle"), (1, 0), [0.2, 0.1, 0.05], tol)
    assert fan.eta == pytest.approx(0.05)
    assert _has(fan.directions, (-1, 0), 1e-3)
    assert _has(fan.directions, (1, 0), 1e-3)


@pytest.mark.parametrize(
    "name, a, witnesses",
    [
        ("circle", (1, 0), [(0.5, 0), (0.9, 0)]),
        ("two_points", (1, 0), [(0.5, 0), (1, 1)]),
        ("circle", (1, 0), [(2, 0), (0.5, 0)]),
    ],
)
def test_normal_set_is_convex(scene, tol, name, a, witnesses):
    probe = normal_set_probe(scene(name), a, witnesses, tol)
    assert probe.passed
    assert probe.checked >= 3


def test_bad_witness(scene, tol):
    with pytest.raises(BadWitness):
        normal_set_probe(scene("two_points"), (1, 0), [(-0.5, 0)], tol)


def test_distance_is_lipschitz(scene, tol):
    probe = lipschitz_probe(scene("parabola"), np.array([-1.0, 0.0]), np.array([1.0, 2.0]), 2000, tol)
    assert probe.passed


def test_nearest_set_is_upper_semicontinuous(scene, tol):
    rng = np.random.default_rng(5)
    points = rng.uniform(-0.9, 0.9, size=(10, 2))
    points = points[np.abs(np.linalg.norm(points, axis=1) - 1.0) > 0.05]
    assert usc_probe(scene("circle"), points, tol).passed


@pytest.mark.parametrize("x", [(0.5, 0.25), (1, 1), (-0.5, 0.25), (-math.sqrt(0.02), 0.02)])
def test_points_of_the_parabola_are_on_x(scene, tol, x):
    s = scene("parabola")
    assert distance(s, x, tol) <= tol.eps_dist
    assert len(normal_directions(s, x, tol).directions) == 2
