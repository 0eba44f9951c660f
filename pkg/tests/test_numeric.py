import numpy as np
import pytest

from medialkit.core.errors import ValidationError
from medialkit.core.numeric import (
    Tolerances,
    as_vec,
    circle_directions,
    default_tolerances,
    fibonacci_sphere,
    halton_ball,
    make_tolerances,
    radius_value,
    spread_indices,
)


def test_default_tolerances():
    tol = default_tolerances()
    assert tol.eps_dist == 1e-9
    assert tol.sep_tol == 1e-3 > tol.eps_cluster == 1e-5
    assert default_tolerances() == tol


def test_broken_chain_is_rejected():
    with pytest.raises(ValidationError):
        make_tolerances(eps_cluster=1e-2, sep_tol=1e-3)


def test_tolerances_are_frozen():
    tol = Tolerances()
    with pytest.raises(Exception):
        tol.seed = 7


def test_triangle_inequality_on_random_vectors():
    rng = np.random.default_rng(0)
    u, v = rng.normal(size=(2, 1000, 3))
    lhs = np.linalg.norm(u + v, axis=1)
    rhs = np.linalg.norm(u, axis=1) + np.linalg.norm(v, axis=1)
    assert np.all(lhs <= rhs + 1e-12)


@pytest.mark.parametrize("coords", [[1.0], [1, 2, 3, 4], [0.0, float("nan")]])
def test_as_vec_rejects(coords):
    with pytest.raises(ValidationError):
        as_vec(coords)


def test_as_vec_dimension_mismatch():
    with pytest.raises(ValidationError):
        as_vec([0, 0, 0], 2)


def test_samplers_are_unit_and_deterministic():
    assert np.allclose(np.linalg.norm(circle_directions(16), axis=1), 1.0)
    assert np.allclose(np.linalg.norm(fibonacci_sphere(64), axis=1), 1.0)

    a = halton_ball(np.zeros(3), 0.5, 40, seed=3)
    b = halton_ball(np.zeros(3), 0.5, 40, seed=3)
    assert a.shape == (40, 3)
    assert np.array_equal(a, b)
    assert np.all(np.linalg.norm(a, axis=1) <= 0.5 + 1e-12)


def test_spread_indices():
    assert list(spread_indices(3, 8)) == [0, 1, 2]
    idx = spread_indices(100, 5)
    assert idx[0] == 0 and idx[-1] == 99 and len(idx) == 5


def test_radius_value_marks_unbounded():
    tol = default_tolerances()
    assert radius_value(tol.t_max, tol) == "unbounded"
    assert radius_value(0.5, tol) == 0.5
