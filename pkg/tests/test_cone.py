import numpy as np
import pytest

from medialkit.core.errors import OnX, TooFewSamples, ValidationError
from medialkit.schemas.region import make_region
from medialkit.services.cone import (
    compare_cone,
    cone_property_check,
    direction_grid,
    sphere_medial,
    sphere_medial_closure,
    tangent_cone_directions,
)
from medialkit.services.medial import MedialCloud, MedialSample, scan_medial


def _cloud(points, step=0.05, box=(-2, -2, 2, 2)):
    samples = tuple(
        MedialSample(point=np.asarray(p, dtype=float), distance=1.0, multiplicity=2, diameter=2.0, refined=False)
        for p in points
    )
    return MedialCloud(scene="synthetic", region=make_region(box, step), step=step, samples=samples)


def _near(dirs, target, within=0.05):
    return float(np.min(np.linalg.norm(np.asarray(dirs) - np.asarray(target, dtype=float), axis=1))) <= within


def test_tangent_cone_of_a_line(tol):
    ys = np.arange(-1.5, 1.5001, 0.05)
    cloud = _cloud([(0.0, y) for y in ys])
    cone = tangent_cone_directions(cloud, (0, 0), [0.8, 0.4, 0.2], tol)
    assert len(cone) > 0
    assert np.all(np.abs(cone.directions[:, 0]) <= 1e-9)
    assert _near(cone.directions, (0, 1)) and _near(cone.directions, (0, -1))


def test_tangent_cone_of_a_ray_is_one_sided(tol):
    ys = np.arange(0.0, 1.5001, 0.05)
    cone = tangent_cone_directions(_cloud([(0.0, y) for y in ys]), (0, 0), [0.8, 0.4, 0.2], tol)
    assert np.all(cone.directions[:, 1] > 0.99)


def test_scales_must_decrease(tol):
    with pytest.raises(ValidationError):
        tangent_cone_directions(_cloud([(0, 0.5)]), (0, 0), [0.2, 0.4], tol)


def test_scales_must_exceed_the_step(tol):
    with pytest.raises(ValidationError):
        tangent_cone_directions(_cloud([(0, 0.5)]), (0, 0), [0.8, 0.05], tol)


def test_isolated_point_has_no_directions(scene, tol):
    cloud = scan_medial(scene("circle"), make_region([-0.5, -0.5, 0.5, 0.5], 0.05), tol)
    with pytest.raises(TooFewSamples):
        tangent_cone_directions(cloud, (0, 0), [0.3, 0.15], tol)


def test_direction_grid_densities():
    assert len(direction_grid(2)[0]) >= 360
    assert len(direction_grid(3)[0]) >= 1000


def test_sphere_medial_of_two_points(scene, tol):
    cloud = sphere_medial(scene("two_points"), (0, 0), tol)
    assert len(cloud) > 0
    assert np.all(np.abs(cloud.directions[:, 0]) <= 0.05)
    assert _near(cloud.directions, (0, 1)) and _near(cloud.directions, (0, -1))


def test_sphere_medial_of_double_x_is_the_equator(scene, tol):
    cloud = sphere_medial(scene("double_x"), (0, 0, 0), tol)
    assert len(cloud) >= 36
    assert np.all(np.abs(cloud.directions[:, 2]) <= 0.06)


def test_sphere_medial_of_the_wristwatch_origin_is_the_vertical(scene, tol):
    cloud = sphere_medial(scene("wristwatch"), (0, 0), tol)
    assert np.all(np.abs(cloud.directions[:, 0]) <= np.sin(np.radians(1.0)))
    assert _near(cloud.directions, (0, 1), 1e-3) and _near(cloud.directions, (0, -1), 1e-3)


def test_sphere_medial_of_a_full_circle_is_empty(scene, tol):
    assert len(sphere_medial(scene("circle"), (0, 0), tol)) == 0


def test_sphere_medial_needs_a_point_off_x(scene, tol):
    with pytest.raises(OnX):
        sphere_medial(scene("circle"), (1, 0), tol)


def test_sphere_medial_is_a_cone(scene, tol):
    assert cone_property_check(scene("two_points"), (0, 0.3), tol).passed
    assert cone_property_check(scene("cross_sphere"), (0, 0, 0), tol).passed


def test_closure_of_the_cross_sphere_medial_axis(scene, tol):
    s = scene("cross_sphere")
    assert sphere_medial_closure(s, (0, 0, 0), (0, 0, 1), tol)
    assert not sphere_medial_closure(s, (0, 0, 0), (1, 0.3, 0), tol)


def test_two_points_cone_equality(scene, tol):
    s = scene("two_points")
    cloud = scan_medial(s, make_region([-2, -2, 2, 2], 0.05), tol)
    cmp = compare_cone(s, cloud, (0, 0), tol, [0.8, 0.4, 0.2])
    assert cmp.plane_case
    assert cmp.hausdorff_included <= 0.05
    assert cmp.hausdorff_equal <= 0.05
    assert cmp.diam_condition_holds


def test_isolated_center_compares_empty_to_empty(scene, tol):
    s = scene("circle")
    cloud = scan_medial(s, make_region([-0.5, -0.5, 0.5, 0.5], 0.05), tol)
    cmp = compare_cone(s, cloud, (0, 0), tol, [0.3, 0.15])
    assert len(cmp.tangent_cone) == 0
    assert cmp.hausdorff_equal == 0.0


@pytest.mark.slow
def test_wristwatch_origin_cone_equality(scene, tol):
    s = scene("wristwatch")
    cloud = scan_medial(s, make_region([-0.9, -1.5, 0.9, 1.5], 0.05), tol)
    cmp = compare_cone(s, cloud, (0, 0), tol)
    assert cmp.hausdorff_equal <= 0.1


@pytest.mark.slow
def test_parabola_plane_case(scene, tol):
    s = scene("parabola")
    cloud = scan_medial(s, make_region([-1, 0, 1, 2], 0.02), tol)
    cmp = compare_cone(s, cloud, (0, 1), tol)
    assert cmp.plane_case
    assert cmp.hausdorff_equal <= 0.1


@pytest.mark.slow
def test_double_x_strict_inclusion(scene, tol):
    s = scene("double_x")
    cloud = scan_medial(s, make_region([-0.85, -0.85, -0.85, 0.85, 0.85, 0.85], 0.025), tol)
    cmp = compare_cone(s, cloud, (0, 0, 0), tol, [0.8, 0.4, 0.2])
    assert cmp.hausdorff_included <= 0.1
    assert cmp.hausdorff_equal >= 0.5
    assert np.max(np.abs(cmp.tangent_cone.directions[:, 2])) >= 0.85
