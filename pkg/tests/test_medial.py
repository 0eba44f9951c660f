import numpy as np
import pytest

from medialkit.core.errors import EmptyRegion, NoCrossing, ProbeOnX
from medialkit.schemas.region import make_region
from medialkit.services.medial import gamma_checks, offset_medial_check, offset_view, refine_crossing, scan_medial
from medialkit.services.nearest import nearest_set


def test_empty_box_is_rejected():
    with pytest.raises(EmptyRegion):
        make_region([0, 0, 0, 1], 0.1)


def test_two_points_bisector_scan(scene, tol):
    s = scene("two_points")
    cloud = scan_medial(s, make_region([-2, -2, 2, 2], 0.05), tol)
    pts = cloud.points
    assert len(pts) > 20
    assert np.all(np.abs(pts[:, 0]) <= 0.05)
    # no medial sample sits on X
    d, _ = s.project_many(pts, tol)
    assert np.all(d > tol.eps_dist)


def test_circle_scan_finds_only_the_center(scene, tol):
    cloud = scan_medial(scene("circle"), make_region([-0.5, -0.5, 0.5, 0.5], 0.05), tol)
    assert len(cloud.samples) >= 1
    assert np.all(np.linalg.norm(cloud.points, axis=1) <= 0.08)


@pytest.mark.slow
def test_parabola_scan_follows_the_axis(scene, tol):
    cloud = scan_medial(scene("parabola"), make_region([-1, 0, 1, 2], 0.02), tol)
    pts = cloud.points
    assert len(pts) > 10
    assert np.all(np.abs(pts[:, 0]) <= 0.03)
    assert np.all(pts[:, 1] >= 0.5 - 0.03)


@pytest.mark.slow
def test_scan_is_stable_under_step_halving(scene, tol):
    s = scene("two_points")
    coarse = scan_medial(s, make_region([-1, -1, 1, 1], 0.1), tol).points
    fine = scan_medial(s, make_region([-1, -1, 1, 1], 0.05), tol).points
    gaps = np.min(np.linalg.norm(coarse[:, None, :] - fine[None, :, :], axis=2), axis=1)
    assert np.all(gaps <= 0.1 * np.sqrt(2))


def test_refine_crossing(scene, tol):
    p = refine_crossing(scene("two_points"), (-0.3, 0), (0.4, 0), tol)
    assert np.allclose(p, [0.0, 0.0], atol=1e-7)

    q = refine_crossing(scene("parabola"), (-0.2, 1), (0.3, 1), tol)
    assert np.allclose(q, [0.0, 1.0], atol=1e-6)


def test_refine_crossing_stops_on_an_equidistant_midpoint(scene, tol):
    p = refine_crossing(scene("two_points"), (-0.5, 0), (0.5, 0), tol)
    assert np.allclose(p, [0.0, 0.0], atol=1e-12)


def test_no_crossing(scene, tol):
    with pytest.raises(NoCrossing):
        refine_crossing(scene("circle"), (0.5, 0), (0.9, 0), tol)


def test_offset_view(scene, tol):
    view = offset_view(scene("circle"), 0.25)
    assert view.distance(np.array([3.0, 0.0]), tol) == pytest.approx(1.75)

    ns = nearest_set(view, (0, 0), tol)
    assert ns.continuum
    assert np.allclose(np.linalg.norm(ns.representatives, axis=1), 0.75)

    pair = nearest_set(offset_view(scene("two_points"), 0.5), (0, 0), tol)
    assert pair.multiplicity == 2
    assert sorted(pair.representatives[:, 0]) == pytest.approx([-0.5, 0.5])


@pytest.mark.parametrize(
    "name, eps, box, step",
    [
        ("two_points", 0.3, [-2, -2, 2, 2], 0.05),
        ("circle", 0.5, [-0.4, -0.4, 0.4, 0.4], 0.05),
    ],
)
def test_offset_medial_agreement(scene, tol, name, eps, box, step):
    probe = offset_medial_check(scene(name), eps, make_region(box, step), tol)
    assert probe.passed, probe.violations


def test_gamma_checks(scene, tol):
    assert gamma_checks(scene("two_points"), [(0, 0.5)], tol).passed
    assert gamma_checks(scene("circle"), [(0.5, 0), (0, 0)], tol).passed


def test_gamma_probe_on_x(scene, tol):
    with pytest.raises(ProbeOnX):
        gamma_checks(scene("circle"), [(1, 0)], tol)
