import math

import numpy as np
import pytest

from medialkit.core.errors import DirectionNotLimiting, NotNormal, NotOnX, OnMedial, OnX, RadiusTooSmall, ValidationError
from medialkit.core.numeric import is_unbounded
from medialkit.services.reach import (
    DEFAULT_ETAS,
    bd_radius,
    denkowski_equality_check,
    directional_radius,
    frontier_classify,
    frontier_sandwich,
    interval_probe,
    limiting_directional_radius,
    offset_radius_check,
    radius_continuity_probe,
    radius_report,
    reaching_radius,
    rho_semicontinuity_probe,
    weak_radius,
)
from medialkit.services.suites import FINE_ETAS


# ✅ === Directional radius ===
def test_inward_radius_of_the_circle(scene, tol):
    assert directional_radius(scene("circle"), (1, 0), (-1, 0), tol) == pytest.approx(1.0, abs=1e-6)


def test_outward_radius_is_unbounded(scene, tol):
    assert is_unbounded(directional_radius(scene("circle"), (1, 0), (1, 0), tol), tol)


def test_bisector_radius(scene, tol):
    assert directional_radius(scene("two_points"), (1, 0), (-1, 0), tol) == pytest.approx(1.0, abs=1e-6)


def test_direction_must_be_normal(scene, tol):
    with pytest.raises(NotNormal):
        directional_radius(scene("circle"), (1, 0), (0, 1), tol)


def test_near_tangent_direction_is_not_normal(scene, tol):
    v = np.array([-1.0, 0.01]) / math.hypot(1.0, 0.01)
    with pytest.raises(NotNormal):
        directional_radius(scene("circle"), (1, 0), v, tol)


def test_reaching_radius_ignores_near_tangent_candidates(scene, tol):
    assert reaching_radius(scene("circle"), (1, 0), tol) == pytest.approx(1.0, abs=1e-3)


def test_base_must_be_on_x(scene, tol):
    with pytest.raises(NotOnX):
        directional_radius(scene("circle"), (0.5, 0), (1, 0), tol)


def test_interval_property(scene, tol):
    assert interval_probe(scene("circle"), (1, 0), (-1, 0), tol).passed
    assert interval_probe(scene("parabola"), (0, 0), (0, 1), tol).passed


# ✅ === Limiting radius ===
def test_limiting_radius_on_the_circle(scene, tol):
    lim = limiting_directional_radius(scene("circle"), (1, 0), (-1, 0), DEFAULT_ETAS, tol)
    assert len(lim.values) == 3
    assert all(v == pytest.approx(1.0, abs=1e-4) for v in lim.values)
    assert lim.stabilized


def test_limiting_radius_unbounded_along_the_bisector(scene, tol):
    lim = limiting_directional_radius(scene("two_points"), (1, 0), (0, 1), (0.2, 0.1), tol)
    assert all(is_unbounded(v, tol) for v in lim.values)


def test_direction_not_limiting(scene, tol):
    with pytest.raises(DirectionNotLimiting):
        limiting_directional_radius(scene("circle"), (1, 0), (0, 1), DEFAULT_ETAS, tol)


def test_eta_schedule_must_decrease(scene, tol):
    with pytest.raises(ValidationError):
        limiting_directional_radius(scene("circle"), (1, 0), (-1, 0), (0.1, 0.2), tol)


# ✅ === Weak, reaching and liminf-of-weak radii ===
@pytest.mark.parametrize("name, a, expected", [("circle", (1, 0), 1.0), ("two_points", (1, 0), 1.0), ("parabola", (0, 0), 0.5)])
def test_weak_radius(scene, tol, name, a, expected):
    assert weak_radius(scene(name), a, tol) == pytest.approx(expected, abs=1e-3)


def test_circle_radii_agree(scene, tol):
    s = scene("circle")
    assert reaching_radius(s, (1, 0), tol) == pytest.approx(1.0, abs=1e-4)
    assert bd_radius(s, (1, 0), DEFAULT_ETAS, tol) == pytest.approx(1.0, abs=1e-4)
    assert denkowski_equality_check(s, (1, 0), tol).passed


@pytest.mark.slow
def test_parabola_vertex_radii(scene, tol):
    s = scene("parabola")
    assert reaching_radius(s, (0, 0), tol) == pytest.approx(0.5, abs=1e-3)
    assert bd_radius(s, (0, 0), DEFAULT_ETAS, tol) == pytest.approx(0.5, abs=1e-2)


def test_radius_report(scene, tol):
    rr = radius_report(scene("circle"), (1, 0), tol, v=(-1, 0))
    assert rr.r_v == pytest.approx(1.0, abs=1e-6)
    assert rr.r_tilde_v.liminf == pytest.approx(1.0, abs=1e-4)
    assert rr.r_weak == pytest.approx(1.0, abs=1e-6)
    assert rr.diagnostics["fan_size"] == 2


# ✅ === Chazal example ===
@pytest.mark.slow
def test_chazal_limiting_radius(scene, tol):
    lim = limiting_directional_radius(scene("chazal"), (0, 0, 0), (0, 0, 1), DEFAULT_ETAS, tol)
    assert lim.liminf == pytest.approx(1.0, abs=5e-2)


@pytest.mark.slow
def test_chazal_reaching_radius_equals_bd(scene, tol):
    s = scene("chazal")
    assert reaching_radius(s, (0, 0, 0), tol) <= 1.0 + 5e-2
    assert bd_radius(s, (0, 0, 0), DEFAULT_ETAS, tol) <= 1.0 + 5e-2
    assert denkowski_equality_check(s, (0, 0, 0), tol).passed


@pytest.mark.slow
@pytest.mark.parametrize("t, verdict", [(1.5, "in_closure"), (0.5, "not_in_closure")])
def test_chazal_frontier(scene, tol, t, verdict):
    fv = frontier_classify(scene("chazal"), (0, 0, t), tol)
    assert fv.verdict == verdict
    assert fv.d_x == pytest.approx(t)


@pytest.mark.slow
def test_chazal_frontier_sandwich(scene, tol):
    assert frontier_sandwich(scene("chazal"), (0, 0, 0), (0, 0, 1), tol).passed


def test_circle_frontier(scene, tol):
    fv = frontier_classify(scene("circle"), (0.5, 0), tol)
    assert fv.verdict == "not_in_closure"
    assert fv.r_tilde == pytest.approx(1.0, abs=1e-4)
    assert np.allclose(fv.nearest, [1.0, 0.0])


def test_frontier_rejects_medial_points(scene, tol):
    with pytest.raises(OnMedial):
        frontier_classify(scene("two_points"), (0, 0.5), tol)
    with pytest.raises(OnX):
        frontier_classify(scene("circle"), (1, 0), tol)


# ✅ === Offsets and continuity ===
@pytest.mark.parametrize("name, a, v, eps", [("circle", (1, 0), (-1, 0), 0.25), ("two_points", (1, 0), (-1, 0), 0.3)])
def test_offset_radius(scene, tol, name, a, v, eps):
    probe = offset_radius_check(scene(name), a, v, eps, tol)
    assert probe.passed, probe.violations


def test_offset_radius_too_small(scene, tol):
    with pytest.raises(RadiusTooSmall):
        offset_radius_check(scene("circle"), (1, 0), (-1, 0), 1.5, tol)


def test_weak_radius_is_continuous_on_the_circle(scene, tol):
    probe = radius_continuity_probe(scene("circle"), (1, 0), DEFAULT_ETAS, tol)
    assert probe.passed


def test_wristwatch_arc_continuity(scene, tol):
    a = (math.sqrt(3), 1)
    assert radius_continuity_probe(scene("wristwatch"), a, DEFAULT_ETAS, tol).passed


@pytest.mark.slow
def test_wristwatch_continuity_where_the_outward_radius_is_steep(scene, tol):
    probe = radius_continuity_probe(scene("wristwatch"), (1.2, 1.6), FINE_ETAS, tol)
    assert probe.passed, probe.details["oscillations"]


@pytest.mark.parametrize("name, a", [("circle", (1, 0)), ("two_points", (1, 0))])
def test_rho_is_upper_semicontinuous(scene, tol, name, a):
    assert rho_semicontinuity_probe(scene(name), a, tol).passed
