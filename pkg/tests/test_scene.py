import json
import math

import numpy as np
import pytest

from medialkit.core.errors import OffPrimitive, ParseError, ValidationError
from medialkit.core.numeric import default_tolerances
from medialkit.schemas.scene import SegmentSpec
from medialkit.services.primitives import ArcPrimitive, LinePrimitive, build_primitive
from medialkit.services.scene import parse_scene, primitive_nearest, primitive_normals


def _doc(*primitives, dim=2, name="test"):
    return json.dumps({"name": name, "dim": dim, "primitives": list(primitives)})


def test_circle_scene(scene):
    s = scene("circle")
    assert s.dim == 2
    assert len(s.primitives) == 1
    assert isinstance(s.primitives[0], ArcPrimitive)


def test_wristwatch_has_six_primitives(scene):
    assert len(scene("wristwatch").primitives) == 6


def test_negative_radius_is_invalid():
    with pytest.raises(ValidationError):
        parse_scene(_doc({"kind": "arc", "center": [0, 0], "radius": -1}))


def test_unknown_kind_is_a_parse_error():
    with pytest.raises(ParseError):
        parse_scene(_doc({"kind": "torus", "center": [0, 0]}))


def test_malformed_json_is_a_parse_error():
    with pytest.raises(ParseError):
        parse_scene("{not json")


def test_coordinate_count_must_match_dimension():
    with pytest.raises(ValidationError):
        parse_scene(_doc({"kind": "point_set", "points": [[0, 0, 0]]}))


def test_surface_needs_3d():
    with pytest.raises(ValidationError):
        parse_scene(_doc({"kind": "sphere_patch", "center": [0, 0], "radius": 1}))


def test_segment_foot_of_perpendicular(tol):
    seg = build_primitive(SegmentSpec(kind="segment", start=[-1, 0], end=[1, 0]), 2)
    d, reps = primitive_nearest(seg, (0, 1), tol)
    assert d == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(reps, [[0.0, 0.0]])


def test_circle_center_is_a_continuum(scene, tol):
    d, reps = primitive_nearest(scene("circle").primitives[0], (0, 0), tol)
    assert d == pytest.approx(1.0)
    assert len(reps) >= 8
    assert np.allclose(np.linalg.norm(np.array(reps), axis=1), 1.0)


def test_chazal_trimmed_sphere_projection(scene, tol):
    sphere = scene("chazal").primitives[0]
    d, reps = primitive_nearest(sphere, (0, 0, 1), tol)
    assert d == pytest.approx(1.0, abs=1e-6)
    assert min(np.linalg.norm(np.array(reps), axis=1)) <= 1e-3


def test_primitive_distance_matches_closed_form(scene, tol):
    arc = scene("wristwatch").primitives[0]
    ends = 2.0 * np.array([[math.cos(math.pi / 3), math.sin(math.pi / 3)],
                           [math.cos(-math.pi / 3), math.sin(-math.pi / 3)]])
    rng = np.random.default_rng(1)
    for x in rng.uniform(-3, 3, size=(20, 2)):
        if abs(math.atan2(x[1], x[0])) <= math.pi / 3:
            exact = abs(float(np.linalg.norm(x)) - 2.0)
        else:
            exact = float(np.min(np.linalg.norm(ends - x, axis=1)))
        assert arc.distance(x, tol) == pytest.approx(exact, abs=1e-9)


def test_circle_normals(scene, tol):
    normals = np.array(primitive_normals(scene("circle").primitives[0], (1, 0), tol))
    assert len(normals) == 2
    assert np.allclose(sorted(normals[:, 0]), [-1.0, 1.0], atol=1e-12)


def test_line_normals_in_3d(tol):
    axis = LinePrimitive([0, 0, 0], [0, 0, 1], 3)
    normals = np.array(primitive_normals(axis, (0, 0, 0), tol))
    assert len(normals) >= 16
    assert np.allclose(normals[:, 2], 0.0)
    assert np.allclose(np.linalg.norm(normals, axis=1), 1.0)


def test_segment_endpoint_normal_cone(tol):
    seg = build_primitive(SegmentSpec(kind="segment", start=[-1, 0], end=[0, 0]), 2)
    normals = np.array(primitive_normals(seg, (0, 0), tol))
    for expected in ((1, 0), (0, 1), (0, -1)):
        assert np.min(np.linalg.norm(normals - expected, axis=1)) <= 1e-9


def test_normals_off_primitive(scene, tol):
    with pytest.raises(OffPrimitive):
        primitive_normals(scene("circle").primitives[0], (0.5, 0), default_tolerances())


# ✅ === Normal-cone gaps ===
def _u(*c):
    v = np.asarray(c, dtype=float)
    return v / np.linalg.norm(v)


@pytest.mark.parametrize(
    "a, v, gap",
    [
        ((0, 0), (1, 0), 0.0),
        ((0, 0), (0, -1), 0.0),
        ((0, 0), (-1, 0), math.sqrt(2)),
        ((0, 0), (-1, 1), 2 * math.sin(math.pi / 8)),
        ((-0.5, 0), (1, 0), math.sqrt(2)),
        ((-0.5, 0), (0, 1), 0.0),
    ],
)
def test_segment_normal_gap(tol, a, v, gap):
    seg = build_primitive(SegmentSpec(kind="segment", start=[-1, 0], end=[0, 0]), 2)
    assert seg.normal_gap(np.asarray(a, dtype=float), _u(*v), tol) == pytest.approx(gap, abs=1e-12)


def test_circle_normal_gap_is_the_chord_to_the_normal_line(scene, tol):
    s = scene("circle")
    a = np.array([1.0, 0.0])
    assert s.normal_gap(a, _u(-1, 0), tol) == pytest.approx(0.0, abs=1e-12)
    assert s.normal_gap(a, _u(-1, 0.01), tol) == pytest.approx(2 * math.sin(math.atan(0.01) / 2), abs=1e-9)


def test_plane_patch_normal_gap_at_an_edge(tol):
    doc = _doc({"kind": "plane_patch", "point": [0, 0, 0], "normal": [0, 0, 1], "reference": [1, 0, 0],
                "polygon": [[-1, -1], [1, -1], [1, 1], [-1, 1]]}, dim=3)
    s = parse_scene(doc)
    inside, edge = np.zeros(3), np.array([1.0, 0.0, 0.0])
    assert s.normal_gap(inside, _u(0, 0, -1), tol) == pytest.approx(0.0, abs=1e-12)
    assert s.normal_gap(inside, _u(1, 0, 0), tol) == pytest.approx(math.sqrt(2))
    assert s.normal_gap(edge, _u(1, 0, 1), tol) == pytest.approx(0.0, abs=1e-12)
    assert s.normal_gap(edge, _u(-1, 0, 0), tol) == pytest.approx(math.sqrt(2))
    assert s.normal_gap(edge, _u(0, 1, 0), tol) == pytest.approx(math.sqrt(2))


def test_normal_gap_off_the_set_is_infinite(scene, tol):
    assert scene("circle").normal_gap(np.array([0.5, 0.0]), _u(1, 0), tol) == math.inf


def test_gather_keeps_candidates_within_the_cluster_window(scene, tol):
    gathered = scene("two_points").gather(np.array([2e-6, 0.0]), tol)
    assert gathered.distance == pytest.approx(1.0 - 2e-6, abs=1e-12)
    assert len(gathered.points) == 2
