"""
Tangent cones of the medial axis and medial axes of subsets of a sphere.

The medial axis of Y = m(a) ⊂ S(a, d(a)) is a cone, so it is classified by
unit directions: u is medial when the point a + λ·d(a)·u has two nearest
pieces of Y at separation >= sep_tol (λ = 1 unless stated).
"""
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.spatial import cKDTree

from medialkit.core.errors import OnX, TooFewSamples, ValidationError
from medialkit.core.logging.run_logger import get_run_logger
from medialkit.core.numeric import (
    Tolerances,
    Vec,
    as_vec,
    circle_directions,
    latlong_grid,
    normal_circle,
)
from medialkit.schemas.report import CheckReport
from medialkit.services.helpers.clustering import ClusterHelper
from medialkit.services.medial import MedialCloud
from medialkit.services.nearest import NearestSet, nearest_set
from medialkit.services.primitives import Primitive
from medialkit.services.scene import Scene, SceneView


logger = get_run_logger("cone")

MATCH_ANGLE = 0.1
GRID_2D = 360
GRID_STEP_3D = math.radians(5.0)
CLOSURE_RINGS = (0.1, 0.05, 0.02)
CLOSURE_RING_POINTS = 24


@dataclass(frozen=True, eq=False)
class SphericalCloud:
    anchor: Vec
    directions: NDArray
    scale_tags: list[list[float]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.directions)


@dataclass(frozen=True, eq=False)
class ConeComparison:
    anchor: Vec
    hausdorff_included: float
    hausdorff_equal: float
    plane_case: bool
    diam_condition_holds: bool
    sphere_medial: SphericalCloud
    tangent_cone: SphericalCloud


# ✅ === Tangent cone of a sampled medial axis ===
def tangent_cone_directions(cloud: MedialCloud, a, scales: list[float], tol: Tolerances) -> SphericalCloud:
    a = as_vec(a, cloud.region.dim)
    scales = [float(r) for r in scales]
    if not scales or any(r0 <= r1 for r0, r1 in zip(scales, scales[1:])):
        raise ValidationError("scales must be strictly decreasing")
    if any(r <= 2 * cloud.step for r in scales):
        raise ValidationError(f"every scale must exceed twice the scan step ({2 * cloud.step:g})")

    rel = cloud.points - a
    dist = np.linalg.norm(rel, axis=1)

    # 1️⃣ Secant directions per annulus [r/2, r]
    per_scale = []
    for r in scales:
        inside = (dist >= 0.5 * r) & (dist <= r)
        if int(inside.sum()) < 3:
            raise TooFewSamples(f"annulus of scale {r:g} holds {int(inside.sum())} medial samples", point=a)
        per_scale.append(rel[inside] / dist[inside][:, None])

    # 2️⃣ Keep the finest-scale directions seen at every scale
    chord = 2.0 * math.sin(MATCH_ANGLE / 2.0)
    trees = [cKDTree(d) for d in per_scale]
    candidates = per_scale[-1]
    stable = np.ones(len(candidates), dtype=bool)
    for tree in trees[:-1]:
        dd, _ = tree.query(candidates, distance_upper_bound=chord)
        stable &= np.isfinite(dd)

    directions = candidates[stable]
    return SphericalCloud(anchor=a, directions=directions, scale_tags=[list(scales) for _ in directions])


# ✅ === Medial axis of Y = m(a) ===
@dataclass(frozen=True, eq=False)
class _SphereSubset:
    """m(a) split into whole continuum pieces and finite representatives."""
    anchor: Vec
    radius: float
    pieces: tuple[Primitive, ...]
    points: NDArray


def _sphere_subset(s: SceneView, ns: NearestSet, tol: Tolerances) -> _SphereSubset:
    g = s.gather(ns.query, tol)
    pieces: tuple[Primitive, ...] = ()
    finite = ns.representatives
    if g.continuum_labels and isinstance(s, Scene):
        pieces = tuple(s.primitives[i] for i in g.continuum_labels)
        finite = g.points[~np.isin(g.labels, g.continuum_labels)]
        # ends of other pieces that already lie on a continuum piece
        for p in pieces:
            if len(finite):
                d, _ = p.project_many(finite, tol)
                finite = finite[d > tol.eps_cluster]
    return _SphereSubset(anchor=ns.query, radius=ns.distance, pieces=pieces,
                         points=finite.reshape(-1, s.dim))


def direction_grid(dim: int) -> tuple[NDArray, float]:
    if dim == 2:
        return circle_directions(GRID_2D), 2 * math.pi / GRID_2D
    return latlong_grid(GRID_STEP_3D), GRID_STEP_3D


def _gaps(y: _SphereSubset, dirs: NDArray, lam: float, tol: Tolerances) -> NDArray:
    """
    Per direction: the angle by which the best well-separated second
    candidate trails the best one. Angles come from
    q = (|λu − ŷ|² − λ² − 1) / 2λ, which is −cos θ for ŷ on the unit sphere.
    """
    d = y.radius
    probes = y.anchor + lam * d * dirs
    cand_q, cand_pts = [], []

    for p in y.pieces:
        delta, feet = p.project_many(probes, tol)
        cand_q.append((delta ** 2 / d ** 2 - lam ** 2 - 1.0) / (2.0 * lam))
        cand_pts.append(feet)
    for yp in y.points:
        delta = np.linalg.norm(probes - yp, axis=1)
        cand_q.append((delta ** 2 / d ** 2 - lam ** 2 - 1.0) / (2.0 * lam))
        cand_pts.append(np.broadcast_to(yp, probes.shape))

    if len(cand_q) < 2:
        return np.full(len(dirs), np.inf)
    theta = np.arccos(np.clip(-np.column_stack(cand_q), -1.0, 1.0))   # (m, k)
    pts = np.stack(cand_pts, axis=1)                                   # (m, k, n)
    best = np.argmin(theta, axis=1)
    rows = np.arange(len(dirs))
    sep = np.linalg.norm(pts - pts[rows, best][:, None, :], axis=2)
    rival = np.where(sep >= tol.sep_tol, theta, np.inf).min(axis=1)
    return rival - theta[rows, best]


def _subset_for(s: SceneView, a: Vec, tol: Tolerances) -> tuple[NearestSet, _SphereSubset]:
    ns = nearest_set(s, a, tol)
    if ns.distance <= tol.eps_dist:
        raise OnX("sphere medial axis needs a point off X", point=a)
    return ns, _sphere_subset(s, ns, tol)


def sphere_medial(s: SceneView, a, tol: Tolerances) -> SphericalCloud:
    a = as_vec(a, s.dim)
    ns, y = _subset_for(s, a, tol)
    empty = SphericalCloud(anchor=a, directions=np.empty((0, s.dim)))

    # Singleton m(a): M_{m(a)} is empty by convention
    if ns.multiplicity == 1 and not ns.continuum:
        return empty

    dirs, step = direction_grid(s.dim)
    medial = _gaps(y, dirs, 1.0, tol) <= 0.5 * step
    logger.debug("sphere medial classified", extra={"event": "sphere_medial", "directions": int(medial.sum())})
    return SphericalCloud(anchor=a, directions=dirs[medial])


def sphere_medial_closure(s: SceneView, a, u, tol: Tolerances, band: float = 1e-6) -> bool:
    """
    u lies in the closure of the sphere medial axis when every ring of
    directions around u (angular radii 0.1, 0.05, 0.02) holds a medial one.
    """
    a = as_vec(a, s.dim)
    u = as_vec(u, s.dim)
    u = u / np.linalg.norm(u)
    _, y = _subset_for(s, a, tol)

    for rho in CLOSURE_RINGS:
        if s.dim == 2:
            perp = np.array([-u[1], u[0]])
            ring = np.array([math.cos(rho) * u + math.sin(rho) * perp, math.cos(rho) * u - math.sin(rho) * perp])
        else:
            ring = math.cos(rho) * u + math.sin(rho) * normal_circle(u, CLOSURE_RING_POINTS)
        if not (_gaps(y, ring, 1.0, tol) <= band).any():
            return False
    return True


def cone_property_check(s: SceneView, a, tol: Tolerances, lambdas: tuple[float, ...] = (0.5, 2.0)) -> CheckReport:
    """Classification of λu matches that of u on the whole direction grid."""
    a = as_vec(a, s.dim)
    _, y = _subset_for(s, a, tol)
    dirs, step = direction_grid(s.dim)
    band = 0.5 * step
    unit_gap = _gaps(y, dirs, 1.0, tol)

    violations = []
    for lam in lambdas:
        gap = _gaps(y, dirs, lam, tol)
        differs = (gap <= band) != (unit_gap <= band)
        # ties sitting on the band edge are rounding, not a classification change
        differs &= np.minimum(np.abs(gap - band), np.abs(unit_gap - band)) > 1e-9
        for i in np.flatnonzero(differs)[:10]:
            violations.append({"lambda": lam, "direction": dirs[i]})
    return CheckReport(name="sphere_medial_cone", checked=len(dirs) * len(lambdas), violations=violations,
                       details={"medial_directions": int((unit_gap <= band).sum())})


# ✅ === Comparison ===
def compare_cone(
    s: SceneView,
    cloud: MedialCloud,
    a,
    tol: Tolerances,
    scales: list[float] | None = None,
) -> ConeComparison:
    a = as_vec(a, s.dim)
    scales = list(scales) if scales else [16 * cloud.step, 8 * cloud.step, 4 * cloud.step]

    sm = sphere_medial(s, a, tol)
    try:
        tc = tangent_cone_directions(cloud, a, scales, tol)
    except TooFewSamples:
        # isolated medial point: both sides are empty
        if len(sm):
            raise
        tc = SphericalCloud(anchor=a, directions=np.empty((0, s.dim)))

    included = ClusterHelper.directed_angle(sm.directions, tc.directions)
    equal = ClusterHelper.angle_hausdorff(sm.directions, tc.directions)
    near = cloud.within(a, min(scales))
    return ConeComparison(
        anchor=a,
        hausdorff_included=included,
        hausdorff_equal=max(equal, included),
        plane_case=s.dim == 2,
        diam_condition_holds=bool(near) and all(m.diameter >= tol.sep_tol for m in near),
        sphere_medial=sm,
        tangent_cone=tc,
    )


