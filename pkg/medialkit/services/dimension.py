"""
Local dimension of sampled sets (multi-scale PCA) and the dimension
identities linking dim_a M_X with dim m(a).
"""
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.spatial import cKDTree

from medialkit.core.errors import EmptyCloud, OnX, TooFewSamples, ValidationError
from medialkit.core.logging.run_logger import get_run_logger
from medialkit.core.numeric import Tolerances, Vec, as_vec, spread_indices
from medialkit.schemas.report import CheckReport
from medialkit.services.medial import MedialCloud
from medialkit.services.nearest import nearest_set
from medialkit.services.scene import SceneView


logger = get_run_logger("dimension")

EIGEN_RATIO = 0.01
ISOLATED_BELOW = 3
MIN_LARGEST = 8
CONTINUUM_REPS = 96
MAX_ANCHORS = 12


@dataclass(frozen=True, eq=False)
class DimensionEstimate:
    anchor: Vec
    scales: list[float]
    spectra: list[list[float]] = field(default_factory=list)
    dim: int = 0
    stable: bool = True


def _pca_dim(pts: NDArray, radius: float) -> tuple[int, list[float]]:
    centered = pts - pts.mean(axis=0)
    eig = np.linalg.eigvalsh(centered.T @ centered / len(pts))[::-1]
    eig = np.clip(eig, 0.0, None)
    top = float(eig[0])
    # a cloud collapsed to a point at this scale
    if np.sqrt(top) < EIGEN_RATIO * radius:
        return 0, eig.tolist()
    return int(np.sum(eig >= EIGEN_RATIO * top)), eig.tolist()


# ✅ === Estimator ===
def local_dim(points, a, scales: list[float], tol: Tolerances) -> DimensionEstimate:
    pts = np.asarray(points, dtype=float).reshape(-1, np.asarray(a).size)
    a = as_vec(a, pts.shape[1])
    scales = sorted((float(r) for r in scales), reverse=True)
    if not scales or scales[-1] <= 0:
        raise ValidationError("scales must be positive")

    tree = cKDTree(pts) if len(pts) else None

    def ball(r: float) -> NDArray:
        if tree is None:
            return pts[:0]
        return pts[tree.query_ball_point(a, r)]

    # 1️⃣ Isolated point
    if len(ball(scales[-1])) < ISOLATED_BELOW:
        return DimensionEstimate(anchor=a, scales=scales, spectra=[], dim=0, stable=True)

    # 2️⃣ Enough samples at the coarsest scale
    coarse = ball(scales[0])
    if len(coarse) < MIN_LARGEST:
        raise TooFewSamples(f"{len(coarse)} samples within {scales[0]:g}", point=a)

    # 3️⃣ PCA per scale
    dims, spectra = [], []
    for r in scales:
        inside = ball(r)
        if len(inside) < ISOLATED_BELOW:
            dims.append(0)
            spectra.append([])
            continue
        k, eig = _pca_dim(inside, r)
        dims.append(k)
        spectra.append(eig)

    stable = len(dims) < 2 or dims[-1] == dims[-2]
    return DimensionEstimate(anchor=a, scales=scales, spectra=spectra, dim=dims[-1], stable=stable)


def medial_dim_at(cloud: MedialCloud, a, scales: list[float], tol: Tolerances) -> DimensionEstimate:
    """
    dim_a of the sampled medial axis. A full-rank answer means several walls
    meet near a: each wall (same nearest primitives) is measured on its own
    and the largest wall dimension wins.
    """
    est = local_dim(cloud.points, a, scales, tol)
    if est.dim < cloud.region.dim:
        return est

    walls: dict[frozenset, list[Vec]] = {}
    for m in cloud.samples:
        walls.setdefault(m.labels, []).append(m.point)
    best = None
    for pts in walls.values():
        try:
            wall = local_dim(np.array(pts), a, scales, tol)
        except TooFewSamples:
            continue
        if best is None or wall.dim > best.dim:
            best = wall
    return best or est


# ✅ === Dimension of m(a) ===
def dim_m(s: SceneView, a, tol: Tolerances) -> DimensionEstimate:
    a = as_vec(a, s.dim)
    ns = nearest_set(s, a, tol, min_reps=CONTINUUM_REPS)
    if ns.distance <= tol.eps_dist:
        raise OnX("m(a) is only meaningful off X", point=a)
    if not ns.continuum:
        return DimensionEstimate(anchor=a, scales=[], dim=0)

    # 1️⃣ Resampled continuum: every gathered member, spacing from the nearest neighbours
    pts = s.gather(a, tol, CONTINUUM_REPS).points
    spacing = float(np.median(cKDTree(pts).query(pts, k=2)[0][:, 1]))
    scales = [6 * spacing, 3 * spacing]

    # 2️⃣ Largest local dimension over a spread of anchors on m(a)
    best = None
    for i in spread_indices(len(pts), 8):
        try:
            est = local_dim(pts, pts[i], scales, tol)
        except TooFewSamples:
            continue
        if best is None or est.dim > best.dim:
            best = est
    if best is None:
        raise TooFewSamples("continuum nearest set too sparse for a dimension estimate", point=a)
    return DimensionEstimate(anchor=a, scales=best.scales, spectra=best.spectra, dim=best.dim, stable=best.stable)


def _default_scales(cloud: MedialCloud) -> list[float]:
    return [6 * cloud.step, 3 * cloud.step]


def _k_min(s: SceneView, samples, tol: Tolerances) -> int:
    """min dim m over medial samples; finite nearest sets count as 0."""
    if any(not m.continuum for m in samples):
        return 0
    picked = [samples[i] for i in spread_indices(len(samples), MAX_ANCHORS)]
    return min(dim_m(s, m.point, tol).dim for m in picked)


# ✅ === Dimension identities ===
def verify_dim_formula(
    s: SceneView,
    cloud: MedialCloud,
    a,
    neighborhood: float,
    tol: Tolerances,
    scales: list[float] | None = None,
) -> CheckReport:
    a = as_vec(a, s.dim)
    n = s.dim
    scales = list(scales) if scales else _default_scales(cloud)

    dim_a = medial_dim_at(cloud, a, scales, tol).dim
    dim_here = dim_m(s, a, tol).dim
    near = cloud.within(a, neighborhood)
    k_min = _k_min(s, near, tol) if near else dim_here

    pointwise = dim_a + dim_here
    violations = []
    if dim_a + k_min != n - 1:
        violations.append({"dim_a": dim_a, "k_min": k_min, "expected": n - 1})
    if k_min > dim_here:
        violations.append({"k_min": k_min, "dim_m_at_anchor": dim_here})

    logger.debug(
        "dimension identity evaluated",
        extra={"event": "dim_formula", "dim_a": dim_a, "k_min": k_min, "pointwise": pointwise},
    )
    return CheckReport(
        name="dimension_formula", checked=1, violations=violations,
        details={
            "anchor": a, "neighborhood": neighborhood, "scales": scales,
            "dim_a": dim_a, "dim_m": dim_here, "k_min": k_min, "samples_nearby": len(near),
            "pointwise_sum": pointwise, "generic": pointwise == n - 1,
        },
    )


def global_dim(s: SceneView, cloud: MedialCloud, tol: Tolerances, scales: list[float] | None = None) -> CheckReport:
    if not cloud.samples:
        raise EmptyCloud(f"no medial samples for {cloud.scene}")
    scales = list(scales) if scales else _default_scales(cloud)
    n = s.dim

    pts = cloud.points
    interior = np.flatnonzero(cloud.region.contains(pts, pad=-max(scales)))
    pool = interior if len(interior) else np.arange(len(pts))
    anchors = pool[spread_indices(len(pool), MAX_ANCHORS)]

    dims = []
    for i in anchors:
        try:
            dims.append(medial_dim_at(cloud, pts[i], scales, tol).dim)
        except TooFewSamples:
            continue
    if not dims:
        raise TooFewSamples("no anchor of the cloud has enough neighbours")
    top = max(dims)
    k_min = _k_min(s, list(cloud.samples), tol)

    violations = [] if top == n - 1 - k_min else [{"dim_M": top, "expected": n - 1 - k_min}]
    return CheckReport(
        name="global_dimension", checked=len(dims), violations=violations,
        details={"dim_M": top, "min_dim_m": k_min, "anchors": len(dims), "ambient": n},
    )
