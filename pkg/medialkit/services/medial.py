"""
Medial axis sampling, virtual offsets X^ε and the distance-graph checks.

Membership is decided by separation: a point counts as medial when its
nearest set has two clusters at least sep_tol apart. Frontier points of the
medial axis (separation tending to zero) are left to the reach service.
"""
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.spatial import cKDTree

from medialkit.core.errors import NoCrossing, ProbeOnX, ValidationError
from medialkit.core.logging.run_logger import get_run_logger
from medialkit.core.numeric import MIN_REPS, Tolerances, Vec, as_vec, halton_ball, unit
from medialkit.schemas.region import Region
from medialkit.schemas.report import CheckReport
from medialkit.services.helpers.clustering import ClusterHelper
from medialkit.services.nearest import NearestSet, nearest_set
from medialkit.services.scene import Gathered, SceneView, finish_samples


logger = get_run_logger("medial")

CLOUD_LABEL = "sep_tol-medial approximation"
PROJECT_CHUNK = 50_000
BISECT_FRACTION = 1e-4
DEDUPE_FRACTION = 1e-3


@dataclass(frozen=True, eq=False)
class MedialSample:
    point: Vec
    distance: float
    multiplicity: int
    diameter: float
    refined: bool
    continuum: bool = False
    labels: frozenset[int] = frozenset()


@dataclass(frozen=True, eq=False)
class MedialCloud:
    scene: str
    region: Region
    step: float
    samples: tuple[MedialSample, ...]
    label: str = CLOUD_LABEL

    @property
    def points(self) -> NDArray:
        if not self.samples:
            return np.empty((0, self.region.dim))
        return np.array([m.point for m in self.samples])

    def within(self, a: Vec, radius: float) -> list[MedialSample]:
        if not self.samples:
            return []
        close = np.linalg.norm(self.points - a, axis=1) <= radius
        return [m for m, c in zip(self.samples, close) if c]


def _spread_between(n0: NearestSet, n1: NearestSet) -> float:
    """Largest distance between the clusters of two nearest sets (0 when they agree)."""
    return float(np.max(_cross(n0, n1)))


def _cross(n0: NearestSet, n1: NearestSet) -> NDArray:
    r0, r1 = n0.representatives, n1.representatives
    return np.linalg.norm(r0[:, None, :] - r1[None, :, :], axis=2)


def _project(s: SceneView, pts: NDArray, tol: Tolerances) -> tuple[NDArray, NDArray]:
    dist, feet = np.empty(len(pts)), np.empty_like(pts)
    for start in range(0, len(pts), PROJECT_CHUNK):
        chunk = slice(start, start + PROJECT_CHUNK)
        dist[chunk], feet[chunk] = s.project_many(pts[chunk], tol)
    return dist, feet


def _is_medial(ns: NearestSet, tol: Tolerances) -> bool:
    return ns.distance > tol.eps_dist and ns.multiplicity >= 2 and ns.diameter >= tol.sep_tol


def _dedupe(samples: list[MedialSample], radius: float) -> list[MedialSample]:
    if len(samples) < 2:
        return samples
    pts = np.array([m.point for m in samples])
    tree = cKDTree(pts)
    kept: list[int] = []
    kept_mask = np.zeros(len(samples), dtype=bool)
    for i, p in enumerate(pts):
        close = tree.query_ball_point(p, radius)
        if not any(kept_mask[j] for j in close if j != i):
            kept_mask[i] = True
            kept.append(i)
    return [samples[i] for i in kept]


# ✅ === Grid scan ===
def scan_medial(s: SceneView, r: Region, tol: Tolerances) -> MedialCloud:
    if r.dim != s.dim:
        raise ValidationError(f"region is {r.dim}D but scene {s.name} is {s.dim}D")
    n, step = s.dim, r.step

    # 1️⃣ Grid nodes and their (vectorized) feet
    axes = r.axes()
    shape = tuple(len(ax) for ax in axes)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    _, feet = _project(s, grid, tol)
    feet_g = feet.reshape(*shape, n)
    index = np.arange(len(grid)).reshape(shape)

    # 2️⃣ Grid edges whose feet jump
    jump_tol = max(2 * tol.sep_tol, 3 * step)
    lo_i, hi_i = [], []
    for k in range(n):
        first = [slice(None)] * n
        second = [slice(None)] * n
        first[k], second[k] = slice(0, -1), slice(1, None)
        first, second = tuple(first), tuple(second)
        jump = np.linalg.norm(feet_g[first] - feet_g[second], axis=-1) > jump_tol
        lo_i.append(index[first][jump])
        hi_i.append(index[second][jump])
    lo_i, hi_i = np.concatenate(lo_i), np.concatenate(hi_i)
    order = np.lexsort((hi_i, lo_i))
    lo_i, hi_i = lo_i[order], hi_i[order]

    # 3️⃣ Full nearest sets at the flagged nodes
    samples: list[MedialSample] = []
    for i in np.unique(np.concatenate([lo_i, hi_i])):
        ns = nearest_set(s, grid[i], tol)
        if _is_medial(ns, tol):
            samples.append(MedialSample(
                point=grid[i], distance=ns.distance, multiplicity=ns.multiplicity,
                diameter=ns.diameter, refined=False, continuum=ns.continuum, labels=ns.labels,
            ))

    # 4️⃣ Vectorized bisection of every flagged edge
    x0, x1 = grid[lo_i], grid[hi_i]
    f0, f1 = feet[lo_i], feet[hi_i]
    width = step * BISECT_FRACTION
    while len(x0) and np.max(np.linalg.norm(x1 - x0, axis=1)) > width:
        mid = 0.5 * (x0 + x1)
        _, fm = _project(s, mid, tol)
        left = np.linalg.norm(f0 - fm, axis=1) >= np.linalg.norm(fm - f1, axis=1)
        x1, f1 = np.where(left[:, None], mid, x1), np.where(left[:, None], fm, f1)
        x0, f0 = np.where(left[:, None], x0, mid), np.where(left[:, None], f0, fm)
    crossing = np.linalg.norm(f1 - f0, axis=1) > tol.sep_tol

    # 5️⃣ Exact confirmation of each crossing
    for a, b in zip(x0[crossing], x1[crossing]):
        ns_a, ns_b = nearest_set(s, a, tol), nearest_set(s, b, tol)
        sep = _spread_between(ns_a, ns_b)
        if sep <= tol.sep_tol:
            continue
        mid = 0.5 * (a + b)
        ns = nearest_set(s, mid, tol)
        if ns.distance <= tol.eps_dist:
            continue
        samples.append(MedialSample(
            point=mid, distance=ns.distance, multiplicity=max(2, ns.multiplicity),
            diameter=max(ns.diameter, sep), refined=True, continuum=ns.continuum,
            labels=ns.labels | ns_a.labels | ns_b.labels,
        ))

    samples = _dedupe(samples, step * DEDUPE_FRACTION)
    logger.info(
        "medial scan finished",
        extra={"event": "medial_scan", "nodes": len(grid), "flagged_edges": int(len(lo_i)),
               "samples": len(samples)},
    )
    return MedialCloud(scene=s.name, region=r, step=step, samples=tuple(samples))


def refine_crossing(s: SceneView, x0, x1, tol: Tolerances, width: float = 1e-12) -> Vec:
    x0, x1 = as_vec(x0, s.dim), as_vec(x1, s.dim)
    n0, n1 = nearest_set(s, x0, tol), nearest_set(s, x1, tol)
    if _spread_between(n0, n1) <= tol.sep_tol:
        raise NoCrossing("nearest points agree at both ends of the segment", point=x0)

    # Sides are decided against the end feet, never against updated brackets
    ref0, ref1 = n0.representatives, n1.representatives
    lo, hi = x0, x1
    while float(np.linalg.norm(hi - lo)) > width:
        mid = 0.5 * (lo + hi)
        if np.array_equal(mid, lo) or np.array_equal(mid, hi):
            break
        d0, d1 = _side_distances(nearest_set(s, mid, tol), ref0, ref1)
        if abs(d0 - d1) <= 10 * tol.eps_dist:
            return mid
        if d0 < d1:
            lo = mid
        else:
            hi = mid

    p = 0.5 * (lo + hi)
    if _spread_between(nearest_set(s, lo, tol), nearest_set(s, hi, tol)) <= tol.sep_tol:
        raise NoCrossing("nearest points merge along the segment", point=p)
    return p


def _side_distances(nm: NearestSet, ref0: NDArray, ref1: NDArray) -> tuple[float, float]:
    """Distance from the query to its nearest clusters on the x0 side and on the x1 side (inf if absent)."""
    reps = nm.representatives
    to0 = np.min(np.linalg.norm(reps[:, None, :] - ref0[None, :, :], axis=2), axis=1)
    to1 = np.min(np.linalg.norm(reps[:, None, :] - ref1[None, :, :], axis=2), axis=1)
    dist = np.linalg.norm(reps - nm.query, axis=1)
    side0 = to0 <= to1
    return (float(dist[side0].min()) if side0.any() else np.inf,
            float(dist[~side0].min()) if (~side0).any() else np.inf)


# ✅ === Virtual offsets ===
class OffsetScene(SceneView):
    """X^ε seen through X: d_ε = max(d − ε, 0), nearest points by homothety."""

    def __init__(self, base: SceneView, eps: float):
        if eps <= 0:
            raise ValidationError("offset radius must be positive")
        self.base = base
        self.eps = float(eps)
        self.name = f"{base.name}^{eps:g}"
        self.dim = base.dim

    def distance(self, x, tol):
        return max(self.base.distance(x, tol) - self.eps, 0.0)

    def gather(self, x, tol, min_reps=MIN_REPS):
        g = self.base.gather(x, tol, min_reps)
        if g.distance <= self.eps:
            return Gathered(0.0, x[None, :], np.array([-1]), False)
        ratio = (g.distance - self.eps) / g.distance
        return Gathered(
            distance=g.distance - self.eps,
            points=x + ratio * (g.points - x),
            labels=g.labels,
            continuum=g.continuum,
            continuum_labels=g.continuum_labels,
        )

    def project_many(self, xs, tol):
        d, f = self.base.project_many(xs, tol)
        ratio = np.where(d > self.eps, (d - self.eps) / np.where(d > 0, d, 1.0), 0.0)
        return np.maximum(d - self.eps, 0.0), xs + ratio[:, None] * (f - xs)

    def raw_normals(self, a, tol):
        g = self.base.gather(a, tol)
        if g.distance < self.eps - tol.eps_dist:
            return np.empty((0, self.dim))
        return np.array([unit(a - y) for y in g.points])

    def sample_near(self, c, r, n, tol):
        pts = halton_ball(c, r, 8 * n, tol.seed)
        d, f = self.base.project_many(pts, tol)
        ok = d > 0
        pushed = f[ok] + self.eps * (pts[ok] - f[ok]) / d[ok][:, None]
        dq, _ = self.base.project_many(pushed, tol)
        pushed = pushed[(np.abs(dq - self.eps) <= 1e-9) & (np.linalg.norm(pushed - c, axis=1) <= r)]
        return finish_samples(pushed, c, n, tol)

    def smooth_at(self, a, tol):
        g = self.base.gather(a, tol)
        return len(g.points) == 1 and self.base.smooth_at(g.points[0], tol)


def offset_view(s: SceneView, eps: float) -> OffsetScene:
    return OffsetScene(s, eps)


def offset_medial_check(s: SceneView, eps: float, r: Region, tol: Tolerances) -> CheckReport:
    base = scan_medial(s, r, tol)
    shifted = scan_medial(offset_view(s, eps), r, tol)
    floor = eps + tol.sep_tol
    a = np.array([m.point for m in base.samples if m.distance > floor]).reshape(-1, s.dim)
    b = np.array([m.point for m in shifted.samples if m.distance + eps > floor]).reshape(-1, s.dim)

    limit = 2 * r.step
    there, back = ClusterHelper.directed(a, b), ClusterHelper.directed(b, a)
    violations = []
    if there > limit:
        violations.append({"direction": "X -> X^eps", "hausdorff": there})
    if back > limit:
        violations.append({"direction": "X^eps -> X", "hausdorff": back})
    return CheckReport(
        name="offset_medial", checked=len(a) + len(b), violations=violations,
        details={"eps": eps, "samples_x": len(a), "samples_offset": len(b),
                 "hausdorff": max(there, back) if len(a) + len(b) else 0.0, "tolerance": limit},
    )


# ✅ === Distance graph ===
def _graph_nearest(ns: NearestSet, a: Vec, y: float) -> NDArray:
    """Nearest points of the graph of d to (a, y) for y < d(a), one per cluster of m(a)."""
    d = ns.distance
    out = []
    for v in ns.representatives:
        if y <= -d:
            out.append(np.append(v, 0.0))
        else:
            t = (d - y) / (2 * d)
            out.append(np.append(a + t * (v - a), (1 - t) * d))
    return np.array(out)


def gamma_checks(s: SceneView, probes: list, tol: Tolerances) -> CheckReport:
    rng = np.random.default_rng(tol.seed)
    violations: list[dict] = []
    counts = {"lipschitz_cone": 0, "segment": 0, "graph_multiplicity": 0}

    for raw in probes:
        a = as_vec(raw, s.dim)
        ns = nearest_set(s, a, tol)
        d = ns.distance
        if d <= tol.eps_dist:
            raise ProbeOnX("graph checks need a probe outside X", point=a)

        # 1️⃣ Lipschitz cone around (a, d(a))
        for x in a + rng.uniform(-2 * d, 2 * d, size=(32, s.dim)):
            counts["lipschitz_cone"] += 1
            if abs(s.distance(x, tol) - d) > float(np.linalg.norm(x - a)) + tol.eps_dist:
                violations.append({"property": "lipschitz_cone", "probe": a, "x": x})

        # 2️⃣ Segments [a, v] lie in the graph, with m = {v} on them
        for v in ns.representatives:
            for t in (0.25, 0.5, 0.75):
                p = t * v + (1 - t) * a
                counts["segment"] += 1
                inner = nearest_set(s, p, tol)
                exact = abs(inner.distance - (1 - t) * d) <= tol.eps_dist
                single = inner.multiplicity == 1 and inner.contains(v, tol.eps_cluster)
                if not (exact and single):
                    violations.append({"property": "segment", "probe": a, "v": v, "t": t,
                                       "distance": inner.distance, "multiplicity": inner.multiplicity})

        # 3️⃣ Epigraph nearest sets below the graph keep the multiplicity of m(a)
        for y in (-1.5 * d, -0.5 * d, 0.0, 0.5 * d):
            counts["graph_multiplicity"] += 1
            q = np.append(a, y)
            cand = _graph_nearest(ns, a, y)
            reach = np.linalg.norm(cand - q, axis=1)
            ids = ClusterHelper.single_linkage(cand, tol.eps_cluster)
            equal = float(np.ptp(reach)) <= 10 * tol.eps_dist
            xs = a + rng.uniform(-d, d, size=(32, s.dim))
            dx, _ = s.project_many(xs, tol)
            graph = np.column_stack([xs, dx])
            closer = np.linalg.norm(graph - q, axis=1) < reach.min() - 1e-9
            if int(ids.max()) + 1 != ns.multiplicity or not equal or closer.any():
                violations.append({"property": "graph_multiplicity", "probe": a, "height": y,
                                   "multiplicity": int(ids.max()) + 1, "expected": ns.multiplicity})

    return CheckReport(name="graph_lemma", checked=sum(counts.values()), violations=violations,
                       details={"counts": counts, "probes": len(probes)})
