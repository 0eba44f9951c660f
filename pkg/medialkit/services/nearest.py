"""
Distance function and nearest-point multifunction of a whole scene:
clustering, multiplicity, normal fans and the normal-set probes.
"""
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from numpy.typing import NDArray

from medialkit.core.errors import BadWitness, NotOnX
from medialkit.core.logging.run_logger import get_run_logger
from medialkit.core.numeric import (
    MAX_CLUSTERS,
    MIN_REPS,
    Tolerances,
    Vec,
    as_vec,
    default_tolerances,
    spread_indices,
    unique_directions,
    unit,
)
from medialkit.schemas.report import CheckReport
from medialkit.services.helpers.clustering import ClusterHelper
from medialkit.services.scene import SceneView


logger = get_run_logger("nearest")

PROXIMAL_STEP = 1e-4
PROXIMAL_SLACK = 1e-3
STABLE_FAN = 1e-2
FAN_DRIFT = 1.5


@dataclass(frozen=True, eq=False)
class Cluster:
    representative: Vec
    members: NDArray
    labels: frozenset[int]


@dataclass(frozen=True, eq=False)
class NearestSet:
    query: Vec
    distance: float
    clusters: tuple[Cluster, ...]
    multiplicity: int
    diameter: float
    continuum: bool = False

    @property
    def representatives(self) -> NDArray:
        return np.array([c.representative for c in self.clusters])

    @property
    def members(self) -> NDArray:
        return np.vstack([c.members for c in self.clusters])

    @property
    def labels(self) -> frozenset[int]:
        return frozenset().union(*(c.labels for c in self.clusters))

    def contains(self, a: Vec, radius: float) -> bool:
        return bool(np.min(np.linalg.norm(self.members - a, axis=1)) <= radius)


@dataclass(frozen=True, eq=False)
class NormalFan:
    base: Vec
    directions: NDArray
    kind: str = "exact_at_point"
    eta: float | None = None


# ✅ === Distance and nearest set ===
def distance(s: SceneView, x, tol: Tolerances | None = None) -> float:
    tol = tol or default_tolerances()
    return s.distance(as_vec(x, s.dim), tol)


def nearest_set(s: SceneView, x, tol: Tolerances, min_reps: int = MIN_REPS) -> NearestSet:
    x = as_vec(x, s.dim)

    # 1️⃣ Every primitive minimizer within eps_dist of the minimum
    g = s.gather(x, tol, min_reps)

    # 2️⃣ Single linkage at eps_cluster
    ids = ClusterHelper.single_linkage(g.points, tol.eps_cluster)
    clusters = []
    for k in range(int(ids.max()) + 1):
        mask = ids == k
        members = g.points[mask]
        clusters.append(Cluster(
            representative=ClusterHelper.representative(members),
            members=members,
            labels=frozenset(int(i) for i in g.labels[mask]),
        ))

    # 3️⃣ Continua keep a bounded spread of clusters
    continuum = g.continuum
    if len(clusters) > MAX_CLUSTERS:
        continuum = True
        clusters = [clusters[i] for i in spread_indices(len(clusters), MAX_CLUSTERS)]

    reps = np.array([c.representative for c in clusters])
    return NearestSet(
        query=x,
        distance=g.distance,
        clusters=tuple(clusters),
        multiplicity=len(clusters),
        diameter=ClusterHelper.diameter(reps),
        continuum=continuum,
    )


def in_nearest(s: SceneView, x: Vec, a: Vec, tol: Tolerances) -> bool:
    """a ∈ m(x) up to eps_cluster (cluster proximity, or the distance identity for continua)."""
    ns = nearest_set(s, x, tol)
    if ns.contains(a, tol.eps_cluster):
        return True
    return ns.continuum and float(np.linalg.norm(x - a)) <= ns.distance + 10 * tol.eps_dist


# ✅ === Normal fans ===
def _proximal(s: SceneView, a: Vec, dirs: NDArray, tol: Tolerances) -> NDArray:
    """Keeps directions v with d(a + hv) >= h(1 - slack) for a small h."""
    if len(dirs) == 0:
        return dirs
    d, _ = s.project_many(a + PROXIMAL_STEP * dirs, tol)
    keep = d >= PROXIMAL_STEP * (1.0 - PROXIMAL_SLACK)
    # project_many may overestimate on trimmed surfaces; confirm survivors exactly
    keep &= np.array([
        k and s.distance(a + PROXIMAL_STEP * v, tol) >= PROXIMAL_STEP * (1.0 - PROXIMAL_SLACK)
        for k, v in zip(keep, dirs)
    ], dtype=bool)
    return dirs[keep]


def normal_directions(s: SceneView, a, tol: Tolerances) -> NormalFan:
    a = as_vec(a, s.dim)
    if s.distance(a, tol) > tol.eps_dist:
        raise NotOnX("normal directions need a point of X", point=a)
    raw = unique_directions(np.array([unit(v) for v in s.raw_normals(a, tol)]).reshape(-1, s.dim))
    return NormalFan(base=a, directions=_proximal(s, a, raw, tol))


def limiting_normals(s: SceneView, a, eta: float, tol: Tolerances, samples: int = 64) -> NormalFan:
    fan = normal_directions(s, a, tol)
    dirs = [fan.directions]
    for x in s.sample_near(fan.base, eta, samples, tol):
        try:
            dirs.append(normal_directions(s, x, tol).directions)
        except NotOnX:
            logger.debug("sample off the set skipped", extra={"event": "sample_off_x"})
    union = unique_directions(np.vstack(dirs))
    return NormalFan(base=fan.base, directions=union, kind="limiting", eta=eta)


def settled_moves(moves: list[float], steps: list[float]) -> list[bool]:
    """
    Per consecutive pair of fans: True when the Hausdorff move is below
    STABLE_FAN plus the drift the earlier pairs predict for this η step.
    Fans of a C1,1 piece shrink in proportion to η.
    """
    out, rate = [], math.inf
    for k, (m, h) in enumerate(zip(moves, steps)):
        drift = 0.0 if k == 0 else FAN_DRIFT * rate * h
        out.append(m < STABLE_FAN + drift)
        rate = min(rate, m / h) if h > 0 else rate
    return out


def limiting_normal_sequence(s: SceneView, a, etas: list[float], tol: Tolerances) -> tuple[list[NormalFan], bool]:
    """Fans for a decreasing η schedule; stabilized when the last move is settled."""
    fans, settled = _fan_sequence(s, a, etas, tol)
    return fans, bool(settled) and settled[-1]


def stable_limiting_fan(s: SceneView, a, etas: list[float], tol: Tolerances) -> NormalFan:
    """The fan at the smallest η whose move is settled (the last fan when none is)."""
    fans, settled = _fan_sequence(s, a, etas, tol)
    done = [k + 1 for k, ok in enumerate(settled) if ok]
    if not done:
        logger.warning("limiting fans did not settle", extra={"event": "fan_unsettled", "etas": list(etas)})
    return fans[done[-1] if done else -1]


def _fan_sequence(s: SceneView, a, etas: list[float], tol: Tolerances) -> tuple[list[NormalFan], list[bool]]:
    etas = [float(e) for e in etas]
    fans = [limiting_normals(s, a, eta, tol) for eta in etas]
    moves = [
        ClusterHelper.hausdorff(f0.directions, f1.directions)
        for f0, f1 in zip(fans[:-1], fans[1:])
    ]
    steps = [e0 - e1 for e0, e1 in zip(etas[:-1], etas[1:])]
    return fans, settled_moves(moves, steps)


# ✅ === Probes ===
def normal_set_probe(s: SceneView, a, witnesses: list, tol: Tolerances) -> CheckReport:
    a = as_vec(a, s.dim)
    witnesses = [as_vec(w, s.dim) for w in witnesses]
    for w in witnesses:
        if not in_nearest(s, w, a, tol):
            raise BadWitness("witness does not have a among its nearest points", point=w)

    violations, checked = [], 0
    for x1, x2 in combinations(witnesses, 2):
        for t in (0.25, 0.5, 0.75):
            p = t * x1 + (1.0 - t) * x2
            checked += 1
            if not in_nearest(s, p, a, tol):
                violations.append({"point": p, "t": t})
    return CheckReport(name="normal_set_convexity", checked=checked, violations=violations)


def lipschitz_probe(s: SceneView, lo: Vec, hi: Vec, pairs: int, tol: Tolerances) -> CheckReport:
    """|d(x) − d(y)| <= |x − y| on random pairs of the box, no slack."""
    rng = np.random.default_rng(tol.seed)
    xs = rng.uniform(lo, hi, size=(pairs, s.dim))
    ys = rng.uniform(lo, hi, size=(pairs, s.dim))
    dx, _ = s.project_many(xs, tol)
    dy, _ = s.project_many(ys, tol)
    gap = np.abs(dx - dy) - np.linalg.norm(xs - ys, axis=1)
    bad = np.flatnonzero(gap > 0.0)
    violations = [{"x": xs[i], "y": ys[i], "excess": gap[i]} for i in bad[:10]]
    return CheckReport(
        name="lipschitz", checked=pairs, violations=violations,
        details={"max_ratio": float(np.max((np.abs(dx - dy)) / np.linalg.norm(xs - ys, axis=1)))},
    )


def usc_probe(s: SceneView, points: NDArray, tol: Tolerances, step: float = 1e-6, rays: int = 8) -> CheckReport:
    """Clusters of m(x_k) for x_k -> x_0 stay within 10·eps_cluster of m(x_0)."""
    rng = np.random.default_rng(tol.seed)
    radius = 10 * tol.eps_cluster
    violations, checked = [], 0
    for x0 in points:
        ns0 = nearest_set(s, x0, tol)
        if ns0.distance <= tol.eps_dist:
            continue
        for u in rng.normal(size=(rays, s.dim)):
            xk = x0 + step * unit(u)
            for y in nearest_set(s, xk, tol).representatives:
                checked += 1
                near = ns0.contains(y, radius)
                if ns0.continuum:
                    near = near or float(np.linalg.norm(x0 - y)) <= ns0.distance + radius
                if not near:
                    violations.append({"x0": x0, "xk": xk, "y": y})
    return CheckReport(name="upper_semicontinuity", checked=checked, violations=violations,
                       details={"tolerance": radius})
