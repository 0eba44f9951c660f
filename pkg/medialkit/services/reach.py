"""
Reaching radii: directional r_v(a), limiting r̃_v(a), weak r'(a), the
reaching radius r(a) and the liminf-of-weak-radii variant ṙ(a), plus the
frontier classification of points near the medial axis.
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray

from medialkit.core.errors import (
    DirectionNotLimiting,
    NotNormal,
    NotOnX,
    OnMedial,
    OnX,
    RadiusTooSmall,
    ValidationError,
)
from medialkit.core.logging.run_logger import get_run_logger
from medialkit.core.numeric import Tolerances, Vec, as_vec, is_unbounded, is_unit, spread_indices, unit
from medialkit.schemas.report import CheckReport
from medialkit.services.helpers.clustering import ClusterHelper
from medialkit.services.medial import MedialCloud, offset_view
from medialkit.services.nearest import limiting_normals, nearest_set, normal_directions, stable_limiting_fan
from medialkit.services.scene import SceneView


logger = get_run_logger("reach")

DEFAULT_ETAS = (0.2, 0.1, 0.05)
LIMITING_SAMPLES = 32
LIMITING_WIDTH = 1e-6
FAN_MATCH = 0.05
STABLE_RADIUS = 0.05
RADIUS_TOLERANCE = 5e-2
MAX_CANDIDATES = 12
NORMAL_GAP = 1e-6


@dataclass(frozen=True)
class LimitingRadius:
    etas: tuple[float, ...]
    values: tuple[float, ...]
    liminf: float
    stabilized: bool
    pairs: int = 0


@dataclass(frozen=True, eq=False)
class RadiusReport:
    base: Vec
    direction: Vec | None
    r_v: float | None
    r_tilde_v: LimitingRadius | None
    r_weak: float
    r_reach: float
    r_bd: float
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class FrontierVerdict:
    query: Vec
    nearest: Vec
    direction: Vec
    d_x: float
    r_tilde: float
    verdict: str


# ✅ === Membership predicate and directional radius ===
def _reaches(s: SceneView, a: Vec, v: Vec, t: float, tol: Tolerances) -> bool:
    """P(t): a is still a nearest point of a + t·v."""
    g = s.gather(a + t * v, tol)
    if g.distance < t - tol.eps_dist:
        return False
    if float(np.min(np.linalg.norm(g.points - a, axis=1))) <= tol.eps_cluster:
        return True
    return g.continuum


def _on_x(s: SceneView, a: Vec, tol: Tolerances) -> None:
    if s.distance(a, tol) > tol.eps_dist:
        raise NotOnX("reaching radii are defined on X", point=a)


def _is_normal(s: SceneView, a: Vec, v: Vec, tol: Tolerances) -> bool:
    """v lies on the exact normal cone at a (chord NORMAL_GAP) and P holds at eps_cluster."""
    if s.normal_gap(a, v, tol) > NORMAL_GAP:
        return False
    return _reaches(s, a, v, tol.eps_cluster, tol)


def _radius(s: SceneView, a: Vec, v: Vec, tol: Tolerances, width: float) -> float:
    if not _is_normal(s, a, v, tol):
        raise NotNormal("direction is not normal at the base point", point=a)

    # 1️⃣ Bracket by doubling
    lo, hi = tol.eps_cluster, 1.0
    while _reaches(s, a, v, hi, tol):
        lo = hi
        if hi >= tol.t_max:
            return tol.t_max
        hi = min(2.0 * hi, tol.t_max)

    # 2️⃣ Bisection of the membership interval [0, r_v]
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if _reaches(s, a, v, mid, tol):
            lo = mid
        else:
            hi = mid
    return lo


def directional_radius(s: SceneView, a, v, tol: Tolerances, width: float | None = None) -> float:
    a, v = as_vec(a, s.dim), as_vec(v, s.dim)
    _on_x(s, a, tol)
    if not is_unit(v, tol):
        raise ValidationError("direction must be a unit vector")
    return _radius(s, a, v, tol, width or tol.eps_dist)


def _radius_below(s: SceneView, a: Vec, v: Vec, bound: float, tol: Tolerances, width: float) -> float | None:
    """r_v(a) when it is below bound, None otherwise (or when v is not normal)."""
    if bound < tol.t_max and _reaches(s, a, v, bound, tol):
        return None
    try:
        r = _radius(s, a, v, tol, width)
    except NotNormal:
        return None
    return r if r < bound else None


# ✅ === Neighbourhood fans ===
@lru_cache(maxsize=256)
def _neighborhood(s: SceneView, a_key: tuple, eta: float, tol: Tolerances, samples: int) -> tuple:
    """(x, V_x) for sampled points of X ∩ B(a, eta)."""
    out = []
    for x in s.sample_near(np.array(a_key), eta, samples, tol):
        try:
            out.append((x, normal_directions(s, x, tol).directions))
        except NotOnX:
            continue
    return tuple(out)


def _matching_directions(fan: NDArray, v: Vec, eta: float) -> list[Vec]:
    """Directions of V_x within eta of v: the nearest sampled one and the projection of v on span V_x."""
    if len(fan) == 0:
        return []
    out = [fan[int(np.argmin(np.linalg.norm(fan - v, axis=1)))]]
    _, sv, vt = np.linalg.svd(fan, full_matrices=False)
    basis = vt[sv > 1e-9 * sv[0]]
    proj = basis.T @ (basis @ v)
    if np.linalg.norm(proj) > 1e-12:
        out.append(unit(proj))
    return [w for w in out if np.linalg.norm(w - v) < eta]


def _is_limiting(s: SceneView, a: Vec, v: Vec, eta: float, tol: Tolerances) -> bool:
    if _is_normal(s, a, v, tol):
        return True
    fan = limiting_normals(s, a, eta, tol).directions
    return len(fan) > 0 and float(np.min(np.linalg.norm(fan - v, axis=1))) <= FAN_MATCH


# ✅ === Limiting directional radius ===
@lru_cache(maxsize=512)
def _limiting(s: SceneView, a_key: tuple, v_key: tuple, etas: tuple, tol: Tolerances,
              samples: int, bound: float) -> LimitingRadius:
    a, v = np.array(a_key), np.array(v_key)
    own = _radius_below(s, a, v, bound, tol, LIMITING_WIDTH)
    start = bound if own is None else own

    values, pairs = [], 0
    for eta in etas:
        best = start
        for x, fan in _neighborhood(s, a_key, eta, tol, samples):
            for vx in _matching_directions(fan, v, eta):
                pairs += 1
                r = _radius_below(s, x, vx, best, tol, LIMITING_WIDTH)
                if r is not None:
                    best = r
        values.append(best)

    last = values[-1]
    prev = values[-2] if len(values) > 1 else last
    stabilized = abs(last - prev) <= STABLE_RADIUS or (is_unbounded(last, tol) and is_unbounded(prev, tol))
    return LimitingRadius(etas=etas, values=tuple(values), liminf=last, stabilized=stabilized, pairs=pairs)


def _check_etas(etas) -> tuple[float, ...]:
    etas = tuple(float(e) for e in etas)
    if not etas or any(e <= 0 for e in etas) or any(e0 <= e1 for e0, e1 in zip(etas, etas[1:])):
        raise ValidationError("eta schedule must be positive and strictly decreasing")
    return etas


def limiting_directional_radius(
    s: SceneView,
    a,
    v,
    etas,
    tol: Tolerances,
    samples: int = LIMITING_SAMPLES,
    bound: float | None = None,
) -> LimitingRadius:
    """
    Per η: the smallest r_{v_x}(x) over sampled x ∈ X ∩ B(a, η) and v_x ∈ V_x
    with |v_x − v| < η, (a, v) included; each η is an independent minimum and
    the last one stands for the liminf.
    """
    a, v = as_vec(a, s.dim), as_vec(v, s.dim)
    etas = _check_etas(etas)
    _on_x(s, a, tol)
    if not is_unit(v, tol):
        raise ValidationError("direction must be a unit vector")
    if not _is_limiting(s, a, v, etas[0], tol):
        raise DirectionNotLimiting("direction is not a limiting normal at the base point", point=a)
    cap = tol.t_max if bound is None else min(bound, tol.t_max)
    return _limiting(s, tuple(a), tuple(v), etas, tol, samples, cap)


# ✅ === Weak, reaching and liminf-of-weak radii ===
def _weak(s: SceneView, a: Vec, fan: NDArray, tol: Tolerances, bound: float, width: float) -> float:
    best = bound
    for v in fan:
        r = _radius_below(s, a, v, best, tol, width)
        if r is not None:
            best = r
    return best


def weak_radius(s: SceneView, a, tol: Tolerances, bound: float | None = None, width: float | None = None) -> float:
    a = as_vec(a, s.dim)
    _on_x(s, a, tol)
    fan = normal_directions(s, a, tol).directions
    return _weak(s, a, fan, tol, tol.t_max if bound is None else bound, width or tol.eps_dist)


def reaching_radius(s: SceneView, a, tol: Tolerances, etas=DEFAULT_ETAS) -> float:
    a = as_vec(a, s.dim)
    etas = _check_etas(etas)
    _on_x(s, a, tol)

    # 1️⃣ Candidates: V_a and a clustered sample of the settled limiting fan
    own = normal_directions(s, a, tol).directions
    limiting = stable_limiting_fan(s, a, etas, tol).directions
    extra = limiting[ClusterHelper.at_most(limiting, MAX_CANDIDATES)] if len(limiting) else limiting
    candidates = np.vstack([own, extra]) if len(extra) else own

    # 2️⃣ Smallest liminf estimate, pruned by the running best
    best = tol.t_max
    for v in candidates:
        try:
            est = limiting_directional_radius(s, a, v, etas, tol, bound=best)
        except DirectionNotLimiting:
            continue
        best = min(best, est.liminf)
    logger.debug("reaching radius", extra={"event": "reaching_radius", "candidates": len(candidates)})
    return best


def bd_sequence(s: SceneView, a, etas, tol: Tolerances, samples: int = LIMITING_SAMPLES) -> list[float]:
    a = as_vec(a, s.dim)
    etas = _check_etas(etas)
    own = weak_radius(s, a, tol, width=LIMITING_WIDTH)
    values = []
    for eta in etas:
        best = own
        for x, fan in _neighborhood(s, tuple(a), eta, tol, samples):
            best = _weak(s, x, fan, tol, best, LIMITING_WIDTH)
        values.append(best)
    return values


def bd_radius(s: SceneView, a, etas, tol: Tolerances) -> float:
    return bd_sequence(s, a, etas, tol)[-1]


def radius_report(s: SceneView, a, tol: Tolerances, v=None, etas=DEFAULT_ETAS) -> RadiusReport:
    a = as_vec(a, s.dim)
    r_v, r_tilde = None, None
    if v is not None:
        v = as_vec(v, s.dim)
        r_v = directional_radius(s, a, v, tol)
        r_tilde = limiting_directional_radius(s, a, v, etas, tol)
    fan = normal_directions(s, a, tol).directions
    return RadiusReport(
        base=a,
        direction=v,
        r_v=r_v,
        r_tilde_v=r_tilde,
        r_weak=weak_radius(s, a, tol),
        r_reach=reaching_radius(s, a, tol, etas),
        r_bd=bd_radius(s, a, etas, tol),
        diagnostics={"fan_size": len(fan), "etas": list(etas),
                     "pairs": r_tilde.pairs if r_tilde else 0},
    )


# ✅ === Frontier of the medial axis ===
def frontier_classify(s: SceneView, x, tol: Tolerances, etas=DEFAULT_ETAS) -> FrontierVerdict:
    x = as_vec(x, s.dim)
    ns = nearest_set(s, x, tol)
    if ns.distance <= tol.eps_dist:
        raise OnX("frontier classification needs a point off X", point=x)
    if ns.multiplicity >= 2 and ns.diameter >= tol.sep_tol:
        raise OnMedial("point lies on the medial axis", point=x)

    a = ns.representatives[0]
    v = unit(x - a)
    r_tilde = limiting_directional_radius(s, a, v, etas, tol).liminf

    if r_tilde <= tol.sep_tol:
        verdict = "inconclusive"
    elif ns.distance >= r_tilde - 10 * tol.eps_dist:
        verdict = "in_closure"
    else:
        verdict = "not_in_closure"
    logger.info("frontier classified", extra={"event": "frontier", "verdict": verdict})
    return FrontierVerdict(query=x, nearest=a, direction=v, d_x=ns.distance, r_tilde=r_tilde, verdict=verdict)


def frontier_sandwich(s: SceneView, a, v, tol: Tolerances, delta: float = 0.05, probes: int = 5) -> CheckReport:
    """Points a + t·v with r̃_v(a) + δ < t < r_v(a) − δ lie in the closure of the medial axis."""
    a, v = as_vec(a, s.dim), as_vec(v, s.dim)
    r = directional_radius(s, a, v, tol)
    r_tilde = limiting_directional_radius(s, a, v, DEFAULT_ETAS, tol).liminf
    lo, hi = r_tilde + delta, min(r, tol.t_max) - delta

    violations, checked = [], 0
    if lo < hi:
        for t in np.linspace(lo, hi, probes + 2)[1:-1]:
            checked += 1
            try:
                verdict = frontier_classify(s, a + t * v, tol).verdict
            except OnMedial:
                verdict = "in_closure"
            if verdict != "in_closure":
                violations.append({"t": t, "verdict": verdict})
    return CheckReport(name="frontier_sandwich", checked=checked, violations=violations,
                       details={"r_v": r, "r_tilde": r_tilde, "window": [lo, hi]})


def medial_forward_check(s: SceneView, cloud: MedialCloud, tol: Tolerances, limit: int = 8) -> CheckReport:
    """Every sampled medial point x satisfies d(x) >= r̃_v(a) for a ∈ m(x), v = (x − a)/|x − a|."""
    violations, checked = [], 0
    samples = [cloud.samples[i] for i in spread_indices(len(cloud.samples), limit)]
    for m in samples:
        ns = nearest_set(s, m.point, tol)
        a = ns.representatives[0]
        try:
            r_tilde = limiting_directional_radius(s, a, unit(m.point - a), DEFAULT_ETAS, tol).liminf
        except DirectionNotLimiting:
            continue
        checked += 1
        if m.distance < r_tilde - RADIUS_TOLERANCE:
            violations.append({"x": m.point, "d": m.distance, "r_tilde": r_tilde})
    return CheckReport(name="miurat_forward", checked=checked, violations=violations,
                       details={"tolerance": RADIUS_TOLERANCE})


# ✅ === Radius theorems ===
def interval_probe(s: SceneView, a, v, tol: Tolerances) -> CheckReport:
    """P(t) holds on the whole interval [0, r_v]."""
    a, v = as_vec(a, s.dim), as_vec(v, s.dim)
    r = directional_radius(s, a, v, tol)
    span = 1.0 if is_unbounded(r, tol) else r
    violations = []
    for f in (0.25, 0.5, 0.75):
        if not _reaches(s, a, v, f * span, tol):
            violations.append({"t": f * span})
    return CheckReport(name="interval", checked=3, violations=violations, details={"r_v": r})


def _same(r0: float, r1: float, tol: Tolerances, limit: float) -> bool:
    if is_unbounded(r0, tol) or is_unbounded(r1, tol):
        return is_unbounded(r0, tol) and is_unbounded(r1, tol)
    return abs(r0 - r1) <= limit


def offset_radius_check(s: SceneView, a, v, eps: float, tol: Tolerances, etas=DEFAULT_ETAS) -> CheckReport:
    a, v = as_vec(a, s.dim), as_vec(v, s.dim)
    r_tilde = limiting_directional_radius(s, a, v, etas, tol).liminf
    if r_tilde <= eps + tol.sep_tol:
        raise RadiusTooSmall(f"limiting radius {r_tilde:g} does not exceed eps={eps:g}", point=a)

    shifted = limiting_directional_radius(offset_view(s, eps), a + eps * v, v, etas, tol).liminf
    total = shifted if is_unbounded(shifted, tol) else shifted + eps
    ok = _same(r_tilde, total, tol, RADIUS_TOLERANCE)
    return CheckReport(
        name="offset_radius", checked=1,
        violations=[] if ok else [{"r_tilde": r_tilde, "offset_plus_eps": total}],
        details={"eps": eps, "r_tilde": r_tilde, "r_tilde_offset": shifted, "tolerance": RADIUS_TOLERANCE},
    )


def radius_continuity_probe(s: SceneView, a, etas, tol: Tolerances, samples: int = 16,
                            limit: float = 0.1) -> CheckReport:
    a = as_vec(a, s.dim)
    etas = _check_etas(etas)
    base = weak_radius(s, a, tol, width=LIMITING_WIDTH)

    oscillations = []
    for eta in etas:
        radii = [base] + [_weak(s, x, fan, tol, tol.t_max, LIMITING_WIDTH)
                          for x, fan in _neighborhood(s, tuple(a), eta, tol, samples)]
        bounded = [r for r in radii if not is_unbounded(r, tol)]
        if len(bounded) == len(radii):
            oscillations.append(max(radii) - min(radii))
        else:
            oscillations.append(0.0 if not bounded else math.inf)

    violations = [] if oscillations[-1] <= limit else [{"eta": etas[-1], "oscillation": oscillations[-1]}]
    return CheckReport(name="radius_continuity", checked=len(etas), violations=violations,
                       details={"etas": list(etas), "oscillations": oscillations, "tolerance": limit})


def _orthogonal_span(fan: NDArray, v: Vec) -> NDArray:
    """Orthonormal directions of span(fan) perpendicular to v (at most two)."""
    _, sv, vt = np.linalg.svd(fan, full_matrices=False)
    out = []
    for w in vt[sv > 1e-9 * sv[0]]:
        w = w - (w @ v) * v
        for u in out:
            w = w - (w @ u) * u
        if np.linalg.norm(w) > 1e-9:
            out.append(unit(w))
    return np.array(out[:2]).reshape(-1, v.size)


def rho_semicontinuity_probe(s: SceneView, a, tol: Tolerances, steps=(0.02, 0.01, 0.005),
                             limit: float = 0.05) -> CheckReport:
    """v ↦ r_v(a) is upper semicontinuous on V_a: r at the finest perturbation never jumps above r_v + limit."""
    a = as_vec(a, s.dim)
    _on_x(s, a, tol)
    fan = normal_directions(s, a, tol).directions

    violations, checked = [], 0
    for v in fan:
        try:
            r_v = _radius(s, a, v, tol, LIMITING_WIDTH)
        except NotNormal:
            continue
        for w in _orthogonal_span(fan, v):
            for sign in (1.0, -1.0):
                finest = None
                for k in steps:
                    try:
                        finest = _radius(s, a, unit(v + sign * k * w), tol, LIMITING_WIDTH)
                    except NotNormal:
                        finest = None
                if finest is None:
                    continue
                checked += 1
                if not is_unbounded(r_v, tol) and finest > r_v + limit:
                    violations.append({"v": v, "r_v": r_v, "perturbed": finest})
    return CheckReport(name="rho_usc", checked=checked, violations=violations, details={"tolerance": limit})


def denkowski_equality_check(s: SceneView, a, tol: Tolerances, etas=DEFAULT_ETAS) -> CheckReport:
    a = as_vec(a, s.dim)
    r = reaching_radius(s, a, tol, etas)
    rb = bd_radius(s, a, etas, tol)
    ok = _same(r, rb, tol, RADIUS_TOLERANCE)
    return CheckReport(
        name="radius_equality", checked=1,
        violations=[] if ok else [{"reaching": r, "bd": rb}],
        details={"point": a, "reaching": r, "bd": rb, "tolerance": RADIUS_TOLERANCE},
    )
