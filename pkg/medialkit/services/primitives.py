"""
Exact primitives of a scene.

Every primitive answers three questions about itself:
    * nearest(x)      certified distance plus a sample of the minimizers
    * normals(a)      sampled unit normal cone at one of its points
    * points_near(c)  exact points of the primitive inside a ball
Quadric patches project in closed form onto their carrier and fall back to
a zoom search over the kept parameter grid when a trim cuts the foot away.
"""
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import NDArray
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar
from scipy.spatial import cKDTree
from shapely.geometry import Point, Polygon
from shapely.geometry.polygon import orient
from shapely.ops import nearest_points

from medialkit.core.errors import OffPrimitive
from medialkit.core.numeric import (
    CONTINUUM_SPACING,
    FAN_3D,
    MIN_REPS,
    Tolerances,
    Vec,
    fibonacci_sphere,
    full_fan,
    half_circle,
    halton_ball,
    normal_circle,
    orthonormal_frame,
    spread_indices,
    unit,
)
from medialkit.schemas.scene import (
    ArcSpec,
    CylinderPatchSpec,
    PlanePatchSpec,
    PrimitiveSpec,
    SampledCurveSpec,
    SpherePatchSpec,
)
from medialkit.services.trims import TrimSet


ENDPOINT_SLACK = 1e-9
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Projection:
    """Distance from a query to one primitive plus a sample of its minimizers."""
    distance: float
    points: NDArray
    continuum: bool = False


def _gather(dists: NDArray, pts: NDArray, tol: Tolerances) -> Projection:
    d = float(np.min(dists))
    return Projection(d, pts[dists <= d + tol.eps_cluster])


def _spread(pts: NDArray, n: int) -> NDArray:
    return pts[spread_indices(len(pts), n)]


def _curve_normals(dim: int, tangent: Vec) -> NDArray:
    if dim == 2:
        perp = unit(np.array([-tangent[1], tangent[0]]))
        return np.vstack([perp, -perp])
    return normal_circle(tangent)


def _endpoint_cone(dim: int, base: NDArray, outward: Vec) -> NDArray:
    """Normal cone at the free end of a curve: its normals plus every u with <u, outward> >= 0."""
    if dim == 2:
        return half_circle(base[0], outward)
    hemi = fibonacci_sphere(FAN_3D)
    return np.vstack([base, hemi[hemi @ outward >= 0.0], outward])


def _conormal(grad: Vec, n: Vec) -> Vec | None:
    t = grad - (grad @ n) * n
    nt = float(np.linalg.norm(t))
    return t / nt if nt > 1e-9 else None


# Chord distances from a unit vector to the exact normal cones
def _space_gap(v: Vec, axis: Vec) -> float:
    """To the unit sphere of the space orthogonal to axis."""
    axis = unit(axis)
    w = v - (v @ axis) * axis
    nw = float(np.linalg.norm(w))
    return float(np.linalg.norm(v - w / nw)) if nw > 1e-12 else math.sqrt(2.0)


def _half_gap(v: Vec, outward: Vec) -> float:
    """To the closed hemisphere <u, outward> >= 0."""
    return 0.0 if float(v @ outward) >= 0.0 else _space_gap(v, outward)


def _semicircle_gap(v: Vec, n: Vec, nu: Vec) -> float:
    """To the half great circle from n through nu to -n."""
    if float(v @ nu) > 0.0:
        return float(np.linalg.norm(v - unit((v @ n) * n + (v @ nu) * nu)))
    return min(float(np.linalg.norm(v - n)), float(np.linalg.norm(v + n)))


def _curve_gap(v: Vec, tangent: Vec, outward: Vec | None) -> float:
    gap = _space_gap(v, tangent)
    return gap if outward is None else min(gap, _half_gap(v, outward))


def _sheet_gap(v: Vec, n: Vec, conormals: list[Vec]) -> float:
    gaps = [float(np.linalg.norm(v - n)), float(np.linalg.norm(v + n))]
    gaps += [_semicircle_gap(v, n, nu) for nu in conormals]
    return min(gaps)


# ✅ === Base class ===
class Primitive(ABC):
    kind = "primitive"

    def __init__(self, dim: int):
        self.dim = dim

    @abstractmethod
    def nearest(self, x: Vec, tol: Tolerances, min_reps: int = MIN_REPS) -> Projection:
        ...

    def distance(self, x: Vec, tol: Tolerances) -> float:
        return self.nearest(x, tol).distance

    def project_many(self, xs: NDArray, tol: Tolerances) -> tuple[NDArray, NDArray]:
        """Row-wise (distance, one foot); exact unless a subclass says otherwise."""
        out = [self.nearest(x, tol) for x in xs]
        return np.array([p.distance for p in out]), np.array([p.points[0] for p in out])

    def contains(self, a: Vec, tol: Tolerances) -> bool:
        return self.distance(a, tol) <= tol.eps_dist

    def normals(self, a: Vec, tol: Tolerances) -> NDArray:
        if not self.contains(a, tol):
            raise OffPrimitive(f"point is not on this {self.kind}", point=a)
        return self._normals(a, tol)

    @abstractmethod
    def _normals(self, a: Vec, tol: Tolerances) -> NDArray:
        ...

    @abstractmethod
    def normal_gap(self, a: Vec, v: Vec, tol: Tolerances) -> float:
        """Chord distance from the unit vector v to the exact normal cone at a."""

    @abstractmethod
    def points_near(self, c: Vec, r: float, n: int, seed: int) -> NDArray:
        """Up to n exact points of the primitive inside B(c, r)."""

    def smooth_at(self, a: Vec, tol: Tolerances) -> bool:
        """Interior point of a C2 piece (no end, edge or corner)."""
        return False


# ✅ === Point sets ===
class PointSet(Primitive):
    kind = "point_set"

    def __init__(self, points, dim: int):
        super().__init__(dim)
        self.points = np.asarray(points, dtype=float).reshape(-1, dim)

    def nearest(self, x, tol, min_reps=MIN_REPS):
        return _gather(np.linalg.norm(self.points - x, axis=1), self.points, tol)

    def project_many(self, xs, tol):
        best = np.full(len(xs), np.inf)
        feet = np.zeros_like(xs)
        for p in self.points:
            d = np.linalg.norm(xs - p, axis=1)
            closer = d < best
            best[closer] = d[closer]
            feet[closer] = p
        return best, feet

    def _normals(self, a, tol):
        return full_fan(self.dim)

    def normal_gap(self, a, v, tol):
        return 0.0

    def points_near(self, c, r, n, seed):
        return _spread(self.points[np.linalg.norm(self.points - c, axis=1) <= r], n)


# ✅ === Lines, rays and segments ===
class LinePrimitive(Primitive):
    kind = "line"

    def __init__(self, point, direction, dim: int, t_lo: float | None = None, t_hi: float | None = None):
        super().__init__(dim)
        self.p = np.asarray(point, dtype=float)
        self.d = unit(np.asarray(direction, dtype=float))
        self.t_lo = -math.inf if t_lo is None else float(t_lo)
        self.t_hi = math.inf if t_hi is None else float(t_hi)

    @classmethod
    def segment(cls, start, end, dim: int) -> "LinePrimitive":
        start = np.asarray(start, dtype=float)
        span = np.asarray(end, dtype=float) - start
        seg = cls(start, span, dim, 0.0, float(np.linalg.norm(span)))
        seg.kind = "segment"
        return seg

    def _params(self, xs: NDArray) -> NDArray:
        return np.clip((xs - self.p) @ self.d, self.t_lo, self.t_hi)

    def nearest(self, x, tol, min_reps=MIN_REPS):
        foot = self.p + float(self._params(x[None, :])[0]) * self.d
        return Projection(float(np.linalg.norm(x - foot)), foot[None, :])

    def project_many(self, xs, tol):
        feet = self.p + self._params(xs)[:, None] * self.d
        return np.linalg.norm(xs - feet, axis=1), feet

    def _outward(self, a: Vec) -> Vec | None:
        t = float((a - self.p) @ self.d)
        if abs(t - self.t_lo) <= ENDPOINT_SLACK:
            return -self.d
        if abs(t - self.t_hi) <= ENDPOINT_SLACK:
            return self.d
        return None

    def _normals(self, a, tol):
        base = _curve_normals(self.dim, self.d)
        outward = self._outward(a)
        return base if outward is None else _endpoint_cone(self.dim, base, outward)

    def normal_gap(self, a, v, tol):
        return _curve_gap(v, self.d, self._outward(a))

    def smooth_at(self, a, tol):
        return self.contains(a, tol) and self._outward(a) is None

    def points_near(self, c, r, n, seed):
        t0 = float((c - self.p) @ self.d)
        h2 = float(np.sum((c - self.p - t0 * self.d) ** 2))
        if h2 > r * r:
            return np.empty((0, self.dim))
        w = math.sqrt(r * r - h2)
        lo, hi = max(t0 - w, self.t_lo), min(t0 + w, self.t_hi)
        if lo > hi:
            return np.empty((0, self.dim))
        return self.p + np.linspace(lo, hi, n)[:, None] * self.d


# ✅ === Circular arcs ===
class ArcPrimitive(Primitive):
    kind = "arc"

    def __init__(self, spec: ArcSpec, dim: int):
        super().__init__(dim)
        self.c = np.asarray(spec.center, dtype=float)
        self.R = float(spec.radius)
        self.start = float(spec.start)
        self.sweep = float(min(spec.sweep, TWO_PI))
        self.full = self.sweep >= TWO_PI - 1e-12
        if dim == 2:
            self.nv = None
            self.e1, self.e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        else:
            self.nv = unit(np.asarray(spec.normal, dtype=float))
            if spec.reference is not None:
                ref = np.asarray(spec.reference, dtype=float)
                self.e1 = unit(ref - (ref @ self.nv) * self.nv)
            else:
                self.e1, _ = orthonormal_frame(self.nv)
            self.e2 = np.cross(self.nv, self.e1)

    def point(self, phi) -> NDArray:
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        return self.c + self.R * (np.cos(phi)[:, None] * self.e1 + np.sin(phi)[:, None] * self.e2)

    def _offset(self, phi):
        return np.mod(np.asarray(phi) - self.start, TWO_PI)

    def _in_range(self, phi):
        if self.full:
            return np.ones(np.shape(phi), dtype=bool)
        return self._offset(phi) <= self.sweep + 1e-14

    def _plane_coords(self, xs: NDArray):
        q = xs - self.c
        h = q @ self.nv if self.nv is not None else np.zeros(len(q))
        return q @ self.e1, q @ self.e2, h

    def nearest(self, x, tol, min_reps=MIN_REPS):
        qa, qb, h = (float(v[0]) for v in self._plane_coords(x[None, :]))
        rho = math.hypot(qa, qb)

        # Query on the carrier axis: every arc point is a minimizer
        if rho <= tol.eps_dist:
            count = max(min_reps, math.ceil(self.sweep / CONTINUUM_SPACING))
            if self.full:
                phis = self.start + self.sweep * np.arange(count) / count
            else:
                phis = np.linspace(self.start, self.start + self.sweep, count)
            return Projection(math.hypot(self.R, h), self.point(phis), continuum=True)

        phi = math.atan2(qb, qa)
        if self._in_range(phi):
            return Projection(math.hypot(rho - self.R, h), self.point(phi))
        ends = self.point([self.start, self.start + self.sweep])
        return _gather(np.linalg.norm(ends - x, axis=1), ends, tol)

    def project_many(self, xs, tol):
        qa, qb, _ = self._plane_coords(xs)
        phi = np.arctan2(qb, qa)
        feet = self.point(phi)
        if not self.full:
            ends = self.point([self.start, self.start + self.sweep])
            d0 = np.linalg.norm(xs - ends[0], axis=1)
            d1 = np.linalg.norm(xs - ends[1], axis=1)
            end_feet = np.where((d0 <= d1)[:, None], ends[0], ends[1])
            feet = np.where(self._in_range(phi)[:, None], feet, end_feet)
        return np.linalg.norm(xs - feet, axis=1), feet

    def _phi_of(self, a: Vec) -> float:
        qa, qb, _ = self._plane_coords(a[None, :])
        return math.atan2(float(qb[0]), float(qa[0]))

    def _outward(self, phi: float, tangent: Vec) -> Vec | None:
        if self.full:
            return None
        off = float(self._offset(phi))
        slack = ENDPOINT_SLACK / self.R
        if off <= slack or TWO_PI - off <= slack:
            return -tangent
        if abs(off - self.sweep) <= slack:
            return tangent
        return None

    def _normals(self, a, tol):
        phi = self._phi_of(a)
        radial = math.cos(phi) * self.e1 + math.sin(phi) * self.e2
        tangent = -math.sin(phi) * self.e1 + math.cos(phi) * self.e2
        base = np.vstack([radial, -radial]) if self.dim == 2 else normal_circle(tangent)
        outward = self._outward(phi, tangent)
        return base if outward is None else _endpoint_cone(self.dim, base, outward)

    def normal_gap(self, a, v, tol):
        phi = self._phi_of(a)
        tangent = -math.sin(phi) * self.e1 + math.cos(phi) * self.e2
        return _curve_gap(v, tangent, self._outward(phi, tangent))

    def smooth_at(self, a, tol):
        phi = self._phi_of(a)
        tangent = -math.sin(phi) * self.e1 + math.cos(phi) * self.e2
        return self.contains(a, tol) and self._outward(phi, tangent) is None

    def points_near(self, c, r, n, seed):
        count = int(min(200_000, max(64, math.ceil(self.sweep * self.R * 4 * n / r))))
        phis = np.linspace(self.start, self.start + self.sweep, count, endpoint=not self.full)
        pts = self.point(phis)
        return _spread(pts[np.linalg.norm(pts - c, axis=1) <= r], n)


# ✅ === Interpolated curves ===
class SampledCurve(Primitive):
    """Not-a-knot cubic spline through ordered points, uniform knot parameter."""

    kind = "sampled_curve"
    MAX_CANDIDATES = 8
    NEWTON_STEPS = 8

    def __init__(self, spec: SampledCurveSpec, dim: int):
        super().__init__(dim)
        self.knots = np.asarray(spec.points, dtype=float)
        self.t_end = float(len(self.knots) - 1)
        self.spline = CubicSpline(np.arange(len(self.knots)), self.knots, bc_type="not-a-knot", axis=0)
        self.deriv = self.spline.derivative()
        self.second = self.deriv.derivative()
        self.refine = spec.refine

    @cached_property
    def _dense(self) -> tuple[NDArray, NDArray]:
        tt = np.linspace(0.0, self.t_end, int(self.t_end) * self.refine + 1)
        return tt, self.spline(tt)

    @cached_property
    def _tree(self) -> cKDTree:
        return cKDTree(self._dense[1])

    @cached_property
    def _max_gap(self) -> float:
        return float(np.max(np.linalg.norm(np.diff(self._dense[1], axis=0), axis=1)))

    def _sqdist(self, s: float, x: Vec) -> float:
        r = self.spline(s) - x
        return float(r @ r)

    def _polish(self, s: float, x: Vec, lo: float, hi: float) -> tuple[float, float]:
        """Newton steps on <c(s) − x, c'(s)> = 0 inside [lo, hi], kept while the distance drops."""
        best = self._sqdist(s, x)
        for _ in range(self.NEWTON_STEPS):
            r = self.spline(s) - x
            d1 = self.deriv(s)
            hess = float(d1 @ d1 + r @ self.second(s))
            if hess <= 0.0:
                break
            t = float(np.clip(s - float(r @ d1) / hess, lo, hi))
            val = self._sqdist(t, x)
            if val > best:
                break
            converged = abs(t - s) <= 1e-15
            s, best = t, val
            if converged:
                break
        return s, math.sqrt(max(best, 0.0))

    def locate(self, x: Vec, tol: Tolerances) -> tuple[float, NDArray]:
        """Distance and the curve parameters of every minimizer found, nearest first."""
        tt, pts = self._dense
        D = np.linalg.norm(pts - x, axis=1)
        last = len(tt) - 1

        # 1️⃣ Coarse local minima close to the coarse optimum
        interior = np.flatnonzero((D[1:-1] <= D[:-2]) & (D[1:-1] <= D[2:])) + 1
        idx = np.unique(np.concatenate([interior, [0, last]]))
        idx = idx[D[idx] <= D.min() + 2.0 * self._max_gap]
        idx = idx[np.argsort(D[idx])][: self.MAX_CANDIDATES]

        # 2️⃣ Bounded Brent refinement around each candidate, then a Newton polish
        # (the squared distance is flat at its minimum, Brent alone stops near √machine-eps)
        found: list[tuple[float, float]] = []
        for i in idx:
            lo, hi = tt[max(i - 1, 0)], tt[min(i + 1, last)]
            res = minimize_scalar(
                self._sqdist, bounds=(lo, hi), args=(x,), method="bounded", options={"xatol": 1e-12}
            )
            found.append(self._polish(float(res.x), x, lo, hi))
            if i in (0, last):
                found.append((float(tt[i]), float(D[i])))

        # 3️⃣ Keep every minimizer within eps_cluster of the best
        d = min(v for _, v in found)
        found.sort(key=lambda sv: sv[1])
        params: list[float] = []
        for s, v in found:
            if v <= d + tol.eps_cluster and all(abs(s - p) > 1e-10 for p in params):
                params.append(s)
        return d, np.array(params)

    def nearest(self, x, tol, min_reps=MIN_REPS):
        d, params = self.locate(x, tol)
        pts = self.spline(params)
        keep = [0]
        for j in range(1, len(pts)):
            if np.min(np.linalg.norm(pts[keep] - pts[j], axis=1)) > tol.eps_dist:
                keep.append(j)
        return Projection(d, pts[keep])

    def project_many(self, xs, tol):
        """Dense-table seed polished by Newton steps inside the seed's two cells."""
        tt, pts = self._dense
        last = len(tt) - 1
        dd, ii = self._tree.query(xs)
        s = tt[ii]
        lo, hi = tt[np.maximum(ii - 1, 0)], tt[np.minimum(ii + 1, last)]
        for _ in range(6):
            r = self.spline(s) - xs
            d1, d2 = self.deriv(s), self.second(s)
            grad = np.sum(r * d1, axis=1)
            hess = np.sum(d1 * d1, axis=1) + np.sum(r * d2, axis=1)
            step = np.where(hess > 0, grad / np.where(hess > 0, hess, 1.0), 0.0)
            s = np.clip(s - step, lo, hi)
        feet = self.spline(s)
        dist = np.linalg.norm(xs - feet, axis=1)
        worse = dist > dd
        feet[worse], dist[worse] = pts[ii[worse]], dd[worse]
        return dist, feet

    def _outward(self, s: float, tangent: Vec) -> Vec | None:
        if s <= ENDPOINT_SLACK:
            return -unit(tangent)
        if s >= self.t_end - ENDPOINT_SLACK:
            return unit(tangent)
        return None

    def _normals(self, a, tol):
        _, params = self.locate(a, tol)
        s = float(params[0])
        tangent = self.deriv(s)
        base = _curve_normals(self.dim, tangent)
        outward = self._outward(s, tangent)
        return base if outward is None else _endpoint_cone(self.dim, base, outward)

    def normal_gap(self, a, v, tol):
        _, params = self.locate(a, tol)
        s = float(params[0])
        tangent = self.deriv(s)
        return _curve_gap(v, tangent, self._outward(s, tangent))

    def smooth_at(self, a, tol):
        if not self.contains(a, tol):
            return False
        _, params = self.locate(a, tol)
        return self._outward(float(params[0]), self.deriv(float(params[0]))) is None

    def points_near(self, c, r, n, seed):
        tt, pts = self._dense
        last = len(tt) - 1
        inside = np.flatnonzero(np.linalg.norm(pts - c, axis=1) <= r)
        if len(inside) == 0:
            i = int(self._tree.query(c)[1])
            lo_i, hi_i = i, i
        else:
            lo_i, hi_i = int(inside.min()), int(inside.max())
        ts = np.linspace(tt[max(lo_i - 1, 0)], tt[min(hi_i + 1, last)], 8 * n)
        cand = self.spline(ts)
        return _spread(cand[np.linalg.norm(cand - c, axis=1) <= r], n)


# ✅ === Trimmed quadric patches ===
class _TrimmedSurface(Primitive):
    """Carrier u-v parametrization plus trims; zoom search handles cut-off feet."""

    ZOOM_POINTS = 9
    ZOOM_ROUNDS = 48
    SEEDS = 4
    v_periodic = True

    def __init__(self, trims: TrimSet):
        super().__init__(3)
        self.trims = trims

    @abstractmethod
    def point_at(self, u, v) -> NDArray:
        ...

    @abstractmethod
    def params_of(self, p: Vec) -> tuple[float, float]:
        ...

    @abstractmethod
    def carrier_normal(self, p: Vec) -> Vec:
        ...

    @abstractmethod
    def _carrier_foot(self, x: Vec, tol: Tolerances, min_reps: int) -> Projection | None:
        ...

    @abstractmethod
    def _grid_shape(self) -> tuple[int, int]:
        ...

    u_bounds: tuple[float, float]
    v_bounds: tuple[float, float]

    def param_ok(self, U: NDArray, V: NDArray) -> NDArray:
        return np.ones(np.shape(U), dtype=bool)

    def kept(self, pts: NDArray, U: NDArray | None = None, V: NDArray | None = None) -> NDArray:
        ok = self.trims.kept(pts)
        return ok if U is None else ok & self.param_ok(U, V)

    @cached_property
    def _grid(self):
        nu, nv = self._grid_shape()
        us = np.linspace(*self.u_bounds, nu)
        vs = np.linspace(*self.v_bounds, nv, endpoint=not self.v_periodic)
        U, V = (g.ravel() for g in np.meshgrid(us, vs, indexing="ij"))
        pts = self.point_at(U, V)
        ok = self.kept(pts, U, V)
        cell = max(np.ptp(self.point_at(us[:2], vs[:1].repeat(2)), axis=0).max(),
                   np.ptp(self.point_at(us[nu // 2].repeat(2), vs[:2]), axis=0).max())
        params = np.column_stack([U[ok], V[ok]])
        return params, pts[ok], (cKDTree(pts[ok]) if ok.any() else None), float(cell), (
            (us[1] - us[0]), (vs[1] - vs[0]))

    def _zoom(self, x: Vec, u: float, v: float) -> tuple[float, float, float]:
        _, _, _, _, (su, sv) = self._grid
        best = float(np.linalg.norm(self.point_at(np.array([u]), np.array([v]))[0] - x))
        offsets = np.linspace(-1.0, 1.0, self.ZOOM_POINTS)
        for _ in range(self.ZOOM_ROUNDS):
            us = np.clip(u + su * offsets, *self.u_bounds)
            vs = v + sv * offsets
            if not self.v_periodic:
                vs = np.clip(vs, *self.v_bounds)
            UU, VV = (g.ravel() for g in np.meshgrid(us, vs, indexing="ij"))
            pts = self.point_at(UU, VV)
            D = np.linalg.norm(pts - x, axis=1)
            D[~self.kept(pts, UU, VV)] = np.inf
            j = int(np.argmin(D))
            if D[j] <= best:
                best, u, v = float(D[j]), float(UU[j]), float(VV[j])
            su *= 0.5
            sv *= 0.5
        return best, u, v

    def _search(self, x: Vec, tol: Tolerances) -> Projection:
        params, pts, tree, cell, _ = self._grid
        if tree is None:
            return Projection(math.inf, np.empty((0, 3)))

        # 1️⃣ Seeds: grid points near the best one, spread apart
        k = min(64, len(pts))
        dd, ii = tree.query(x, k=k)
        dd, ii = np.atleast_1d(dd), np.atleast_1d(ii)
        seeds: list[int] = []
        for d, i in zip(dd, ii):
            if d > dd[0] + 2.0 * cell:
                break
            if all(np.linalg.norm(pts[i] - pts[s]) > 4.0 * cell for s in seeds):
                seeds.append(int(i))
            if len(seeds) == self.SEEDS:
                break

        # 2️⃣ Zoom each seed onto its constrained local minimum
        results = [self._zoom(x, *params[i]) for i in seeds]
        d = min(r[0] for r in results)
        feet = [self.point_at(np.array([u]), np.array([v]))[0] for dist, u, v in results if dist <= d + tol.eps_cluster]
        uniq = [feet[0]]
        for f in feet[1:]:
            if min(np.linalg.norm(f - g) for g in uniq) > tol.eps_cluster:
                uniq.append(f)
        return Projection(d, np.array(uniq))

    def nearest(self, x, tol, min_reps=MIN_REPS):
        return self._carrier_foot(x, tol, min_reps) or self._search(x, tol)

    def project_many(self, xs, tol):
        feet, ok = self._carrier_feet(xs)
        _, pts, tree, _, _ = self._grid
        if (~ok).any() and tree is not None:
            _, ii = tree.query(xs[~ok])
            feet[~ok] = pts[ii]
        return np.linalg.norm(xs - feet, axis=1), feet

    @abstractmethod
    def _carrier_feet(self, xs: NDArray) -> tuple[NDArray, NDArray]:
        ...

    def _boundary_conormals(self, a: Vec, n: Vec) -> list[Vec]:
        out = []
        for leaf in self.trims.active_leaves(a):
            nu = _conormal(leaf.gradient(a), n)
            if nu is not None:
                out.append(nu)
        return out

    def _normals(self, a, tol):
        n = self.carrier_normal(a)
        cones = [np.vstack([n, -n])]
        cones += [half_circle(n, nu) for nu in self._boundary_conormals(a, n)]
        return np.vstack(cones)

    def normal_gap(self, a, v, tol):
        n = self.carrier_normal(a)
        return _sheet_gap(v, n, self._boundary_conormals(a, n))

    def smooth_at(self, a, tol):
        return self.contains(a, tol) and not self._boundary_conormals(a, self.carrier_normal(a))

    def _project_to_carrier(self, pts: NDArray) -> NDArray:
        feet, _ = self._carrier_feet(pts, check=False)
        return feet

    def points_near(self, c, r, n, seed):
        cand = self._project_to_carrier(halton_ball(c, r, 16 * n, seed))
        U, V = np.array([self.params_of(p) for p in cand]).T if len(cand) else (np.array([]), np.array([]))
        ok = self.kept(cand, U, V) & (np.linalg.norm(cand - c, axis=1) <= r)
        return _spread(cand[ok], n)


class SpherePatch(_TrimmedSurface):
    kind = "sphere_patch"

    def __init__(self, spec: SpherePatchSpec):
        super().__init__(TrimSet.from_specs(spec.trims))
        self.c = np.asarray(spec.center, dtype=float)
        self.R = float(spec.radius)
        self.u_bounds = (0.0, math.pi)
        self.v_bounds = (0.0, TWO_PI)

    def _grid_shape(self):
        return 181, 360

    def point_at(self, u, v):
        u, v = np.atleast_1d(u), np.atleast_1d(v)
        return self.c + self.R * np.column_stack([np.sin(u) * np.cos(v), np.sin(u) * np.sin(v), np.cos(u)])

    def params_of(self, p):
        q = (p - self.c) / self.R
        return math.acos(float(np.clip(q[2], -1.0, 1.0))), math.atan2(q[1], q[0])

    def carrier_normal(self, p):
        return unit(p - self.c)

    def _carrier_feet(self, xs, check=True):
        q = xs - self.c
        rho = np.linalg.norm(q, axis=1)
        safe = np.where(rho > 0, rho, 1.0)
        feet = self.c + self.R * q / safe[:, None]
        ok = rho > 0
        if check:
            ok &= self.kept(feet)
        return feet, ok

    def _carrier_foot(self, x, tol, min_reps):
        q = x - self.c
        rho = float(np.linalg.norm(q))
        if rho <= tol.eps_dist:
            pts = self.c + self.R * fibonacci_sphere(512)
            pts = pts[self.kept(pts)]
            if len(pts) == 0:
                return None
            return Projection(self.R - rho, _spread(pts, max(min_reps, 32)), continuum=True)
        foot = self.c + self.R * q / rho
        if self.kept(foot[None, :])[0]:
            return Projection(abs(rho - self.R), foot[None, :])
        return None


class CylinderPatch(_TrimmedSurface):
    kind = "cylinder_patch"

    def __init__(self, spec: CylinderPatchSpec):
        super().__init__(TrimSet.from_specs(spec.trims))
        self.p = np.asarray(spec.point, dtype=float)
        self.d = unit(np.asarray(spec.direction, dtype=float))
        self.e1, self.e2 = orthonormal_frame(self.d)
        self.R = float(spec.radius)
        self.u_bounds = (float(spec.axial[0]), float(spec.axial[1]))
        if spec.angular is None:
            self.angular = None
            self.v_bounds = (0.0, TWO_PI)
        else:
            self.angular = (float(spec.angular[0]), float(spec.angular[1]))
            self.v_bounds = (self.angular[0], self.angular[0] + self.angular[1])
            self.v_periodic = self.angular[1] >= TWO_PI - 1e-12

    def _grid_shape(self):
        length = self.u_bounds[1] - self.u_bounds[0]
        return int(np.clip(math.ceil(length / (self.R * math.pi / 180.0)), 50, 400)), 360

    def point_at(self, u, v):
        u, v = np.atleast_1d(u), np.atleast_1d(v)
        return (self.p + u[:, None] * self.d
                + self.R * (np.cos(v)[:, None] * self.e1 + np.sin(v)[:, None] * self.e2))

    def _split(self, xs: NDArray):
        q = xs - self.p
        s = q @ self.d
        w = q - s[:, None] * self.d
        return s, w

    def params_of(self, p):
        s, w = self._split(p[None, :])
        return float(s[0]), math.atan2(float(w[0] @ self.e2), float(w[0] @ self.e1))

    def param_ok(self, U, V):
        ok = (U >= self.u_bounds[0] - 1e-12) & (U <= self.u_bounds[1] + 1e-12)
        if self.angular is not None and not self.v_periodic:
            ok &= np.mod(np.asarray(V) - self.angular[0], TWO_PI) <= self.angular[1] + 1e-12
        return ok

    def carrier_normal(self, p):
        _, w = self._split(p[None, :])
        return unit(w[0])

    def _carrier_feet(self, xs, check=True):
        s, w = self._split(xs)
        rho = np.linalg.norm(w, axis=1)
        safe = np.where(rho > 0, rho, 1.0)
        feet = self.p + s[:, None] * self.d + self.R * w / safe[:, None]
        ok = rho > 0
        if check:
            theta = np.arctan2(w @ self.e2, w @ self.e1)
            ok &= self.kept(feet, s, theta)
        return feet, ok

    def _carrier_foot(self, x, tol, min_reps):
        s, w = self._split(x[None, :])
        s, w = float(s[0]), w[0]
        rho = float(np.linalg.norm(w))
        if rho <= tol.eps_dist:
            count = max(min_reps, math.ceil(TWO_PI / CONTINUUM_SPACING))
            thetas = TWO_PI * np.arange(count) / count
            ring = self.point_at(np.full(count, s), thetas)
            ring = ring[self.kept(ring, np.full(count, s), thetas)]
            if len(ring) == 0:
                return None
            return Projection(self.R - rho, ring, continuum=len(ring) > 1)
        feet, ok = self._carrier_feet(x[None, :])
        if ok[0]:
            return Projection(abs(rho - self.R), feet)
        return None

    def _boundary_conormals(self, a, n):
        out = super()._boundary_conormals(a, n)
        s, theta = self.params_of(a)
        if abs(s - self.u_bounds[0]) <= ENDPOINT_SLACK:
            out.append(-self.d)
        if abs(s - self.u_bounds[1]) <= ENDPOINT_SLACK:
            out.append(self.d)
        if self.angular is not None and not self.v_periodic:
            e_theta = -math.sin(theta) * self.e1 + math.cos(theta) * self.e2
            off = float(np.mod(theta - self.angular[0], TWO_PI))
            if off <= ENDPOINT_SLACK or TWO_PI - off <= ENDPOINT_SLACK:
                out.append(-e_theta)
            if abs(off - self.angular[1]) <= ENDPOINT_SLACK:
                out.append(e_theta)
        return out


# ✅ === Planar polygons ===
class PlanePatch(Primitive):
    kind = "plane_patch"

    def __init__(self, spec: PlanePatchSpec):
        super().__init__(3)
        self.o = np.asarray(spec.point, dtype=float)
        self.n = unit(np.asarray(spec.normal, dtype=float))
        if spec.reference is not None:
            ref = np.asarray(spec.reference, dtype=float)
            self.e1 = unit(ref - (ref @ self.n) * self.n)
        else:
            self.e1, _ = orthonormal_frame(self.n)
        self.e2 = np.cross(self.n, self.e1)
        self.polygon = orient(Polygon(spec.polygon), sign=1.0)

    def _local(self, x: Vec) -> tuple[float, float, float]:
        q = x - self.o
        return float(q @ self.e1), float(q @ self.e2), float(q @ self.n)

    def _lift(self, u: float, v: float) -> Vec:
        return self.o + u * self.e1 + v * self.e2

    def nearest(self, x, tol, min_reps=MIN_REPS):
        u, v, h = self._local(x)
        pt = Point(u, v)
        if self.polygon.covers(pt):
            return Projection(abs(h), self._lift(u, v)[None, :])
        b = nearest_points(self.polygon.exterior, pt)[0]
        planar = pt.distance(b)
        return Projection(math.hypot(h, planar), self._lift(b.x, b.y)[None, :])

    def _edge_conormals(self, u: float, v: float) -> list[Vec]:
        coords = np.asarray(self.polygon.exterior.coords)
        out = []
        for p0, p1 in zip(coords[:-1], coords[1:]):
            seg = p1 - p0
            t = np.clip(np.dot([u - p0[0], v - p0[1]], seg) / np.dot(seg, seg), 0.0, 1.0)
            foot = p0 + t * seg
            if math.hypot(u - foot[0], v - foot[1]) <= ENDPOINT_SLACK:
                # Counter-clockwise ring: outward edge normal is (dv, -du)
                out.append(unit(seg[1] * self.e1 - seg[0] * self.e2))
        return out

    def _normals(self, a, tol):
        u, v, _ = self._local(a)
        cones = [np.vstack([self.n, -self.n])]
        cones += [half_circle(self.n, nu) for nu in self._edge_conormals(u, v)]
        return np.vstack(cones)

    def normal_gap(self, a, v, tol):
        u, w, _ = self._local(a)
        return _sheet_gap(v, self.n, self._edge_conormals(u, w))

    def smooth_at(self, a, tol):
        u, v, _ = self._local(a)
        return self.contains(a, tol) and not self._edge_conormals(u, v)

    def points_near(self, c, r, n, seed):
        pts = halton_ball(c, r, 16 * n, seed)
        h = (pts - self.o) @ self.n
        flat = pts - h[:, None] * self.n
        ok = np.array([self.polygon.covers(Point(*self._local(p)[:2])) for p in flat], dtype=bool)
        ok &= np.linalg.norm(flat - c, axis=1) <= r
        return _spread(flat[ok], n)


# ✅ === Factory ===
def build_primitive(spec: PrimitiveSpec, dim: int) -> Primitive:
    match spec.kind:
        case "point_set":
            return PointSet(spec.points, dim)
        case "segment":
            return LinePrimitive.segment(spec.start, spec.end, dim)
        case "line":
            return LinePrimitive(spec.point, spec.direction, dim, spec.t_min, spec.t_max)
        case "arc":
            return ArcPrimitive(spec, dim)
        case "sphere_patch":
            return SpherePatch(spec)
        case "cylinder_patch":
            return CylinderPatch(spec)
        case "plane_patch":
            return PlanePatch(spec)
        case "sampled_curve":
            return SampledCurve(spec, dim)
    raise ValueError(f"unknown primitive kind {spec.kind}")
