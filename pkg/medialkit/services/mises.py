"""
One-sided directional derivatives of the distance function.

    D_v d(a) = min over x in m(a) of −<v, (x − a)/|x − a|>

cross-checked by one-sided finite differences and by the rescaled
sphere-distance form ½(d(v, m̂)² − |v|² − 1).
"""
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from medialkit.core.errors import OnX, ValidationError
from medialkit.core.numeric import Tolerances, Vec, as_vec, default_tolerances, is_unit
from medialkit.services.nearest import NearestSet, nearest_set
from medialkit.services.scene import SceneView


@dataclass(frozen=True, eq=False)
class DerivativeResult:
    base: Vec
    direction: Vec
    value: float
    witnesses: NDArray


@dataclass(frozen=True, eq=False)
class FiniteDifference:
    value: float
    richardson: float
    h: float


def _off_x(s: SceneView, a: Vec, tol: Tolerances) -> NearestSet:
    ns = nearest_set(s, a, tol)
    if ns.distance <= tol.eps_dist:
        raise OnX("directional derivatives are taken off X", point=a)
    return ns


def directional_derivative(s: SceneView, a, v, tol: Tolerances) -> DerivativeResult:
    a, v = as_vec(a, s.dim), as_vec(v, s.dim)
    if not is_unit(v, tol):
        raise ValidationError("direction must be a unit vector")
    ns = _off_x(s, a, tol)

    members = ns.members
    rel = members - a
    values = -(rel / np.linalg.norm(rel, axis=1)[:, None]) @ v
    best = float(values.min())
    return DerivativeResult(base=a, direction=v, value=best, witnesses=members[values <= best + tol.eps_dist])


def directional_derivative_fd(s: SceneView, a, v, h: float = 1e-6, tol: Tolerances | None = None) -> float:
    return finite_difference(s, a, v, h, tol).value


def finite_difference(s: SceneView, a, v, h: float = 1e-6, tol: Tolerances | None = None) -> FiniteDifference:
    """One-sided quotient at h plus the Richardson combination with 2h."""
    tol = tol or default_tolerances()
    if h <= 0:
        raise ValidationError("finite-difference step must be positive")
    a, v = as_vec(a, s.dim), as_vec(v, s.dim)
    d0 = s.distance(a, tol)
    if d0 <= tol.eps_dist:
        raise OnX("directional derivatives are taken off X", point=a)
    q1 = (s.distance(a + h * v, tol) - d0) / h
    q2 = (s.distance(a + 2 * h * v, tol) - d0) / (2 * h)
    return FiniteDifference(value=q1, richardson=2 * q1 - q2, h=h)


def derivative_via_sphere(s: SceneView, a, v, tol: Tolerances) -> float:
    a, v = as_vec(a, s.dim), as_vec(v, s.dim)
    ns = _off_x(s, a, tol)
    rescaled = (ns.members - a) / ns.distance
    nearest_sq = float(np.min(np.sum((rescaled - v) ** 2, axis=1)))
    return 0.5 * (nearest_sq - float(v @ v) - 1.0)
