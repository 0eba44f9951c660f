"""
Shared numeric vocabulary: vectors, the tolerance policy and the
deterministic direction/point samplers every service builds on.
"""
import math
from typing import Iterable

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic import ValidationError as PydanticValidationError
from scipy.stats import qmc

from medialkit.core.errors import ValidationError


Vec = NDArray[np.float64]

# == Fan densities ==
FAN_2D = 16
FAN_3D = 64
CURVE_FAN_3D = 16
HALF_FAN = 17

# == Continuum representatives ==
CONTINUUM_SPACING = 0.4
MIN_REPS = 8
MAX_CLUSTERS = 64

# g(p) <= TRIM_SLACK counts as inside a closed trim
TRIM_SLACK = 1e-12


# ✅ === Tolerance policy ===
class Tolerances(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    eps_dist: float = Field(1e-9, gt=0, description="distance agreement")
    eps_cluster: float = Field(1e-5, gt=0, description="nearest-point cluster merge radius")
    eps_unit: float = Field(1e-9, gt=0, description="unit-vector normalization slack")
    sep_tol: float = Field(1e-3, gt=0, description="medial-axis separation threshold")
    t_max: float = Field(1e6, gt=0, description="cap standing for an infinite reaching radius")
    seed: int = Field(42, description="deterministic sampling seed")

    @model_validator(mode="after")
    def validate_chain(self):
        if not (self.eps_dist < self.eps_cluster < self.sep_tol < self.t_max):
            raise ValueError("tolerances must satisfy eps_dist < eps_cluster < sep_tol < t_max")
        return self


def default_tolerances() -> Tolerances:
    return Tolerances()


def make_tolerances(**overrides) -> Tolerances:
    """Build a Tolerances, reporting broken invariants as our ValidationError."""
    try:
        return Tolerances(**overrides)
    except PydanticValidationError as exc:
        raise ValidationError(f"invalid tolerances: {exc.errors()[0]['msg']}") from exc


def is_unbounded(r: float, tol: Tolerances) -> bool:
    return r >= tol.t_max


def radius_value(r: float, tol: Tolerances) -> float | str:
    """JSON-friendly radius: the t_max sentinel prints as "unbounded"."""
    return "unbounded" if is_unbounded(r, tol) else float(r)


# ✅ === Vectors ===
def as_vec(x: Iterable[float], dim: int | None = None) -> Vec:
    v = np.asarray(list(x) if not isinstance(x, np.ndarray) else x, dtype=float).reshape(-1)
    if v.size not in (2, 3):
        raise ValidationError(f"points live in R^2 or R^3, got {v.size} coordinates")
    if dim is not None and v.size != dim:
        raise ValidationError(f"expected {dim} coordinates, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValidationError("coordinates must be finite")
    return v


def unit(v: Vec) -> Vec:
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValidationError("cannot normalize the zero vector")
    return v / n


def is_unit(v: Vec, tol: Tolerances) -> bool:
    return abs(float(np.linalg.norm(v)) - 1.0) <= tol.eps_unit


def angle_between(u: Vec, v: Vec) -> float:
    c = float(np.clip(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)), -1.0, 1.0))
    return math.acos(c)


def chord_to_angle(chord: NDArray | float) -> NDArray | float:
    return 2.0 * np.arcsin(np.clip(np.asarray(chord) / 2.0, 0.0, 1.0))


def orthonormal_frame(v: Vec) -> tuple[Vec, Vec]:
    """Two unit vectors completing unit(v) to a right-handed frame of R^3."""
    d = unit(np.asarray(v, dtype=float))
    helper = np.zeros(3)
    helper[int(np.argmin(np.abs(d)))] = 1.0
    e1 = unit(np.cross(d, helper))
    e2 = np.cross(d, e1)
    return e1, e2


# ✅ === Direction samplers ===
def circle_directions(n: int, offset: float = 0.0) -> NDArray:
    t = offset + 2.0 * math.pi * np.arange(n) / n
    return np.column_stack([np.cos(t), np.sin(t)])


def normal_circle(tangent: Vec, n: int = CURVE_FAN_3D) -> NDArray:
    """Unit directions of the plane orthogonal to a 3D tangent."""
    e1, e2 = orthonormal_frame(tangent)
    c = circle_directions(n)
    return c[:, :1] * e1 + c[:, 1:] * e2


def half_circle(n_axis: Vec, nu: Vec, count: int = HALF_FAN) -> NDArray:
    """Half great circle from n_axis through nu to -n_axis (n_axis ⟂ nu, both unit)."""
    t = np.linspace(0.0, math.pi, count)
    return np.cos(t)[:, None] * n_axis + np.sin(t)[:, None] * nu


def fibonacci_sphere(n: int) -> NDArray:
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def latlong_grid(step: float) -> NDArray:
    """Sphere directions on latitude rings spaced `step` radians, rings sampled at the same arc spacing."""
    rings = []
    n_lat = int(round(math.pi / step))
    for k in range(n_lat + 1):
        lat = -math.pi / 2 + k * math.pi / n_lat
        c = math.cos(lat)
        count = max(1, int(math.ceil(2 * math.pi * c / step))) if c > 1e-12 else 1
        lon = 2 * math.pi * np.arange(count) / count
        rings.append(np.column_stack([c * np.cos(lon), c * np.sin(lon), np.full(count, math.sin(lat))]))
    return np.vstack(rings)


def full_fan(dim: int) -> NDArray:
    return circle_directions(FAN_2D) if dim == 2 else fibonacci_sphere(FAN_3D)


# ✅ === Point samplers ===
def halton_ball(center: Vec, radius: float, n: int, seed: int) -> NDArray:
    """Deterministic low-discrepancy points filling B(center, radius)."""
    dim = center.size
    sampler = qmc.Halton(d=dim, scramble=True, seed=seed)
    pts = np.empty((0, dim))
    while len(pts) < n:
        cube = 2.0 * sampler.random(2 * n) - 1.0
        pts = np.vstack([pts, cube[np.sum(cube * cube, axis=1) <= 1.0]])
    return center + radius * pts[:n]


def spread_indices(total: int, k: int) -> NDArray:
    """k indices spread evenly over range(total) (all of them when total <= k)."""
    if total <= k:
        return np.arange(total)
    return np.unique(np.round(np.linspace(0, total - 1, k)).astype(int))


def unique_directions(dirs: NDArray, resolution: float = 1e-9) -> NDArray:
    if len(dirs) == 0:
        return dirs
    keys = np.round(dirs / resolution).astype(np.int64)
    _, idx = np.unique(keys, axis=0, return_index=True)
    return dirs[np.sort(idx)]
