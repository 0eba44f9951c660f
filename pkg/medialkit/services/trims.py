"""
Closed trim predicates g(p) <= 0 cutting patches out of their carriers.
"""
from abc import ABC, abstractmethod

import numpy as np
from numpy.typing import NDArray

from medialkit.core.numeric import TRIM_SLACK, Vec, unit
from medialkit.schemas.scene import TrimSpec


ACTIVE_SLACK = 1e-9


class Trim(ABC):
    @abstractmethod
    def value(self, pts: NDArray) -> NDArray:
        """g over an (m, 3) array; the trim keeps g <= 0."""

    @abstractmethod
    def gradient(self, p: Vec) -> Vec:
        ...

    def active_leaves(self, p: Vec) -> list["Trim"]:
        """Simple trims whose boundary passes through p."""
        g = float(self.value(p[None, :])[0])
        return [self] if abs(g) <= ACTIVE_SLACK else []


class Halfspace(Trim):
    def __init__(self, normal: Vec, offset: float):
        self.normal = np.asarray(normal, dtype=float)
        self.offset = float(offset)

    def value(self, pts):
        return pts @ self.normal - self.offset

    def gradient(self, p):
        return self.normal


class SphereTrim(Trim):
    def __init__(self, center: Vec, radius: float, inside: bool):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.sign = 1.0 if inside else -1.0

    def value(self, pts):
        return self.sign * (np.linalg.norm(pts - self.center, axis=1) - self.radius)

    def gradient(self, p):
        r = p - self.center
        n = np.linalg.norm(r)
        return self.sign * r / n if n > 0 else np.zeros_like(p)


class CylinderTrim(Trim):
    def __init__(self, point: Vec, direction: Vec, radius: float, inside: bool):
        self.point = np.asarray(point, dtype=float)
        self.direction = unit(np.asarray(direction, dtype=float))
        self.radius = float(radius)
        self.sign = 1.0 if inside else -1.0

    def _radial(self, pts):
        q = pts - self.point
        return q - np.outer(q @ self.direction, self.direction)

    def value(self, pts):
        return self.sign * (np.linalg.norm(self._radial(pts), axis=1) - self.radius)

    def gradient(self, p):
        w = self._radial(p[None, :])[0]
        n = np.linalg.norm(w)
        return self.sign * w / n if n > 0 else np.zeros_like(p)


class AnyOf(Trim):
    def __init__(self, parts: list[Trim]):
        self.parts = parts

    def value(self, pts):
        return np.min(np.vstack([t.value(pts) for t in self.parts]), axis=0)

    def gradient(self, p):
        vals = [float(t.value(p[None, :])[0]) for t in self.parts]
        return self.parts[int(np.argmin(vals))].gradient(p)

    def active_leaves(self, p):
        g = float(self.value(p[None, :])[0])
        if abs(g) > ACTIVE_SLACK:
            return []
        return [leaf for t in self.parts for leaf in t.active_leaves(p)]


def compile_trim(spec: TrimSpec) -> Trim:
    match spec.kind:
        case "halfspace":
            return Halfspace(spec.normal, spec.offset)
        case "inside_sphere":
            return SphereTrim(spec.center, spec.radius, inside=True)
        case "outside_sphere":
            return SphereTrim(spec.center, spec.radius, inside=False)
        case "inside_cylinder":
            return CylinderTrim(spec.point, spec.direction, spec.radius, inside=True)
        case "outside_cylinder":
            return CylinderTrim(spec.point, spec.direction, spec.radius, inside=False)
        case "any_of":
            return AnyOf([compile_trim(t) for t in spec.trims])
    raise ValueError(f"unknown trim kind {spec.kind}")


class TrimSet:
    """Intersection of the listed trims (an empty list keeps everything)."""

    def __init__(self, trims: list[Trim]):
        self.trims = trims

    @classmethod
    def from_specs(cls, specs: list[TrimSpec]) -> "TrimSet":
        return cls([compile_trim(s) for s in specs])

    def value(self, pts: NDArray) -> NDArray:
        if not self.trims:
            return np.full(len(pts), -np.inf)
        return np.max(np.vstack([t.value(pts) for t in self.trims]), axis=0)

    def kept(self, pts: NDArray) -> NDArray:
        return self.value(pts) <= TRIM_SLACK

    def active_leaves(self, p: Vec) -> list[Trim]:
        return [leaf for t in self.trims for leaf in t.active_leaves(p)]
