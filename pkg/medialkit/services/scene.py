"""
Scenes: a closed set X as a finite union of exact primitives, plus the
document parser for `.scene` files.
"""
import json
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from pydantic import ValidationError as PydanticValidationError

from medialkit.core.errors import ParseError, ValidationError
from medialkit.core.logging.run_logger import get_run_logger
from medialkit.core.numeric import MIN_REPS, Tolerances, Vec, as_vec, spread_indices
from medialkit.schemas.scene import SceneSpec
from medialkit.services.primitives import Primitive, build_primitive


logger = get_run_logger("scene")

# pydantic error types that mean "not a scene document" rather than "bad value"
_STRUCTURAL_ERRORS = {
    "missing", "extra_forbidden", "model_type", "list_type", "tuple_type", "dict_type",
    "union_tag_invalid", "union_tag_not_found", "float_type", "float_parsing",
    "int_type", "int_parsing", "string_type",
}


@dataclass(frozen=True, eq=False)
class Gathered:
    """Raw nearest points of a view before clustering."""
    distance: float
    points: NDArray
    labels: NDArray
    continuum: bool
    continuum_labels: tuple[int, ...] = ()


# ✅ === Views ===
class SceneView(ABC):
    """Anything with a distance function and nearest points: a scene or a virtual offset of one."""

    name: str
    dim: int

    @abstractmethod
    def distance(self, x: Vec, tol: Tolerances) -> float:
        ...

    @abstractmethod
    def gather(self, x: Vec, tol: Tolerances, min_reps: int = MIN_REPS) -> Gathered:
        ...

    @abstractmethod
    def project_many(self, xs: NDArray, tol: Tolerances) -> tuple[NDArray, NDArray]:
        """Row-wise distance and one nearest point, for grid scans."""

    @abstractmethod
    def raw_normals(self, a: Vec, tol: Tolerances) -> NDArray:
        """Union of the sampled normal cones of every piece through a (unfiltered)."""

    @abstractmethod
    def sample_near(self, c: Vec, r: float, n: int, tol: Tolerances) -> NDArray:
        """Up to n points of the set inside B(c, r), c itself excluded."""

    def normal_gap(self, a: Vec, v: Vec, tol: Tolerances) -> float:
        """Chord distance from the unit vector v to the sampled normal directions at a."""
        raw = self.raw_normals(a, tol)
        if len(raw) == 0:
            return math.inf
        return float(np.min(np.linalg.norm(raw - v, axis=1)))

    def smooth_at(self, a: Vec, tol: Tolerances) -> bool:
        return False


def finish_samples(pts: NDArray, c: Vec, n: int, tol: Tolerances) -> NDArray:
    if len(pts) == 0:
        return pts.reshape(0, c.size)
    pts = pts[np.linalg.norm(pts - c, axis=1) > tol.eps_dist]
    _, idx = np.unique(np.round(pts / tol.eps_dist).astype(np.int64), axis=0, return_index=True)
    pts = pts[np.sort(idx)]
    return pts[spread_indices(len(pts), n)]


class Scene(SceneView):
    def __init__(self, name: str, dim: int, primitives: tuple[Primitive, ...], spec: SceneSpec | None = None):
        self.name = name
        self.dim = dim
        self.primitives = primitives
        self.spec = spec

    def __repr__(self) -> str:
        return f"Scene({self.name!r}, dim={self.dim}, primitives={len(self.primitives)})"

    def distance(self, x, tol):
        return min(p.distance(x, tol) for p in self.primitives)

    def gather(self, x, tol, min_reps=MIN_REPS):
        projections = [p.nearest(x, tol, min_reps) for p in self.primitives]
        d = min(pr.distance for pr in projections)

        points, labels, continuum_labels = [], [], []
        for i, pr in enumerate(projections):
            if pr.distance <= d + tol.eps_cluster and len(pr.points):
                points.append(pr.points)
                labels.append(np.full(len(pr.points), i))
                if pr.continuum:
                    continuum_labels.append(i)

        return Gathered(
            distance=d,
            points=np.vstack(points),
            labels=np.concatenate(labels),
            continuum=bool(continuum_labels),
            continuum_labels=tuple(continuum_labels),
        )

    def project_many(self, xs, tol):
        best = np.full(len(xs), np.inf)
        feet = np.zeros_like(xs)
        for p in self.primitives:
            d, f = p.project_many(xs, tol)
            closer = d < best
            best[closer] = d[closer]
            feet[closer] = f[closer]
        return best, feet

    def pieces_through(self, a: Vec, tol: Tolerances) -> list[Primitive]:
        return [p for p in self.primitives if p.contains(a, tol)]

    def raw_normals(self, a, tol):
        fans = [p.normals(a, tol) for p in self.pieces_through(a, tol)]
        return np.vstack(fans) if fans else np.empty((0, self.dim))

    def normal_gap(self, a, v, tol):
        """Exact per-piece gaps; a direction normal to X is normal to every piece through a."""
        pieces = self.pieces_through(a, tol)
        if not pieces:
            return math.inf
        return max(p.normal_gap(a, v, tol) for p in pieces)

    def sample_near(self, c, r, n, tol):
        parts = [p.points_near(c, r, n, tol.seed) for p in self.primitives]
        parts = [q for q in parts if len(q)]
        return finish_samples(np.vstack(parts) if parts else np.empty((0, self.dim)), c, n, tol)

    def smooth_at(self, a, tol):
        pieces = self.pieces_through(a, tol)
        return len(pieces) == 1 and pieces[0].smooth_at(a, tol)


# ✅ === Parsing ===
def _first_error(exc: PydanticValidationError) -> tuple[str, str]:
    err = exc.errors()[0]
    where = ".".join(str(p) for p in err["loc"]) or "document"
    return err["type"], f"{where}: {err['msg']}"


def parse_scene(text: str) -> Scene:
    # 1️⃣ Syntax
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"scene document is not valid JSON: {exc.msg} (line {exc.lineno})") from exc
    if not isinstance(doc, dict):
        raise ParseError("scene document must be a JSON object")

    # 2️⃣ Schema and invariants
    try:
        spec = SceneSpec.model_validate(doc)
    except PydanticValidationError as exc:
        kind, message = _first_error(exc)
        if kind in _STRUCTURAL_ERRORS:
            raise ParseError(message) from exc
        raise ValidationError(message) from exc

    # 3️⃣ Exact primitives
    scene = Scene(
        name=spec.name,
        dim=spec.dim,
        primitives=tuple(build_primitive(p, spec.dim) for p in spec.primitives),
        spec=spec,
    )
    logger.debug("scene parsed", extra={"event": "scene_parsed", "primitives": len(scene.primitives)})
    return scene


def load_scene(path: str | Path) -> Scene:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read scene file {path}: {exc.strerror}") from exc
    return parse_scene(text)


# ✅ === Per-primitive queries ===
def primitive_nearest(p: Primitive, x, tol: Tolerances) -> tuple[float, list[Vec]]:
    pr = p.nearest(as_vec(x, p.dim), tol)
    return pr.distance, list(pr.points)


def primitive_normals(p: Primitive, a, tol: Tolerances) -> list[Vec]:
    return list(p.normals(as_vec(a, p.dim), tol))
