import math
from typing import Annotated, Literal, Optional, Union

from pydantic import AfterValidator, BaseModel, ConfigDict, Field, model_validator


Coords = Annotated[list[float], Field(min_length=2, max_length=3)]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    def coordinate_fields(self) -> list[list[float]]:
        """Coordinate lists that must match the scene dimension."""
        return []


def _nonzero(v: list[float]) -> list[float]:
    if all(c == 0.0 for c in v):
        raise ValueError("direction must be nonzero")
    return v


Direction = Annotated[Coords, AfterValidator(_nonzero)]


# ✅ === Trims: closed sets {p : g(p) <= 0} ===
class HalfspaceTrim(_Strict):
    kind: Literal["halfspace"]
    normal: Direction
    offset: float = Field(0.0, description="keeps <normal, p> <= offset")

    def coordinate_fields(self):
        return [self.normal]


class InsideSphereTrim(_Strict):
    kind: Literal["inside_sphere"]
    center: Coords
    radius: float = Field(gt=0)

    def coordinate_fields(self):
        return [self.center]


class OutsideSphereTrim(_Strict):
    kind: Literal["outside_sphere"]
    center: Coords
    radius: float = Field(gt=0)

    def coordinate_fields(self):
        return [self.center]


class InsideCylinderTrim(_Strict):
    kind: Literal["inside_cylinder"]
    point: Coords
    direction: Direction
    radius: float = Field(gt=0)

    def coordinate_fields(self):
        return [self.point, self.direction]


class OutsideCylinderTrim(_Strict):
    kind: Literal["outside_cylinder"]
    point: Coords
    direction: Direction
    radius: float = Field(gt=0)

    def coordinate_fields(self):
        return [self.point, self.direction]


class AnyOfTrim(_Strict):
    """Union of trims: keeps points inside at least one of them."""
    kind: Literal["any_of"]
    trims: list["TrimSpec"] = Field(min_length=1)

    def coordinate_fields(self):
        return [c for t in self.trims for c in t.coordinate_fields()]


TrimSpec = Annotated[
    Union[HalfspaceTrim, InsideSphereTrim, OutsideSphereTrim, InsideCylinderTrim, OutsideCylinderTrim, AnyOfTrim],
    Field(discriminator="kind"),
]
AnyOfTrim.model_rebuild()


# ✅ === Primitives ===
class PointSetSpec(_Strict):
    kind: Literal["point_set"]
    points: list[Coords] = Field(min_length=1)

    def coordinate_fields(self):
        return list(self.points)


class SegmentSpec(_Strict):
    kind: Literal["segment"]
    start: Coords
    end: Coords

    @model_validator(mode="after")
    def validate_distinct(self):
        if self.start == self.end:
            raise ValueError("segment endpoints must differ")
        return self

    def coordinate_fields(self):
        return [self.start, self.end]


class LineSpec(_Strict):
    kind: Literal["line"]
    point: Coords
    direction: Direction
    t_min: Optional[float] = Field(None, description="lower parameter bound, null = unbounded")
    t_max: Optional[float] = Field(None, description="upper parameter bound, null = unbounded")

    @model_validator(mode="after")
    def validate_bounds(self):
        if self.t_min is not None and self.t_max is not None and self.t_min >= self.t_max:
            raise ValueError("line bounds need t_min < t_max")
        return self

    def coordinate_fields(self):
        return [self.point, self.direction]


class ArcSpec(_Strict):
    kind: Literal["arc"]
    center: Coords
    radius: float = Field(gt=0)
    start: float = Field(0.0, description="start angle, radians")
    sweep: float = Field(2 * math.pi, gt=0, le=2 * math.pi + 1e-12, description="angular extent, radians")
    normal: Optional[Coords] = Field(None, description="carrier-plane normal (R^3 only)")
    reference: Optional[Coords] = Field(None, description="direction of angle 0 in the carrier plane (R^3 only)")

    def coordinate_fields(self):
        return [self.center] + [c for c in (self.normal, self.reference) if c is not None]


class SpherePatchSpec(_Strict):
    kind: Literal["sphere_patch"]
    center: Coords
    radius: float = Field(gt=0)
    trims: list[TrimSpec] = Field(default_factory=list)

    def coordinate_fields(self):
        return [self.center] + [c for t in self.trims for c in t.coordinate_fields()]


class CylinderPatchSpec(_Strict):
    kind: Literal["cylinder_patch"]
    point: Coords
    direction: Direction
    radius: float = Field(gt=0)
    axial: tuple[float, float] = Field(description="axial parameter range along the unit direction")
    angular: Optional[tuple[float, float]] = Field(None, description="(start, sweep) around the axis")
    trims: list[TrimSpec] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_ranges(self):
        if self.axial[0] >= self.axial[1]:
            raise ValueError("cylinder axial range must be increasing")
        if self.angular is not None and not (0 < self.angular[1] <= 2 * math.pi + 1e-12):
            raise ValueError("cylinder angular sweep must lie in (0, 2π]")
        return self

    def coordinate_fields(self):
        return [self.point, self.direction] + [c for t in self.trims for c in t.coordinate_fields()]


class PlanePatchSpec(_Strict):
    kind: Literal["plane_patch"]
    point: Coords
    normal: Direction
    polygon: list[tuple[float, float]] = Field(min_length=3, description="trim polygon in plane coordinates")
    reference: Optional[Coords] = None

    def coordinate_fields(self):
        return [self.point, self.normal] + ([self.reference] if self.reference else [])


class SampledCurveSpec(_Strict):
    kind: Literal["sampled_curve"]
    points: list[Coords] = Field(min_length=2)
    refine: int = Field(32, ge=4, le=4096, description="coarse search samples per knot interval")

    @model_validator(mode="after")
    def validate_distinct(self):
        if len({tuple(p) for p in self.points}) < 2:
            raise ValueError("sampled curve needs at least 2 distinct points")
        for p, q in zip(self.points, self.points[1:]):
            if p == q:
                raise ValueError("consecutive curve points must differ")
        return self

    def coordinate_fields(self):
        return list(self.points)


PrimitiveSpec = Annotated[
    Union[
        PointSetSpec, SegmentSpec, LineSpec, ArcSpec,
        SpherePatchSpec, CylinderPatchSpec, PlanePatchSpec, SampledCurveSpec,
    ],
    Field(discriminator="kind"),
]

SURFACE_KINDS = {"sphere_patch", "cylinder_patch", "plane_patch"}


# ✅ Scene document
class SceneSpec(_Strict):
    name: str = Field(min_length=1)
    dim: Literal[2, 3]
    primitives: list[PrimitiveSpec] = Field(min_length=1)

    @model_validator(mode="after")
    def validate_dimensions(self):
        for i, prim in enumerate(self.primitives):
            for coords in prim.coordinate_fields():
                if len(coords) != self.dim:
                    raise ValueError(
                        f"primitive {i} ({prim.kind}) has {len(coords)} coordinates in a {self.dim}D scene"
                    )
            if prim.kind in SURFACE_KINDS and self.dim != 3:
                raise ValueError(f"primitive {i}: {prim.kind} needs a 3D scene")
            if prim.kind == "arc" and self.dim == 3 and prim.normal is None:
                raise ValueError(f"primitive {i}: a 3D arc needs its carrier normal")
        return self
