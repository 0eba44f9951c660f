from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic import ValidationError as PydanticValidationError

from medialkit.core.errors import EmptyRegion, ValidationError


class Region(BaseModel):
    """Axis-aligned scan box with its grid step."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    lo: tuple[float, ...] = Field(min_length=2, max_length=3)
    hi: tuple[float, ...] = Field(min_length=2, max_length=3)
    step: float = Field(gt=0)

    @model_validator(mode="after")
    def validate_box(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("box corners must have the same dimension")
        if any(l >= h for l, h in zip(self.lo, self.hi)):
            raise EmptyRegion(f"box has no extent: lo={self.lo} hi={self.hi}")
        return self

    @property
    def dim(self) -> int:
        return len(self.lo)

    def axes(self) -> list[np.ndarray]:
        out = []
        for l, h in zip(self.lo, self.hi):
            count = int(np.floor((h - l) / self.step + 1e-9)) + 1
            out.append(l + self.step * np.arange(count))
        return out

    def contains(self, pts: np.ndarray, pad: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return np.all((pts >= np.asarray(self.lo) - pad) & (pts <= np.asarray(self.hi) + pad), axis=1)


def make_region(box: Sequence[float], step: float) -> Region:
    """Region from a flat lo..., hi... list."""
    if len(box) not in (4, 6):
        raise ValidationError("box needs 4 (R^2) or 6 (R^3) numbers: lo coordinates then hi coordinates")
    half = len(box) // 2
    try:
        return Region(lo=tuple(box[:half]), hi=tuple(box[half:]), step=step)
    except PydanticValidationError as exc:
        raise ValidationError(f"invalid region: {exc.errors()[0]['msg']}") from exc
