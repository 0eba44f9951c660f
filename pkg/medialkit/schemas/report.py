import math
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


def to_plain(value: Any) -> Any:
    """numpy scalars/arrays and tuples into JSON-ready Python values."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else str(v)
    if isinstance(value, BaseModel):
        return to_plain(value.model_dump(by_alias=True))
    return value


class _Plain(BaseModel):
    @field_validator("*", mode="before")
    @classmethod
    def plain_values(cls, v):
        return to_plain(v)


# ✅ Result of one property probe inside a service
class CheckReport(_Plain):
    name: str
    checked: int = 0
    violations: list[dict[str, Any]] = Field(default_factory=list)
    details: dict[str, Any] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations


# ✅ One asserted comparison
class Assertion(_Plain):
    model_config = ConfigDict(populate_by_name=True)

    name: str
    expected: Any = None
    actual: Any = None
    tolerance: Any = None
    passed: bool = Field(alias="pass")


# ✅ Command output
class Report(_Plain):
    """
    Common report document.
    Field order is the serialization order; the exit status is the
    conjunction of the assertion passes.
    """

    command: str
    scene: str
    parameters: dict[str, Any] = Field(default_factory=dict)
    results: dict[str, Any] = Field(default_factory=dict)
    assertions: list[Assertion] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def check(self, name: str, *, expected: Any, actual: Any, tolerance: Any, passed: bool) -> bool:
        self.assertions.append(
            Assertion(name=name, expected=expected, actual=actual, tolerance=tolerance, passed=bool(passed))
        )
        return bool(passed)

    def absorb(self, probe: CheckReport, prefix: str = "") -> bool:
        """Turns a probe into one assertion: zero violations expected."""
        name = f"{prefix}{probe.name}" if prefix else probe.name
        return self.check(
            name,
            expected={"violations": 0},
            actual={"violations": len(probe.violations), "checked": probe.checked,
                    "first": probe.violations[:3], **probe.details},
            tolerance=probe.details.get("tolerance"),
            passed=probe.passed,
        )
