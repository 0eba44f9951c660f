from typing import Sequence


# ✅ === Base error ===
class MedialKitError(Exception):
    """
    Root of every error raised by medialkit.

    Geometry errors carry the offending point so the CLI can echo it back.
    """

    def __init__(self, message: str, *, point: Sequence[float] | None = None):
        super().__init__(message)
        self.point = None if point is None else tuple(float(c) for c in point)

    def __str__(self) -> str:
        base = super().__str__()
        if self.point is None:
            return base
        coords = ", ".join(f"{c:.6g}" for c in self.point)
        return f"{base} (at {coords})"


# ✅ === Input errors ===
class ParseError(MedialKitError):
    """Malformed scene document."""


class ValidationError(MedialKitError):
    """A document or value breaks a domain invariant."""


class EmptyRegion(MedialKitError):
    """Scan box with no extent along some axis."""


# ✅ === Geometry errors ===
class OffPrimitive(MedialKitError):
    pass


class NotOnX(MedialKitError):
    pass


class OnX(MedialKitError):
    pass


class ProbeOnX(MedialKitError):
    pass


class OnMedial(MedialKitError):
    pass


class BadWitness(MedialKitError):
    pass


class NoCrossing(MedialKitError):
    pass


class NotNormal(MedialKitError):
    pass


class DirectionNotLimiting(MedialKitError):
    pass


class RadiusTooSmall(MedialKitError):
    pass


# ✅ === Sampling errors ===
class TooFewSamples(MedialKitError):
    pass


class EmptyCloud(MedialKitError):
    pass
