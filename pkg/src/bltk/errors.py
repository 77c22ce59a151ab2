"""Exception taxonomy shared across the toolkit.

Every failure mode that callers are expected to branch on gets its own
class; plain ValueError is reserved for programming errors (bad shapes,
malformed arguments) that no caller should catch.
"""


class BltkError(Exception):
    """Base class for all toolkit-specific failures."""


class DimensionMismatch(BltkError):
    """Inputs live in incompatible ambient dimensions or sizes."""


class RankDeficient(BltkError):
    """A vector family or matrix that must have full rank does not."""


class IllConditioned(BltkError):
    """A matrix inversion was refused because the condition number is too large."""


class UnboundedBody(BltkError):
    """A gauge vanished on some direction, so the body is not bounded."""


class IdenticallyZero(BltkError):
    """A polynomial that must be nonzero vanishes identically."""


class DegreeOverflow(BltkError):
    """A polynomial operation would exceed the supported degree cap."""


class UnsupportedShapes(BltkError):
    """No intersection counter is available for this combination of patches."""


class Unsupported(BltkError):
    """The exact combinatorial search is out of range for this input size."""


class HypothesisViolated(BltkError):
    """A stated hypothesis (e.g. directed volume >= 1 on unit directions) fails."""


class ScalingMismatch(BltkError):
    """Exponents and dimensions fail the exact scaling balance."""


class SingularDenominator(BltkError):
    """The quadratic form in a ratio denominator is numerically singular."""


class EmptyFamily(BltkError):
    """A slab family that must be nonempty has no members."""


class InfiniteBLConstant(BltkError):
    """An operation requiring a finite constant received divergent data."""


class ConfigError(BltkError):
    """A run configuration is malformed (unknown field, bad schema, bad value)."""
