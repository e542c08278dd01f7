"""Exception types shared across the package.

Every error carries a stable machine-readable ``code`` so the CLI can emit
parsable diagnostics without string-matching messages.
"""


class IdrankError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class NonFiniteInput(IdrankError):
    """Input coordinates contain NaN or infinity."""

    code = "non_finite_input"


class TooFewPoints(IdrankError):
    """Not enough (distinct) points or ratios for the requested operation."""

    code = "too_few_points"


class InvalidRatio(IdrankError):
    """A neighbor-distance ratio below 1 was supplied."""

    code = "invalid_ratio"


class DegenerateInput(IdrankError):
    """All ratios equal 1, so the dimension estimate is undefined."""

    code = "degenerate_input"


class InvalidSpec(IdrankError):
    """A synthetic-manifold spec violates its invariants."""

    code = "invalid_spec"


class FormatError(IdrankError):
    """A file does not conform to its declared format."""

    code = "format_error"


class DimensionMismatch(IdrankError):
    """Layers of a hidden-state set disagree on the number of points."""

    code = "dimension_mismatch"


class LengthMismatch(IdrankError):
    code = "length_mismatch"


class ZeroRank(IdrankError):
    """A planned adapter rank came out zero (possible only at offset 0)."""

    code = "zero_rank"


class ShapeMismatch(IdrankError):
    code = "shape_mismatch"


class LayerEstimationError(IdrankError):
    """Estimation failed for one layer of a hidden-state set."""

    code = "layer_estimation_error"

    def __init__(self, layer: int, message: str):
        super().__init__(f"layer {layer}: {message}")
        self.layer = layer
