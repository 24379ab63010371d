"""Exception hierarchy shared across the toolkit."""


class CadError(Exception):
    """Base class for all toolkit errors."""


class QuantizationError(CadError):
    """Invalid quantization range (lo >= hi)."""


class ModelValidationError(CadError):
    """Raised when an operation requires a structurally valid model."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations[:5])
        super().__init__(f"invalid model: {lines}")


class LexicalError(CadError):
    """Unknown or malformed token in a raw CAD text."""

    def __init__(self, message, offset, text=""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at byte {offset}: {text!r}")


class ParseError(CadError):
    """Structural error while parsing a token stream."""

    def __init__(self, message, token_index):
        self.token_index = token_index
        super().__init__(f"{message} (token {token_index})")


class SelectionError(CadError):
    """Mask selection path does not exist in the model."""


class AlignmentError(CadError):
    """User mask range does not cover one structurally complete field."""


class InfillError(CadError):
    """Prediction cannot be infilled (segment count mismatch)."""


class InvalidPredictionError(CadError):
    """Infilled text failed to parse; counts against prediction validity."""

    def __init__(self, message, cause=None):
        self.cause = cause
        super().__init__(message)


class GeometryError(CadError):
    """Base class for geometry evaluation failures."""

    def __init__(self, message, body_index=None):
        self.body_index = body_index
        if body_index is not None:
            message = f"body {body_index}: {message}"
        super().__init__(message)


class DegenerateCurveError(GeometryError):
    """Arc through collinear points, zero-radius circle, or collapsed loop."""


class InvalidFaceError(GeometryError):
    """Self-intersecting loop or hole not contained in the outer loop."""


class ZeroThicknessError(GeometryError):
    """Extrusion top and bottom planes coincide."""


class EmptySolidError(GeometryError):
    """Operation requires a non-empty voxel occupancy."""


class IngestError(CadError):
    """Source record does not map to a valid model (carries a reason code)."""

    def __init__(self, reason, detail=""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)
