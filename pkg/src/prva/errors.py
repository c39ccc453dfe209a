"""Exception hierarchy shared across the package.

Validation failures double as ValueError so callers that only know the
stdlib conventions still catch them.
"""


class PrvaError(Exception):
    """Base class for all package-specific errors."""


class DomainError(PrvaError, ValueError):
    """An argument violates a documented precondition."""


class ModelDomainError(DomainError):
    """Noise-source model is invalid at the requested operating point."""


class TraceParseError(PrvaError, ValueError):
    """A trace file could not be parsed.

    Carries the offending path and 1-based line number.
    """

    def __init__(self, path, line_number: int, message: str):
        self.path = path
        self.line_number = line_number
        super().__init__(f"{path}:{line_number}: {message}")


class EmptyTraceError(DomainError):
    """A trace that must be non-empty was empty."""


class InsufficientDataError(DomainError):
    """Not enough data to fit (fewer than two distinct temperatures)."""


class DegenerateSourceError(DomainError):
    """Calibration input has zero spread."""


class DegenerateDataError(DomainError):
    """Bandwidth selection input has zero spread."""


class StreamUnderrunError(PrvaError):
    """A trace-backed sample stream ran out of values."""


class CapabilityError(DomainError):
    """The requested sampler cannot handle this target distribution."""


class DominanceViolationError(PrvaError):
    """Accept-reject proposal density fails to dominate the target."""


class AcceptanceStarvationError(PrvaError):
    """Accept-reject acceptance rate fell below the configured floor."""


class TargetSyntaxError(DomainError):
    """A target-distribution string matches none of the accepted forms."""


class CatalogError(DomainError):
    """Unknown benchmark name."""


class ParameterError(DomainError):
    """A benchmark parameter is missing or malformed."""
