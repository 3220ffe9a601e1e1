"""Exception hierarchy.

Validation errors describe an ill-posed request (bad geometry, parity or
model); analysis errors mean the numerics found the physical assumptions
violated (no gap, no boundary localisation, singular chiral block).
"""


class NCIndexError(Exception):
    """Base class for all package errors."""


class ValidationError(NCIndexError):
    pass


class AnalysisError(NCIndexError):
    pass


class ConfigError(ValidationError):
    """Malformed model configuration; ``path`` names the offending key."""

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class CommensurabilityError(ValidationError):
    pass


class RangeError(ValidationError):
    pass


class ParityError(ValidationError):
    pass


class NotChiralError(ValidationError):
    pass


class GapError(AnalysisError):
    def __init__(self, message, mu=None, nearest=None):
        self.mu = mu
        self.nearest = nearest
        super().__init__(message)


class GaplessError(AnalysisError):
    pass


class SingularError(AnalysisError):
    pass


class DecayError(AnalysisError):
    pass


class ConvergenceError(AnalysisError):
    pass


class RepresentationError(AnalysisError):
    pass
