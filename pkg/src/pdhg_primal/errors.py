"""Exception and warning types raised across the package."""

from typing import Optional


class PdhgPrimalError(Exception):
    """Base class for every error raised by pdhg_primal"""


class DimensionError(PdhgPrimalError, ValueError):
    """A vector or map does not have the length the operation expects"""


class ConfigurationError(PdhgPrimalError):
    """Rejected configuration, e.g. stepsizes violating their admissibility inequality"""


class OracleError(PdhgPrimalError):
    """A reference computation did not reach its tolerance"""

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual


class ManifestError(PdhgPrimalError):
    """A manifest, graph or vector file could not be turned into a problem"""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class DiagnosticsError(PdhgPrimalError):
    """A trace or certificate cannot support the requested diagnostic"""


class ConvergenceWarning(UserWarning):
    """An iterative estimate stopped at its iteration cap"""
