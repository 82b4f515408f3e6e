"""Exception types shared across the pipeline."""


class PortoptError(Exception):
    """Base class for all errors raised by this package."""


# --- ingest ---------------------------------------------------------------

class EmptyFile(PortoptError):
    """Symbol directory input contained no bytes."""


class EmptySeries(PortoptError):
    """OHLCV input yielded zero parseable rows."""


class SchemaError(PortoptError):
    """OHLCV header is missing required columns."""


class TemplateError(PortoptError):
    """Source template contains an unknown placeholder."""


class AllSourcesFailed(PortoptError):
    """Every requested symbol failed to fetch or parse."""


# --- panel ----------------------------------------------------------------

class EmptyPanel(PortoptError):
    """A panel operation left no dates or no symbols."""


class InsufficientData(PortoptError):
    """Fewer observations than the operation requires."""


class DomainError(PortoptError):
    """A value is outside the mathematical domain of the transform."""


# --- stats ----------------------------------------------------------------

class IncompletePanel(PortoptError):
    """The operation requires a panel with no missing cells."""


class DegenerateVariance(PortoptError):
    """A symbol has zero variance; correlation is undefined."""


class NumericError(PortoptError):
    """Non-finite values where finite numbers are required."""


# --- portfolio ------------------------------------------------------------

class InfeasibleProblem(PortoptError):
    """No allocation satisfies the constraints.

    Carries the best value the violated constraint can reach so the caller
    can adjust the target.
    """

    def __init__(self, message, max_achievable=None):
        super().__init__(message)
        self.max_achievable = max_achievable


class EmptyFrontier(PortoptError):
    """Every requested frontier target was infeasible."""

    def __init__(self, message, max_achievable=None):
        super().__init__(message)
        self.max_achievable = max_achievable


class UnboundedRisk(UserWarning):
    """The assembled feasible set may be unbounded (risk can grow without limit)."""


# --- cli ------------------------------------------------------------------

class ConfigError(PortoptError):
    """Run configuration is invalid or references missing paths."""
