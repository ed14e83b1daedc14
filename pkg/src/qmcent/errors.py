"""Exception hierarchy shared by all qmcent modules.

Validation problems (bad parameters, mismatched grids, malformed config)
are distinct from numerical failures (blow-up, non-convergence) so the CLI
can map them to different exit codes.
"""

from __future__ import annotations


class QmcentError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(QmcentError):
    """Input rejected before any numerics ran."""


class DimensionError(ValidationError):
    """Shapes or grids of the operands do not match."""


class ParameterError(ValidationError):
    """A parameter is outside its validity range."""


class PreconditionError(ValidationError):
    """An operation's stated precondition does not hold for this input."""


class EmptyDomainError(ValidationError):
    """An ensemble statistic was requested over an empty subset."""


class PartitionError(ValidationError):
    """Walker/domain bookkeeping is inconsistent (e.g. unassigned points)."""


class ConfigError(ValidationError):
    """Config file problem; the message names the offending key."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class ComparisonError(ValidationError):
    """The two pipeline outputs being compared are not commensurate."""


class NumericalError(QmcentError):
    """A computation started but failed numerically."""


class DegenerateInputError(NumericalError):
    """Input is numerically degenerate (zero norm, annihilated sector, ...)."""


class DegenerateSliceError(DegenerateInputError):
    """A conditional slice has vanishing norm; resample the offending walker."""

    def __init__(self, message: str, walker: int):
        super().__init__(message)
        self.walker = walker


class DegenerateWeightError(DegenerateInputError):
    """All kernel weights underflowed; kernel width far too small."""


class ConvergenceError(NumericalError):
    """Iteration exhausted its step budget; carries the recent drift history."""

    def __init__(self, message: str, drift_history=None):
        super().__init__(message)
        self.drift_history = list(drift_history) if drift_history is not None else []


class InstabilityError(NumericalError):
    """A propagated quantity blew up or became NaN; names the walker slot."""

    def __init__(self, message: str, walker: int | None = None):
        super().__init__(message)
        self.walker = walker
