"""Exception hierarchy.

Every error raised by the package derives from DispatchError so callers
can catch one type at the boundary.  The CLI maps the three subfamilies
to exit codes: config problems -> 1, data problems -> 2, runtime
problems -> 3.
"""

from __future__ import annotations


class DispatchError(Exception):
    """Base class for all package errors."""


class ConfigError(DispatchError):
    """Invalid configuration or invalid argument combination."""


class DataError(DispatchError):
    """Problems with input data files or series."""


class RuntimeFailure(DispatchError):
    """Failures raised while running a scenario or optimizer."""


# -- data -------------------------------------------------------------

class MissingFile(DataError):
    pass


class NonUniformSpacing(DataError):
    """Timestamps in a table are not on a constant grid (gap, duplicate
    or disorder); message carries the first offending row."""


class NonFiniteValue(DataError):
    pass


class OutOfRange(DataError):
    """Requested slice or timestamp lies outside the series."""


class DegenerateRange(DataError):
    """min == max, so a min-max rescale is undefined."""


class LengthMismatch(DataError):
    pass


class GranularityMismatch(DataError):
    """Entities wired into one decision unit disagree on time step."""


class InsufficientHistory(DataError):
    """A forecaster was asked for a window it has no backing data for."""


class InsufficientData(DataError):
    pass


class HorizonExceedsData(DataError):
    pass


class OutOfOrderData(DataError):
    """An event feed delivered a row older than one already consumed."""


# -- config -----------------------------------------------------------

class ConfigInvalid(ConfigError):
    pass


class UnknownEntity(ConfigError):
    """A contract references an entity name that was never declared."""


class MissingVariable(ConfigError):
    """Composition over a decision unit lacks a required variable."""


# -- runtime ----------------------------------------------------------

class InfeasibleAction(RuntimeFailure):
    """Action would push state-of-charge outside its bounds."""


class CapacityExhausted(RuntimeFailure):
    """Battery capacity has degraded to (or below) zero."""


class Infeasible(RuntimeFailure):
    """No action sequence satisfies the constraints."""


class NoFeasibleFound(RuntimeFailure):
    """A stochastic search finished without one feasible candidate."""


class MissedDeadline(RuntimeFailure):
    """A bid arrived outside its market's open decision window."""


class UnresolvedCommitment(RuntimeFailure):
    """Settlement ran while a commitment was still undelivered."""
