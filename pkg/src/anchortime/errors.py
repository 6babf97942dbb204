"""Exception hierarchy shared across the package.

Every error a caller is expected to branch on has its own class; the CLI
maps the four coarse families (config, data, calibration, budget) to
distinct exit codes.
"""


class AnchortimeError(Exception):
    """Base class for all package errors."""


class ParameterError(AnchortimeError, ValueError):
    """An argument is outside its documented domain."""


class EvidenceError(AnchortimeError, KeyError):
    """An observation refers to a feature or value the likelihood model
    does not know about.  The message names the offending feature."""

    def __str__(self):  # KeyError quotes its arg; keep the message readable
        return self.args[0] if self.args else ""


class ModelError(AnchortimeError, ValueError):
    """A probability table is malformed (zero mass, bad normalization);
    usually a smoothing misconfiguration."""


class CapabilityError(AnchortimeError):
    """An exact computation was requested on an input too large or not
    enumerable at all."""


class DataFormatError(AnchortimeError, ValueError):
    """Raw input data violates the expected file format."""


class EmptyInputError(DataFormatError):
    """A data file contains no records."""


class UnknownColumnError(DataFormatError):
    """A data file header does not match the expected schema."""


class ParseError(DataFormatError):
    """A cell value could not be parsed; names row and column."""


class TrainingError(AnchortimeError, RuntimeError):
    """Optimization diverged; carries the loss trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class CalibrationError(AnchortimeError, ValueError):
    """A target value lies outside the achievable range; the message
    reports the achievable interval."""

    def __init__(self, message, achievable=None):
        super().__init__(message)
        self.achievable = achievable


class BudgetError(AnchortimeError, ValueError):
    """A time-allocation policy violates its budget identity."""


class DegenerateSplitError(BudgetError):
    """The low-confidence bin has zero mass; no budget slack is usable."""


class TimeCapError(BudgetError):
    """The solved low-confidence time exceeds the configured cap."""

    def __init__(self, message, feasible_t_min=None):
        super().__init__(message)
        self.feasible_t_min = feasible_t_min


class SamplingError(AnchortimeError, ValueError):
    """A trial pool cannot fill a required stratum; names the interval."""


class ConfigError(AnchortimeError, ValueError):
    """A run configuration is missing, malformed, or references absent
    inputs."""


class StateError(AnchortimeError, RuntimeError):
    """A session operation was requested out of order."""
