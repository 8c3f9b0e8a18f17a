"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: :class:`DataError` -> 1,
:class:`ConfigError` -> 2, :class:`TrainingError` -> 3.
"""


class DriftcastError(Exception):
    """Base class for all package errors."""


class DataError(DriftcastError):
    """Invalid, missing, or malformed input data."""


class ConfigError(DriftcastError):
    """Invalid run configuration."""


class TrainingError(DriftcastError):
    """Training is infeasible with the given data (e.g. single-class table)."""


class PredictorError(DriftcastError):
    """A single base predictor cannot produce a forecast for a window."""
