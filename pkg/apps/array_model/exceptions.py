"""
Exception hierarchy shared by the calibration apps.

Every failure raised by the numerical code derives from CalibrationError so the
experiment runner can tell a recoverable trial failure (MeasurementError,
SingularWeightError) from a configuration problem that should stop the run.
"""


class CalibrationError(Exception):
    """Base class for all calibration harness errors."""


class ConfigurationError(CalibrationError):
    """
    Invalid scenario, frame specification or experiment configuration.

    Carries the field error dictionary produced by the serializers, if any.
    """

    def __init__(self, message, errors=None):
        super().__init__(message)
        self.errors = errors or {}

    def __str__(self):
        message = super().__str__()
        if not self.errors:
            return message
        details = '; '.join(f"{field}: {problems}" for field, problems in self.errors.items())
        return f"{message} ({details})"


class DomainError(CalibrationError, ValueError):
    """An argument lies outside the domain of the operation."""


class MeasurementError(CalibrationError):
    """The log-domain measurements cannot be formed (zero or non-positive entries)."""


class SingularWeightError(CalibrationError):
    """The weight matrix is numerically singular."""


class IdentifiabilityError(CalibrationError):
    """The weighted normal matrix is singular; the parameters are not identifiable."""


class CalibrationWarning(RuntimeWarning):
    """A precondition holds only weakly (few snapshots, ambiguous eigen-gap, aliased azimuths)."""
