"""Exception types raised by the package."""


class FMAError(Exception):
    """Base class for all package errors."""


class DomainError(FMAError, ValueError):
    """An argument is outside the domain of the operation."""


class EmptyResidual(FMAError):
    """The signal (or residual) is identically zero."""


class PeakNotFound(FMAError):
    """No interior maximum of the correlation was found near the coarse peak."""


class UnsupportedWindow(FMAError, ValueError):
    """The requested formula is not available for this window."""


class DegenerateStep(FMAError, ValueError):
    """Two sampling steps are equal, so no reconstruction is possible."""


class InconsistentMeasurement(FMAError):
    """Dual-rate measurements do not describe one tone."""


class InsufficientData(FMAError):
    """Too few usable points to fit."""
