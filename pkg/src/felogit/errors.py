"""Exception types shared across the package."""

from __future__ import annotations


class FelogitError(Exception):
    """Base class for all errors raised by this package."""


class PanelDataError(FelogitError, ValueError):
    """Malformed input data: bad CSV, unbalanced panel, invalid outcomes."""


class NoInformativeIndividualsError(PanelDataError):
    """Every individual has an all-zero or all-one outcome sequence."""


class AlternativeSetTooLargeError(FelogitError, RuntimeError):
    """C(T, k) exceeds the enumeration guard for some individual."""


class QpConvergenceError(FelogitError, RuntimeError):
    """The projected-gradient QP solver hit its iteration cap."""


class NonexistenceError(FelogitError, RuntimeError):
    """Estimation was refused because the existence check failed.

    Carries the :class:`~felogit.detector.ExistenceReport` that triggered
    the refusal as ``report``.
    """

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
