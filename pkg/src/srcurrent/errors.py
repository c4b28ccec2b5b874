"""Exception hierarchy.

Parameter problems derive from ``ParameterError`` (a ``ValueError``); failures
of a numerical procedure derive from ``NumericalError``. Every error carries a
``details`` dict so the CLI can emit it as machine-readable JSON.
"""

from __future__ import annotations


class SRCurrentError(Exception):
    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self), **self.details}


class ParameterError(SRCurrentError, ValueError):
    pass


class NonPositiveFrequency(ParameterError):
    pass


class NegativeLoss(ParameterError):
    pass


class EmitterLossUnsupported(ParameterError):
    pass


class RingTooSmall(ParameterError):
    pass


class RingSizeUnsupported(ParameterError):
    """Closed form requested for a ring size it does not exist for."""


class NumericalError(SRCurrentError, RuntimeError):
    pass


class StepSizeUnderflow(NumericalError):
    pass


class NonFiniteState(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class FrequencyCollapse(NumericalError):
    pass


class SingularDenominator(NumericalError):
    pass


class NoTransition(NumericalError):
    pass


class NoRoot(NumericalError):
    pass


class ZeroZ(NumericalError):
    pass


class NotSteady(NumericalError):
    pass


class EigenFailure(NumericalError):
    pass


class BetaOverflow(NumericalError):
    pass


class ZAtHalf(NumericalError):
    pass


class MarginalDrift(NumericalError):
    pass


class Diverged(NumericalError):
    pass
