"""Exception hierarchy shared by all analysis modules."""


class DelayMarginError(Exception):
    """Base class for all errors raised by this package."""


class SpecFormatError(DelayMarginError):
    """Malformed or inconsistent system-spec document."""


class DimensionMismatch(SpecFormatError):
    """Matrix or vector dimensions inconsistent with the ambient state dimension."""


class SingularCharacteristicMatrix(DelayMarginError):
    """Requested a resolvent at a characteristic root."""


class EigenvalueOnLine(DelayMarginError):
    """An eigenvalue of B sits (numerically) on the requested vertical line."""


class AlphaOutOfRange(DelayMarginError):
    """Shift alpha does not satisfy spectral_abscissa(B) < alpha <= 0."""


class NotCommuting(DelayMarginError):
    """B and C do not commute within tolerance."""


class BNotStable(DelayMarginError):
    """B is not exponentially stable."""


class BCNotStable(DelayMarginError):
    """B + C is not exponentially stable."""


class BCNotHyperbolic(DelayMarginError):
    """B + C has an eigenvalue on the imaginary axis."""


class MuEqualsMinusD(DelayMarginError):
    """Destabilizing-sequence frequency mu equals -d; no delay can be constructed."""


class HypothesisViolated(DelayMarginError):
    """Parameters violate mu > 0, mu > -rho or tau > 0."""


class ResonantOmega(DelayMarginError):
    """i*omega is an eigenvalue of B + C."""


class MisalignedDelay(DelayMarginError):
    """Integration step does not divide a point delay."""

    def __init__(self, message, suggested_step=None):
        super().__init__(message)
        self.suggested_step = suggested_step


class BlowUp(DelayMarginError):
    """Trajectory norm exceeded the divergence threshold."""


class NoConvergence(DelayMarginError):
    """Newton iteration failed to converge."""


class ContourThroughRoot(DelayMarginError):
    """Argument-principle contour passes too close to a characteristic root."""


class NoCrossingInRange(DelayMarginError):
    """No stability crossing inside the requested delay range."""


class DegenerateTrajectory(DelayMarginError):
    """Trajectory is identically zero; no decay rate can be fitted."""
