"""Exception types shared across the package."""


class QpcoolError(Exception):
    """Base class for all package-specific errors."""


class CriticalPoint(QpcoolError):
    """Raised when J = g, where the quasiparticle gap closes."""


class DegenerateSpectrum(QpcoolError):
    """Two quasienergies coincide beyond the pairing tolerance."""


class WrongPhase(QpcoolError):
    """An element family that is forbidden by parity in this phase."""


class NotSkewSymmetric(QpcoolError):
    """A contraction matrix failed the skew-symmetry check."""


class DeadMode(QpcoolError):
    """A mode with zero gain and zero loss cannot equilibrate."""


class NoConvergence(QpcoolError):
    """Steady-state search exceeded its cycle cap."""


class BasisMismatch(QpcoolError):
    """Covariance matrix and spectrum refer to different chain sizes."""


class TooLarge(QpcoolError):
    """Dense oracle requested beyond its qubit cap."""


class NonPositive(QpcoolError):
    """First-order noise channel broke positivity (gamma too large)."""


class LabelAmbiguity(QpcoolError):
    """Eigenstate occupation labels could not be assigned uniquely."""


class StepSizeError(QpcoolError):
    """Occupation clamping exceeded the allowed per-step violation."""


class ParseError(QpcoolError):
    """Malformed scenario configuration text."""

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class ValidationError(QpcoolError):
    """Scenario violates an engine/setup compatibility rule."""
