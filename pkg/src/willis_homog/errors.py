"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: 0 success, 1 verification failure,
2 configuration error, 3 numerical error.
"""

from __future__ import annotations


class WillisHomogError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(WillisHomogError):
    """Invalid input data (non-positive moduli, bad cell geometry, ...)."""


class ConfigError(WillisHomogError):
    """Malformed run configuration or CLI arguments."""


class NumericalError(WillisHomogError):
    """A solve produced an unacceptable residual or failed to converge."""


class ResonanceError(NumericalError):
    """The driving frequency sits inside the resonance window of an eigenvalue.

    Carries the offending eigenvalue so callers can switch to a projected
    (cluster-excluding) solve.
    """

    def __init__(self, message: str, eigenvalue: float, omega_sq: float):
        super().__init__(message)
        self.eigenvalue = float(eigenvalue)
        self.omega_sq = float(omega_sq)


class SolvabilityError(NumericalError):
    """A projected solve was requested with a right-hand side that is not
    orthogonal to the excluded eigenspace."""


class ZeroMeanImpedanceError(NumericalError):
    """The cell average of the monopole response is numerically zero, so the
    effective impedance 1/<w> is not representable at this point."""
