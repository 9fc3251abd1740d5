# errors.py
"""
Error hierarchy for relaycap.

Every error carries an exit code so the command-line front end can map a
failure to its documented status without inspecting the message, the same
way an HTTP error carries its status code.
"""
from typing import Optional


class RelayCapacityError(Exception):
    """Base class for all relaycap failures."""
    exit_code: int = 3

    def __init__(self, detail: str, term: Optional[str] = None):
        self.detail = detail
        self.term = term
        message = f"{detail} (term: {term})" if term else detail
        super().__init__(message)

    def with_term(self, term: str) -> "RelayCapacityError":
        """Attach the provenance label of the failing sub-term if none is set."""
        if self.term is None:
            self.term = term
            self.args = (f"{self.detail} (term: {term})",)
        return self


# ============================================
# Configuration errors (exit 2)
# ============================================

class ConfigurationError(RelayCapacityError):
    """Invalid operating point or request."""
    exit_code = 2


class UnequalPowerError(ConfigurationError):
    """Analytic MMSE path requested with unequal interferer powers."""


# ============================================
# Numerical errors (exit 3)
# ============================================

class NumericalError(RelayCapacityError):
    """Any numeric failure."""
    exit_code = 3


class DomainError(NumericalError, ValueError):
    """Argument outside the domain of a special function."""


class PoleError(NumericalError, ValueError):
    """Gamma pole, hypergeometric parameter pole or pole-separation failure."""


class ContourError(NumericalError):
    """Mellin-Barnes integrand does not decay within the maximal half-length."""


class ParameterRegionError(NumericalError):
    """No valid representation for the requested parameter region."""


class QuadratureError(NumericalError):
    """Adaptive quadrature did not converge."""


class RankDeficiencyError(NumericalError):
    """Interference Gram matrix numerically singular."""


class NumericInconsistencyError(NumericalError):
    """A probability left [0, 1] by more than the clamp tolerance."""


class CalibrationError(NumericalError):
    """Bivariate G evaluation disagrees with its quadrature oracle."""
