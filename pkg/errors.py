"""
Exception hierarchy for qprism

Every library error carries a process exit code and a JSON-ready details
payload. Exit code 1 marks an invariant violation, exit code 2 an
inconclusive outcome or unusable input.
"""

from typing import Any, Dict, Optional


class QPrismError(Exception):
    """Base class for all qprism errors"""

    exit_code = 1

    def __init__(self, message: str = "", details: Optional[Dict[str, Any]] = None):
        super().__init__(message or self.__class__.__name__)
        self.details = dict(details or {})

    def to_json(self) -> Dict[str, Any]:
        return {"error": self.__class__.__name__, "message": str(self), "details": self.details}


# Rings and divisions
class DenominatorTooDeep(QPrismError):
    """Fractional exponent needs a root of q beyond the configured level"""


class NotDivisible(QPrismError):
    """Exact division left a residual within the available precision"""


class UnrecognizedDivisor(QPrismError):
    """Divisor has no usable content decomposition"""


class NotInPDIdeal(QPrismError):
    """Divided powers requested outside the divided-power ideal"""


class NoSolution(QPrismError):
    """Linear system has no solution"""


class PrecisionExhausted(QPrismError):
    """Nothing meaningful is left after the precision drop"""


class PreconditionViolation(QPrismError):
    """Documented precondition of an operation does not hold"""


# Witt vectors
class GhostUndefined(QPrismError):
    """Ghost map requested over a base with p-torsion"""


class SingularMatrix(QPrismError):
    """Matrix is not invertible where invertibility is required"""


# Complexes
class NonCommuting(QPrismError):
    """Koszul input endomorphisms do not commute"""


class UnsupportedCoefficients(QPrismError):
    """Cohomology requested over an unsupported coefficient ring"""

    exit_code = 2


class FZeroDivisor(QPrismError):
    """Decalage requested for a zero divisor"""


class NotAChainMap(QPrismError):
    """Map does not commute with the differentials"""


class WindowExceeded(QPrismError):
    """Operator leaves the fixed finite monomial window"""


# Connections, Higgs fields, transport
class NotTrivialModMu(QPrismError):
    """Group action matrix is not the identity modulo mu"""


class VolteSingular(QPrismError):
    """Volte matrix I + mu*B could not be inverted"""


class Singular(QPrismError):
    """Matrix expected to be invertible has a non-unit determinant"""


class BoundExceeded(QPrismError):
    """Search bound reached without a decision"""

    exit_code = 2


class NoBasisWithinBound(QPrismError):
    """No basis found with the configured degree bound"""

    exit_code = 2


class BadExponentB(QPrismError):
    """Filtration exponent too small for the Frobenius witness"""


# Descent
class SingularTwist(QPrismError):
    """Twisting matrix is not invertible"""


class MembershipViolated(QPrismError):
    """Cocycle is not in the required congruence class"""


# Stratifications and the crystalline dictionary
class NotAStratification(QPrismError):
    """Matrix fails the cocycle condition or the diagonal condition"""


class TDivisionAmbiguous(QPrismError):
    """Division by mu or t is not unique at the requested precision"""


class NotMultiplicative(QPrismError):
    """Filtration is not decreasing or not stable under f"""


# Input
class SchemaError(QPrismError):
    """Input JSON does not match the expected schema"""

    exit_code = 2
