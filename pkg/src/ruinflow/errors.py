"""Exception hierarchy.

Every error carries a short machine-greppable ``code`` used by the CLI
(``ERROR:<code>: message`` on stderr).  Validation/parse problems are
:class:`ValidationError` subclasses (exit code 2), everything else is a
computation error (exit code 1).
"""


class RuinFlowError(Exception):
    code = "Error"

    def __init__(self, message=""):
        super().__init__(message or self.code)


class ValidationError(RuinFlowError):
    """Model description rejected before any computation."""

    code = "Validation"

    def __init__(self, message="", diagnostics=None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])


class NonConservativeRows(ValidationError):
    code = "NonConservativeRows"


class Reducible(ValidationError):
    code = "Reducible"


class ZeroRate(ValidationError):
    code = "ZeroRate"


class BadMixture(ValidationError):
    code = "BadMixture"


class ParseError(ValidationError):
    code = "Parse"


class SingularSolve(RuinFlowError):
    code = "SingularSolve"


class AbscissaExceeded(RuinFlowError):
    code = "AbscissaExceeded"


class SpectralClash(RuinFlowError):
    code = "SpectralClash"


class EmptyMinus(RuinFlowError):
    code = "EmptyMinus"


class NoConvergence(RuinFlowError):
    code = "NoConvergence"


class DriftPositive(RuinFlowError):
    code = "DriftPositive"


class DriftNonNegative(RuinFlowError):
    code = "DriftNonNegative"


class NotMinusState(RuinFlowError):
    code = "NotMinusState"


class NoRoot(RuinFlowError):
    code = "NoRoot"


class DomainExceeded(RuinFlowError):
    code = "DomainExceeded"


class SingularBlock(RuinFlowError):
    code = "SingularBlock"


class BadGrid(RuinFlowError):
    code = "BadGrid"


class HorizonTooShort(RuinFlowError):
    code = "HorizonTooShort"


class HasJumps(RuinFlowError):
    code = "HasJumps"
