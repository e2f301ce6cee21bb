"""Exception hierarchy.

Every error carries a short ``kind`` string; the CLI prints it on stderr so
scripts can dispatch on it without parsing messages.
"""


class WfaError(Exception):
    kind = "error"


class SingularMatrix(WfaError):
    kind = "singular-matrix"


class MassDiverges(WfaError):
    kind = "mass-diverges"


class NoConvergence(WfaError):
    kind = "no-convergence"

    def __init__(self, message, estimate=None, iterations=None):
        super().__init__(message)
        self.estimate = estimate
        self.iterations = iterations


class UnknownSymbol(WfaError):
    kind = "unknown-symbol"


class EmptyAutomaton(WfaError):
    kind = "empty-automaton"


class ZeroMass(WfaError):
    kind = "zero-mass"


class NotStochastic(WfaError):
    kind = "not-stochastic"


class IllFormedSre(WfaError):
    kind = "ill-formed-sre"


class SreSyntaxError(WfaError):
    kind = "sre-syntax"

    def __init__(self, message, position):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class NoCycle(WfaError):
    kind = "no-cycle"


class EmptyLanguage(WfaError):
    kind = "empty-language"


class BudgetExceeded(WfaError):
    kind = "budget-exceeded"


class FloatBackendUnsupported(WfaError):
    kind = "float-backend-unsupported"


class InputError(WfaError):
    """An input file could not be read."""

    kind = "io"


class FormatError(WfaError):
    """Malformed automaton file. ``line``/``column`` are 1-based when known."""

    kind = "format"

    def __init__(self, message, line=None, column=None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column
