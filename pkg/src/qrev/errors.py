"""Exception hierarchy shared across the package."""


class QrevError(Exception):
    """Base class for all library errors."""


class AlgebraError(QrevError):
    """Malformed or invalid algebra definition."""


class DuplicateRelationName(AlgebraError):
    pass


class MissingIdentity(AlgebraError):
    pass


class NonInvolutiveInverse(AlgebraError):
    pass


class IncompleteCompositionTable(AlgebraError):
    pass


class DisconnectedNeighborGraph(AlgebraError):
    pass


class FormulaError(QrevError):
    """Problems with constraint formulas and their documents."""


class FormulaSyntaxError(FormulaError):
    """Syntax error with position information.

    Attributes line and column are 1-based.
    """

    def __init__(self, message, line, column):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class UnknownRelationToken(FormulaSyntaxError):
    pass


class SelfConstraint(FormulaSyntaxError):
    pass


class UnknownVariable(FormulaError):
    pass


class UniverseMismatch(QrevError):
    pass


class UniverseTooLarge(QrevError):
    """Brute-force model enumeration refused (universe above the bound)."""


class EmptyRelationPresent(QrevError):
    pass


class Unrealizable(QrevError):
    """No interval assignment exists; signals a bug for consistent scenarios."""


class InvalidParameters(QrevError):
    pass


class TimeBudgetExceeded(QrevError):
    pass
