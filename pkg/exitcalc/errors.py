"""Exception hierarchy shared by the library and the command line.

Every error carries the process exit code the CLI uses for it and an
optional ``anchor``: an identifier (element, face key, edge key) the CLI
looks up in the input file to report a line number.
"""


class ExitCalcError(Exception):
    """Base class for calculator errors"""
    exit_code = 5

    def __init__(self, message, anchor=None):
        super().__init__(message)
        self.anchor = anchor
        self.location = None

    def located(self, path, line):
        """Attach an input file position, ``path:line``."""
        self.location = f"{path}:{line}"
        return self


class ValidationError(ExitCalcError):
    """Input does not describe a valid object"""
    exit_code = 2


class CycleDetected(ValidationError):
    """Edge set induces x <= y <= x for distinct x, y"""
    pass


class DuplicateElement(ValidationError):
    """An element identifier was declared twice"""
    pass


class MalformedIdentifier(ValidationError):
    """An identifier uses a separator reserved for compound labels"""
    pass


class UnknownElement(ValidationError):
    """An identifier does not name an element of the poset"""
    pass


class NotMonotone(ValidationError):
    """A map of posets does not preserve the order"""
    pass


class NotLocallyClosed(ValidationError):
    """Subset fails the interval condition"""
    pass


class UnknownStratum(ValidationError):
    pass


class UnknownEdge(ValidationError):
    pass


class EmptyStratum(ValidationError):
    """A stratification misses an element of its poset"""
    pass


class IncompatibleStratifications(ValidationError):
    pass


class NonCommutingDiagram(ValidationError):
    """Two paths with the same endpoints give different matrices"""
    pass


class DimensionMismatch(ValidationError):
    pass


class DepthExhausted(ExitCalcError):
    """Zigzag classes were still changing at the search depth.

    The uncertified report is attached so callers can still inspect it.
    """
    exit_code = 3

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class BudgetExceeded(ExitCalcError):
    """Exhaustive enumeration would exceed the configured budget"""
    exit_code = 4


class InvariantViolation(ExitCalcError):
    """A module invariant tripped; this is a bug, not bad input"""
    exit_code = 5


class BoundaryCompositionNonzero(InvariantViolation):
    pass


class ReassemblyFailed(InvariantViolation):
    pass
