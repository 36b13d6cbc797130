"""Exception types raised by dissmlr."""


class DissmlrError(ValueError):
    """Base class for all input and contract errors."""


class NotSquare(DissmlrError):
    pass


class NonFiniteEntry(DissmlrError):
    def __init__(self, i, j):
        self.i, self.j = i, j
        super().__init__(f"non-finite entry at ({i}, {j})")


class AsymmetryBeyondTolerance(DissmlrError):
    def __init__(self, i, j):
        self.i, self.j = i, j
        super().__init__(f"asymmetry beyond tolerance at ({i}, {j})")


class NegativeEntry(DissmlrError):
    def __init__(self, i, j):
        self.i, self.j = i, j
        super().__init__(f"negative entry at ({i}, {j})")


class NonzeroDiagonal(DissmlrError):
    def __init__(self, i):
        self.i = i
        super().__init__(f"nonzero diagonal entry at ({i}, {i})")


class IndexOutOfRange(DissmlrError):
    pass


class SameCluster(DissmlrError):
    pass


class DeadLabel(DissmlrError):
    pass


class WouldEmptySourceCluster(DissmlrError):
    pass


class UnitNotInSource(DissmlrError):
    pass


class BadPartition(DissmlrError):
    pass


class TooFewObjects(DissmlrError):
    pass


class KOutOfRange(DissmlrError):
    pass


class AlphaOutOfRange(DissmlrError):
    pass


class ViewDoesNotRefineTarget(DissmlrError):
    pass


class BadInitialPartition(DissmlrError):
    pass


class BadParameters(DissmlrError):
    pass


class ParseError(DissmlrError):
    def __init__(self, line, message="cannot parse"):
        self.line = line
        super().__init__(f"line {line}: {message}")


class RaggedRows(DissmlrError):
    pass


class InvariantViolation(AssertionError):
    """Raised by checked mode when an incremental quantity drifts or a
    committed merge is not a global minimum."""
