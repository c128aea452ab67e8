"""
Exception types raised by the rank solvers.

Input problems subclass ValueError (or IndexError) as well, so callers that only
know the builtin hierarchy still catch them.
"""


class RankSolverError(Exception):
    """Base class for every error raised by this package"""


# Graph construction
class EmptyGraph(RankSolverError, ValueError):
    pass


class NegativeWeight(RankSolverError, ValueError):
    pass


class IndexOutOfRange(RankSolverError, IndexError):
    pass


class InvalidDelta(RankSolverError, ValueError):
    pass


class DimensionMismatch(RankSolverError, ValueError):
    pass


class NotStochastic(RankSolverError, ValueError):
    """Matrix violates the row-stochastic invariants"""


class EdgeListFormatError(RankSolverError, ValueError):
    """Malformed line in an edge-list file"""

    def __init__(self, line_number: int, line: str, reason: str):
        self.line_number = line_number
        self.line = line
        self.reason = reason
        super().__init__(f"line {line_number}: {reason}: {line!r}")


# Sampling
class AllZeroWeights(RankSolverError, ValueError):
    pass


class NonFiniteWeight(RankSolverError, ValueError):
    pass


class ZeroTotalWeight(RankSolverError, ValueError):
    pass


# Solvers
class InvalidConfig(RankSolverError, ValueError):
    pass


class ZeroSteps(RankSolverError, ValueError):
    pass


class ZeroMass(RankSolverError, ArithmeticError):
    """Middle block of the game solution carries no mass"""


class DimensionTooLarge(RankSolverError, ValueError):
    pass


class SingularSystem(RankSolverError, ArithmeticError):
    """Stationary distribution is not unique"""


# Metrics
class NotOnSimplex(RankSolverError, ValueError):
    pass


class InvalidK(RankSolverError, ValueError):
    pass


# Generators
class InvalidParams(RankSolverError, ValueError):
    pass


__all__ = [
    'RankSolverError',
    'EmptyGraph',
    'NegativeWeight',
    'IndexOutOfRange',
    'InvalidDelta',
    'DimensionMismatch',
    'NotStochastic',
    'EdgeListFormatError',
    'AllZeroWeights',
    'NonFiniteWeight',
    'ZeroTotalWeight',
    'InvalidConfig',
    'ZeroSteps',
    'ZeroMass',
    'DimensionTooLarge',
    'SingularSystem',
    'NotOnSimplex',
    'InvalidK',
    'InvalidParams',
]
