"""Exception types shared across the library."""


class ReachsetError(Exception):
    """Base class for all library-specific failures."""


class ValidationError(ReachsetError, ValueError):
    """Malformed or inconsistent input (wrong shape, non-Hermitian, bad trace)."""


class ContractivityViolation(ReachsetError):
    """The relaxation matrix is not symmetric positive definite.

    Raised when an operation requires a strictly contractive relaxation
    channel but the supplied generator does not provide one.
    """


class FixedPointUndefined(ReachsetError):
    """The free dynamics has no unique fixed point (singular drift matrix)."""


class SingularCombination(ReachsetError):
    """A simplex-weighted combination of control generators is singular."""


class OriginNotControllable(ReachsetError):
    """The base point of a boundary ray scan is not locally controllable."""


class ResidualTooLarge(ReachsetError):
    """A vector is not proportional to the requested target direction."""


class RankDeficient(ReachsetError):
    """Trajectory data cannot identify the requested rate parameters."""


class NoUniqueFixedPoint(ReachsetError):
    """The one-period map has an eigenvalue 1; (I - M) is singular."""
