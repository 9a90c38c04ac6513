"""
Error types raised by heunsym.

Every error carries a short machine tag. The CLI prints it on stderr as
`heunsym-error <tag>: <message>` and maps the class to an exit code; the
HTTP layer turns it into an HTTPException detail.
"""


class HeunSymError(Exception):
    """Base class for all heunsym errors."""
    tag = "heunsym"
    exit_code = 3


class InvalidParams(HeunSymError):
    """Parameters outside the accepted domain (e.g. ell < 1)."""
    tag = "invalid-params"
    exit_code = 2


class DegenerateParams(HeunSymError):
    """mu = 0, lambda + mu^2 = 0, Delta = 0 or Delta_pm = 0."""
    tag = "degenerate-params"


class StepFailure(HeunSymError):
    """The adaptive integrator could not complete the path."""
    tag = "step-failure"
    exit_code = 4


class ZeroSolution(HeunSymError):
    """Cauchy data (0, 0) does not define a solution to split."""
    tag = "zero-solution"


class NonDiagonalizable(HeunSymError):
    """The monodromy matrix has a repeated eigenvalue."""
    tag = "non-diagonalizable"


class NoDecay(HeunSymError):
    """A two-sided coefficient sequence failed to decay (formal series)."""
    tag = "no-decay"


class SingularSystem(HeunSymError):
    """The banded recurrence system could not be solved."""
    tag = "singular-system"


class NonPositiveSum(HeunSymError):
    """lambda + mu^2 is not real positive, so no real Josephson parameters exist."""
    tag = "non-positive-sum"


class NonIntegerOrder(HeunSymError):
    """B/omega is not a negative integer; Theta phase maps are unavailable."""
    tag = "non-integer-order"


class PoleHit(HeunSymError):
    """Evaluation landed on a pole of Phi."""
    tag = "pole-hit"


class BranchLoss(HeunSymError):
    """Square-root tracking lost the branch (phase step too large)."""
    tag = "branch-loss"


class DegenerateInitial(HeunSymError):
    """phi(0) = +-pi/2: the inverse map yields an identically zero eigenfunction."""
    tag = "degenerate-initial"


class SecantSingular(HeunSymError):
    """cos(phi(0)) vanishes; the period formulas are singular."""
    tag = "secant-singular"


class DegenerateConstants(HeunSymError):
    """U^2 + V^2 - 2UV sin(phi(0)) vanishes for a Theta phase map."""
    tag = "degenerate-constants"


class OutOfDomain(HeunSymError, ValueError):
    """A point or time lies outside the region an algebraic formula covers."""
    tag = "out-of-domain"
