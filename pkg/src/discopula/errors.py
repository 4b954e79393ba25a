"""Exception hierarchy shared across the package.

Every error carries an ``exit_code`` so the command line layer can map
failures to distinct process exit statuses.
"""


class DiscopulaError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ContractError(DiscopulaError, ValueError):
    """Invalid input: bad shapes, out-of-range values, malformed documents."""

    exit_code = 2


class NoFeasibleProjection(DiscopulaError):
    """No array with the requested margins exists on the given support.

    Raised by the scaling loop when the fixed-margin class restricted to
    the support of the input is empty (or admits no fully supported
    member).  ``diagnostic`` holds machine-readable detail about how the
    infeasibility was detected.
    """

    exit_code = 3

    def __init__(self, message, diagnostic=None):
        super().__init__(message)
        self.diagnostic = dict(diagnostic or {})


class MaxSweepsExceeded(DiscopulaError):
    """The scaling loop ran out of sweeps while still making progress.

    The feasibility certificate ruled out infeasibility, so this signals a
    genuinely slow instance; raise the sweep budget or loosen the margin
    tolerance.
    """

    exit_code = 4

    def __init__(self, message, outcome=None):
        super().__init__(message)
        self.outcome = outcome


class NotInAffineSpan(DiscopulaError):
    """An array is not representable in the requested dependence basis."""

    exit_code = 5


class ConditioningError(DiscopulaError):
    """A matrix that should be positive definite is numerically singular."""

    exit_code = 6


class DegenerateTestError(DiscopulaError):
    """The requested test has zero degrees of freedom on this support."""

    exit_code = 7
