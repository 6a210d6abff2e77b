"""Exception types shared across the package."""


class GraphonLDPError(Exception):
    """Base class for all package errors."""


class InvalidInput(GraphonLDPError):
    """Malformed or inconsistent input data."""


class BlockCapExceeded(GraphonLDPError):
    """Common refinement would exceed the configured block cap."""


class BlockCountMismatch(GraphonLDPError):
    """Block structures could not be aligned by regridding."""


class ExactModeTooLarge(GraphonLDPError):
    """Exact permutation search requested above the supported block count."""


class WorkCapExceeded(GraphonLDPError):
    """Tensor-contraction work estimate exceeds the configured cap."""


class BoundaryW0(GraphonLDPError):
    """Reference graphon touches {0,1} where the argument disagrees."""


class NonConvergence(GraphonLDPError):
    """Fixed-point iteration failed to reach the requested tolerance."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class NotGraphical(GraphonLDPError):
    """Degree sequence admits no simple graph."""


class MaxTriesExceeded(GraphonLDPError):
    """Rejection sampler exhausted its trial budget."""


class TooLarge(GraphonLDPError):
    """Instance exceeds the exact-enumeration cap."""


class UnknownFunctional(GraphonLDPError):
    """Functional name not present in the registry."""


class ZeroHits(GraphonLDPError):
    """Monte Carlo event never observed; only an upper confidence bound exists."""

    def __init__(self, message, upper_bound=None):
        super().__init__(message)
        self.upper_bound = upper_bound


class RepairStalled(GraphonLDPError):
    """Degree repair could not converge because clipping blocks the correction."""


class DegenerateCorrection(GraphonLDPError):
    """Rank-one degree correction undefined: defect has zero mean but is nonzero."""


class Infeasible(GraphonLDPError):
    """No degree-feasible point satisfies the functional constraint."""


# Stable exit codes for the CLI; one per error class.
EXIT_CODES = {
    GraphonLDPError: 1,
    InvalidInput: 2,
    BlockCapExceeded: 3,
    BlockCountMismatch: 4,
    ExactModeTooLarge: 5,
    WorkCapExceeded: 6,
    BoundaryW0: 7,
    NonConvergence: 8,
    NotGraphical: 9,
    MaxTriesExceeded: 10,
    TooLarge: 11,
    UnknownFunctional: 12,
    ZeroHits: 13,
    RepairStalled: 14,
    DegenerateCorrection: 15,
    Infeasible: 16,
}


def exit_code_for(exc: BaseException) -> int:
    """Exit code for an exception instance (most specific class wins)."""
    for cls in type(exc).__mro__:
        if cls in EXIT_CODES:
            return EXIT_CODES[cls]
    return 1
