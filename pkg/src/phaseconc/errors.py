"""Exception hierarchy shared by the simulator modules."""


class PhaseConcError(Exception):
    """Base class for every numerical failure raised by this package."""


class CutoffTooSmall(PhaseConcError):
    pass


class TruncationOverflow(PhaseConcError):
    pass


class NotNormalized(PhaseConcError):
    pass


class QuadratureFailure(PhaseConcError):
    pass


class DegenerateNoise(PhaseConcError):
    pass


class ObjectiveFailure(PhaseConcError):
    pass


class InfiniteVariance(PhaseConcError):
    """The phase variance is infinite (phase-symmetric state, e.g. N = 0)."""


class NoClosedContour(PhaseConcError):
    pass


class ConfigError(Exception):
    """Invalid experiment configuration; carries a file:line prefix when known."""
