"""Exception types raised by the laboratory."""


class ShrinkerLabError(Exception):
    """Base class for all errors raised here."""


class DegenerateMetric(ShrinkerLabError):
    """The induced metric is not positive definite at an evaluation point."""


class NotLagrangian(ShrinkerLabError):
    """The symplectic form does not vanish on the tangent plane."""


class UnsupportedEigenvalue(ShrinkerLabError):
    """Only the eigenspaces 0, 1/2 and 1 of the normal Laplacian are cataloged."""


class OptimizerDidNotConverge(ShrinkerLabError):
    pass


class FitIllConditioned(ShrinkerLabError):
    pass


class DegenerateCurve(ShrinkerLabError):
    """Consecutive curve nodes coincide or the curve has collapsed."""


class StepRejected(ShrinkerLabError):
    """A flow step increased the length of the curve."""


class ResolutionLost(ShrinkerLabError):
    pass


class LiftODEFailed(ShrinkerLabError):
    pass
