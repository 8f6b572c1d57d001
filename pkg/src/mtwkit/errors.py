"""Exception hierarchy for mtwkit.

Numerical verdicts (pass / violated) are never signalled by exceptions;
exceptions mark genuinely unusable inputs or solver breakdowns.
"""


class MtwkitError(Exception):
    """Base class for all mtwkit errors."""


class BaseMismatchError(MtwkitError):
    """A tangent vector was used at a point other than its base."""


class CutLocusError(MtwkitError):
    """Riemannian exponential requested past the cut locus of the sphere."""


class AntipodalError(MtwkitError):
    """Logarithm requested between (nearly) antipodal sphere points."""


class SingularPairError(MtwkitError):
    """A cost evaluation hit the singular set of the cost (within r_min)."""


class UnsupportedOrderError(MtwkitError):
    """An unknown derivative order tag was requested."""


class SingularJacobianError(MtwkitError):
    """The mixed Hessian used as a Newton Jacobian is numerically singular."""


class NewtonDivergedError(MtwkitError):
    """Newton inversion of a cost-exponential map failed to converge."""


class OutsideDomainError(MtwkitError):
    """A solved target point (or input momentum) falls outside its domain."""


class SegmentLeavesDomainError(MtwkitError):
    """A cost-segment node could not be constructed inside the target domain."""

    def __init__(self, message, theta=None):
        super().__init__(message)
        self.theta = theta


class UnreachableError(MtwkitError):
    """A front sample required by a finite-difference stencil is unreachable."""


class VanishingGradientError(MtwkitError):
    """The level-set gradient vanished; signals a bug or a domain violation."""


class TrajectoryLeftDomainError(MtwkitError):
    """A tracked front trajectory exited the working domain."""


class ConfigError(MtwkitError):
    """A campaign configuration file is malformed.

    ``field`` holds a dotted path naming the offending entry.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
