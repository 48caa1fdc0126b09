"""Exception hierarchy shared by the kinematics, axioms and recovery modules."""


class RelDopplerError(Exception):
    """Base class for every error raised by this package."""


class DomainError(RelDopplerError, ValueError):
    """An argument lies outside the domain of a law or map."""


class BisectionError(RelDopplerError):
    """A bracketing root search could not bracket its target."""


class MonotonicityError(RelDopplerError):
    """A quantity required to be strictly increasing is not."""


class ModelViolation(RelDopplerError):
    """Sampled data does not have the form a fitter assumes."""


class HomogeneityError(ModelViolation):
    """L(lam, beta) is not of the factored form lam * f(beta)."""


class FitError(ModelViolation):
    """A power-law fit failed or left too large a residual."""


class ConsistencyError(ModelViolation):
    """The Doppler law and the composition law do not share one map u."""
