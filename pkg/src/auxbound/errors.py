"""Exception hierarchy shared by all modules."""


class AuxboundError(Exception):
    """Base class for every error raised by the package."""


class SpecError(AuxboundError, ValueError):
    """Malformed or inconsistent system description."""


class DefectiveMatrix(AuxboundError):
    """The average matrix is not (numerically) diagonalizable."""

    def __init__(self, message, cond=None, residual=None):
        super().__init__(message)
        self.cond = cond
        self.residual = residual


class KappaNonNegative(AuxboundError):
    """Autonomous bounding equation has a nonnegative linear rate."""


class RootIsolationFailure(AuxboundError):
    pass


class HorizonInconclusive(AuxboundError):
    """A sup/limsup could not be settled on the finite horizon."""


class EmptyCertifiedInterval(AuxboundError):
    pass


class NegativeRadius(AuxboundError):
    """Forcing is too large for any boundedness certificate."""


class NoValidFit(AuxboundError):
    pass


class StepUnderflow(AuxboundError):
    """Adaptive step size collapsed (stiffness), distinct from blow-up."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class BlowUp(AuxboundError):
    """Closed-form or integrated solution escapes to infinity at ``t_star``."""

    def __init__(self, t_star, times=None, values=None):
        super().__init__(f"solution blows up at t* = {t_star:.6g}")
        self.t_star = t_star
        self.times = times
        self.values = values


class NoBracket(AuxboundError):
    """Both endpoints of a threshold search behave identically."""


class DegeneratePlane(AuxboundError):
    pass
