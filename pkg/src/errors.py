"""Exception hierarchy with the exit status each failure maps to"""


class WaveguideError(Exception):
    """Base class for every failure the toolkit reports"""

    exit_code = 1


class InvalidConfigError(WaveguideError, ValueError):
    """A parameter violates an invariant of its owning type"""

    exit_code = 2

    def __init__(self, message, violations=None):
        self.violations = list(violations) if violations else [message]
        super().__init__(message)


class FrameUndefinedError(InvalidConfigError):
    """Curvature vanishes, the Frenet normal is not defined"""


class TiltUndefinedError(InvalidConfigError):
    """Both axial components of the normal and binormal vanish"""


class SolverFailure(WaveguideError):
    """Eigen or root solver did not reach the requested tolerance"""

    exit_code = 3

    def __init__(self, message, best_residual=None):
        self.best_residual = best_residual
        super().__init__(message)


class InvariantViolation(WaveguideError):
    """A result contradicts a proven property (signals a discretization bug)"""

    exit_code = 4


class OutputError(WaveguideError):
    """Artifacts could not be read or written"""

    exit_code = 5
