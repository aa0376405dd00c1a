"""Exception types shared across the package."""


class GeometryError(ValueError):
    """Base class for invalid geometric input."""


class DomainViolation(GeometryError):
    """A point lies outside the admissible domain of a field or formula."""


class LevelCurveDegenerate(GeometryError):
    """The level curve is not locally a graph over x (f_y = 0)."""


class ConfigError(ValueError):
    """Invalid command-line or file configuration."""


class NonConvergence(RuntimeError):
    """The nonlinear solver stopped before reaching its tolerance.

    The partial solve report and the last iterate are attached so callers
    can inspect or resume.
    """

    def __init__(self, message, report=None, iterate=None):
        super().__init__(message)
        self.report = report
        self.iterate = iterate


class SingularJacobian(RuntimeError):
    def __init__(self, message, iterate=None):
        super().__init__(message)
        self.iterate = iterate
