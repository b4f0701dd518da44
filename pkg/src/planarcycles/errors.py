"""Exception hierarchy shared by every module of the package."""


class CycleLabError(Exception):
    """Base class for all package errors."""


class ConfigError(CycleLabError, ValueError):
    """Malformed system definition or run configuration."""


class NonFiniteParameter(ConfigError):
    pass


class NonPositiveEpsilon(ConfigError):
    pass


class StepSizeUnderflow(CycleLabError):
    """Adaptive step fell below the hard floor (near-singular dynamics)."""


class NonFiniteState(CycleLabError):
    pass


class NoReturn(CycleLabError):
    """Orbit escaped, hit the time limit, or never came back to the section."""

    def __init__(self, message="", reason="NoReturn"):
        super().__init__(message)
        self.reason = reason


class NonTransverse(CycleLabError):
    """Section point where the flow is (nearly) tangent to the section."""


NonTransverseCrossing = NonTransverse


class DegeneratePolyline(CycleLabError):
    pass


class OnBoundary(CycleLabError):
    pass


class RangeUndetermined(CycleLabError):
    pass


class NoFoldFound(CycleLabError):
    pass


class NewtonDiverged(CycleLabError):
    pass


class JacobianSingular(CycleLabError):
    pass


class CycleLost(CycleLabError):
    def __init__(self, message="", last_good=None):
        super().__init__(message)
        self.last_good = last_good


class DegenerateSystem(CycleLabError):
    pass
