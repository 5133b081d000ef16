"""Exception hierarchy shared by all modules."""


class FpmeError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(FpmeError, ValueError):
    pass


class DegenerateScaling(FpmeError, ValueError):
    """N(m-1) + 2s = 0: the scaling exponents are undefined."""


class RegimeError(FpmeError, ValueError):
    """Requested object does not exist in the parameter regime."""


class DomainError(FpmeError, ValueError):
    pass


class PoleError(FpmeError, ValueError):
    pass


class DimensionError(FpmeError, ValueError):
    pass


class QuadratureFailure(FpmeError, RuntimeError):
    pass


class SlowDecay(FpmeError, RuntimeError):
    pass


class GridMismatch(FpmeError, ValueError):
    pass


class GridOverflow(FpmeError, ValueError):
    pass


class BoxTooSmall(FpmeError, RuntimeError):
    pass


class ZeroMass(FpmeError, ValueError):
    pass


class StabilityViolation(FpmeError, RuntimeError):
    pass


class BlowUp(FpmeError, RuntimeError):
    pass


class NotRadial(FpmeError, ValueError):
    pass


class NoConvergence(FpmeError, RuntimeError):
    pass


class WindowTooSmall(FpmeError, ValueError):
    pass


class MassMismatch(FpmeError, ValueError):
    pass


class InputNotOrdered(FpmeError, ValueError):
    pass
