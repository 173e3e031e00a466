"""Exception hierarchy shared by every module."""


class PxNeumannError(Exception):
    """Base class for all package errors."""


class ExponentOutOfRange(PxNeumannError, ValueError):
    pass


class DomainError(PxNeumannError, ValueError):
    pass


class BoxViolation(PxNeumannError, ValueError):
    pass


class MembershipError(PxNeumannError, ValueError):
    pass


class BisectionBracketFailure(PxNeumannError, RuntimeError):
    pass


class PropertyViolation(PxNeumannError, AssertionError):
    """A checked inequality or identity failed; ``item`` names which one."""

    def __init__(self, item, message=""):
        self.item = item
        super().__init__(f"[{item}] {message}" if message else f"[{item}]")


class HypothesisViolation(PropertyViolation):
    pass


class PrincipleViolation(PropertyViolation):
    def __init__(self, item, message="", cell=None):
        self.cell = cell
        super().__init__(item, message)


class MonotonicityViolation(PropertyViolation):
    pass


class SandwichViolation(PropertyViolation):
    def __init__(self, eps, message=""):
        self.eps = eps
        super().__init__(f"sandwich eps={eps:g}", message)


class NoConvergence(PxNeumannError, RuntimeError):
    def __init__(self, iters, residual, message=""):
        self.iters = iters
        self.residual = residual
        super().__init__(message or f"no convergence after {iters} iterations (residual {residual:.3e})")


class ParseError(PxNeumannError, ValueError):
    pass


class UnsupportedFormat(PxNeumannError, ValueError):
    pass


class ConfigError(PxNeumannError, ValueError):
    def __init__(self, path, key, message):
        self.path = path
        self.key = key
        super().__init__(f"{path}: {key}: {message}")
