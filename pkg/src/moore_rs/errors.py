"""Exception hierarchy shared by every module of the package."""


class MooreError(Exception):
    """Base class for all errors raised by moore_rs."""


class ExtensionUndefined(MooreError, ArithmeticError):
    """The natural interval extension is not well-defined on the given box."""


class DivisionByZeroInterval(ExtensionUndefined, ZeroDivisionError):
    """Interval division where the divisor contains zero."""


class DomainError(ExtensionUndefined, ValueError):
    """A standard function was applied outside its real domain."""

    def __init__(self, name, interval):
        super().__init__(f"{name} is undefined on {interval}")
        self.name = name
        self.interval = interval


class UnboundedEnclosure(MooreError):
    """An enclosure has an infinite endpoint where a finite one is required."""


class EvalDomainError(MooreError, ArithmeticError):
    """Floating-point evaluation hit a singularity (log of nonpositive, x/0, ...)."""

    def __init__(self, message, point=None):
        super().__init__(message if point is None else f"{message} at {point}")
        self.point = point


class ParseError(MooreError, ValueError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class UnknownFunction(ParseError):
    pass


class VariableOutOfRange(ParseError):
    pass


class InvalidSpec(MooreError, ValueError):
    pass


class DegenerateMass(MooreError):
    """The envelope integral is zero, so no proposal distribution exists."""


class OutOfDomain(MooreError, ValueError):
    pass


class InsufficientChains(MooreError, ValueError):
    pass


class DimensionTooLarge(MooreError, ValueError):
    pass
