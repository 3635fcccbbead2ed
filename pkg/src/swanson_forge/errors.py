"""Exception hierarchy.

Every error raised by the package derives from :class:`SwansonError`, which is a
``ValueError`` so that callers validating user input can catch one type.
"""


class SwansonError(ValueError):
    """Base class for all package errors."""


# -- parameter pair -----------------------------------------------------------
class InvalidCouple(SwansonError):
    pass


class EqualParameters(InvalidCouple):
    pass


class SumExceedsOne(InvalidCouple):
    pass


class ProductBoundViolated(InvalidCouple):
    pass


# -- catalog ------------------------------------------------------------------
class UnknownModel(SwansonError):
    pass


class UnknownParameter(SwansonError):
    pass


class ConstraintViolated(SwansonError):
    def __init__(self, rule: str, message: str = ""):
        self.rule = rule
        super().__init__(f"{rule}: {message}" if message else rule)


class OutOfDomain(SwansonError):
    pass


class BeyondBoundStates(SwansonError):
    pass


# -- partner solve ------------------------------------------------------------
class NoRealRoot(SwansonError):
    pass


class NoBracketedRoot(SwansonError):
    pass


class ResidualNotConstant(SwansonError):
    pass


class NotConstant(SwansonError):
    pass


# -- special functions / waveforms -------------------------------------------
class DegenerateRecurrence(SwansonError):
    pass


class NormalizabilityViolated(ConstraintViolated):
    pass


class GaugeOverflow(SwansonError):
    def __init__(self, x: float, exponent: float):
        self.x = x
        self.exponent = exponent
        super().__init__(f"gauge exponent {exponent:.6g} at x={x:.6g} exceeds the overflow guard")


# -- numerics -----------------------------------------------------------------
class NonFiniteValue(SwansonError):
    pass


class WindowNotConverged(SwansonError):
    pass


class NotSymmetric(SwansonError):
    pass


class ConvergenceFailure(SwansonError):
    pass


class SizeGuard(SwansonError):
    pass
