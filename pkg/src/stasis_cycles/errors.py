"""Exception hierarchy shared by all modules."""


class StasisCyclesError(Exception):
    """Base class for every error raised by this package."""


class ExprSyntaxError(StasisCyclesError):
    """Malformed expression text; ``position`` is a 0-based character offset."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)


class UnknownFunctionError(ExprSyntaxError):
    pass


class VariableIndexError(ExprSyntaxError):
    pass


class DomainError(StasisCyclesError, ArithmeticError):
    """Evaluation left the domain of the expression or produced a non-finite value."""


class SystemFileError(StasisCyclesError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownSystemError(StasisCyclesError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown system"


class IntegrationError(StasisCyclesError):
    pass


class MaxStepsExceeded(IntegrationError):
    pass


class StepSizeUnderflow(IntegrationError):
    pass


class TransversalityError(StasisCyclesError):
    """The flow is (nearly) tangent to the section hyperplane."""


class ValidityError(StasisCyclesError):
    """A point or time left the region where a chart is trusted."""


class NoConvergence(StasisCyclesError):
    pass


class SingularJacobian(StasisCyclesError):
    pass


class NotAntiParallel(StasisCyclesError):
    pass


class ZeroField(StasisCyclesError):
    pass


class DegenerateStasis(StasisCyclesError):
    """The stasis point fails the non-singularity hypothesis."""


class DegenerateCycle(StasisCyclesError):
    """The constructed cycle has a non-positive f1 arc."""


class ClosureError(StasisCyclesError):
    pass


class NotPlanar(StasisCyclesError):
    pass


class OpenCurve(StasisCyclesError):
    pass
