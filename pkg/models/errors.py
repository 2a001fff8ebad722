class SfnCoverageError(Exception):
    """Base class for every error raised by the package."""


class ScenarioError(SfnCoverageError, ValueError):
    """
    Scenario file or value object violates the schema or an invariant.

    Attributes:
        parameter (str): Dotted name of the offending parameter, if known
    """

    def __init__(self, message: str, parameter: str = ''):
        self.parameter = parameter
        if parameter:
            message = f"{parameter}: {message}"
        super().__init__(message)


class DomainError(SfnCoverageError, ValueError):
    """Argument outside the domain of an operation."""


class NumericalInstability(SfnCoverageError, ArithmeticError):
    """
    A closed-form evaluation produced a value it cannot have.

    Attributes:
        raw_value (float): The offending value before any clamping
    """

    def __init__(self, message: str, raw_value: float = float('nan')):
        self.raw_value = raw_value
        super().__init__(message)


class AllPowersZero(SfnCoverageError, ValueError):
    """Every SFN station transmits 0 W, so the useful signal vanishes."""


class Infeasible(SfnCoverageError):
    """The power allocation problem has no point meeting the outage target."""
