"""Exception hierarchy shared across the simulator."""


class GhzSimError(Exception):
    """Base class for every error raised by ghzsim."""


class ParameterError(GhzSimError, ValueError):
    """A physical or numerical parameter failed validation."""


class InvalidCutoffError(ParameterError):
    pass


class InvalidTransitionError(ParameterError):
    pass


class InvalidStateError(ParameterError):
    pass


class ShapeError(GhzSimError, ValueError):
    """Operator or state dimensions do not match."""


class SingularDetuningError(ParameterError):
    pass


class StepSizeError(GhzSimError, ArithmeticError):
    """Integrator drift exceeded tolerance; the caller must shrink dt."""


class OracleRefusedError(GhzSimError):
    """The dense Liouvillian oracle was asked for a system it will not build."""


class ConfigError(GhzSimError):
    """Configuration file could not be parsed or validated.

    ``problems`` lists every violation found, not just the first.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
