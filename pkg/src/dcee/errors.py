"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Scenario configuration is malformed or internally inconsistent."""


class DomainError(ValueError):
    """An optimum map was evaluated at a singular parameter value."""


class RegulationError(ValueError):
    """The servo gain equations are unsolvable for the given plant."""


class NumericalError(RuntimeError):
    """A simulation produced non-finite values mid-run.

    Carries the step index at which the failure was detected and, when the
    scenario had an output path configured, the location of the partial
    trace that was persisted before raising.
    """

    def __init__(self, message, step=None, partial_path=None):
        super().__init__(message)
        self.step = step
        self.partial_path = partial_path
