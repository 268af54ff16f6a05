"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid grid, potential, coefficient or experiment configuration.

    ``problems`` holds every violation found, each prefixed with the
    offending field path.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class NumericalError(RuntimeError):
    """Base class for failures of the numerical pipeline."""


class SingularityError(NumericalError):
    """A nonlinear functional produced NaN/Inf (division by a vanishing density)."""


class AccuracyError(NumericalError):
    """Norm drift, Richardson divergence or a failed self-consistency check."""


class AnsatzBreakdownError(NumericalError):
    """The Gaussian ansatz lost positive definiteness of its real quadratic form."""
