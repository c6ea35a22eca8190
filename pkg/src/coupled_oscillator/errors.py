"""Exception hierarchy shared by all modules."""


class OscillatorError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(OscillatorError, ValueError):
    pass


class NonPositive(ParameterError):
    """A quantity that must be strictly positive was not."""

    def __init__(self, name, value):
        self.name = name
        self.value = value
        super().__init__(f"{name} must be > 0, got {value!r}")


class CouplingTooStrong(ParameterError):
    """|mu| >= omega: the eigenfunctions are no longer normalizable."""

    def __init__(self, mu, omega, label=None):
        self.mu = mu
        self.omega = omega
        where = f"{label}: " if label else ""
        super().__init__(
            f"{where}mu={mu!r} violates |mu| < omega (omega={omega!r}); "
            "bound (finite) motion requires |mu| < omega"
        )


class DimensionTooSmall(ParameterError):
    pass


class DimensionMismatch(ParameterError):
    pass


class TruncationInsufficient(ParameterError):
    pass


class NumericalFailure(OscillatorError, RuntimeError):
    """A numerical routine failed to produce a trustworthy result."""


class ConvergenceFailure(NumericalFailure):
    pass


class SolveFailure(NumericalFailure):
    pass


class ZeroOverlap(NumericalFailure):
    pass
