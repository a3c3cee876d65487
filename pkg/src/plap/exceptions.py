"""Exception types raised by the solver and its diagnostics."""


class ConfigurationError(ValueError):
    """Invalid grid, pole or solver configuration."""


class OffLatticeError(ConfigurationError):
    """A pole does not coincide with a lattice node."""

    def __init__(self, point, tolerance):
        self.point = tuple(point)
        self.tolerance = tolerance
        super().__init__(
            f"pole off-lattice: ({point[0]!r}, {point[1]!r}) has no node "
            f"within {tolerance:g}"
        )


class EvaluationError(ValueError):
    """Energy evaluation on a non-finite field."""


class SolverDivergedError(RuntimeError):
    """The secant iteration produced a non-finite iterate or kept climbing."""

    def __init__(self, iteration, reason):
        self.iteration = iteration
        self.reason = reason
        super().__init__(f"solver diverged at iteration {iteration}: {reason}")


class DiagnosticRefused(ValueError):
    """A diagnostic's preconditions do not hold for the given solution."""
