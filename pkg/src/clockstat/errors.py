"""Exception hierarchy shared by all clockstat modules."""


class ClockstatError(Exception):
    """Base class for clockstat failures."""


class DimensionError(ClockstatError, ValueError):
    """Operands are non-square or have incompatible shapes."""


class ValidationError(ClockstatError, ValueError):
    """A model, parameter set, or state violates its invariants."""


class ConvergenceError(ClockstatError):
    """An eigenvalue computation failed to converge or missed its residual target."""


class DegeneracyError(ClockstatError):
    """The leading eigenvalue is not unique within the gap tolerance."""

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


class SpectralAnomalyError(ClockstatError):
    """A spectral quantity expected to be real came out complex beyond tolerance."""


class BranchError(ClockstatError):
    """No cube-root branch of the closed-form expression is real within tolerance."""

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


class SteadyStateError(ClockstatError):
    """The generator does not possess a unique steady state."""


class PropagatorError(ClockstatError):
    """The no-jump propagator increased the state norm, which is impossible."""


class InconsistencyError(ClockstatError):
    """Two independent computations of the same quantity disagree."""

    def __init__(self, message, values=()):
        super().__init__(message)
        self.values = tuple(values)
