"""Exception types raised across the package."""


class KpoError(Exception):
    """Base class for all errors raised by kpospec."""


class InvalidDimensionError(KpoError, ValueError):
    pass


class ContractViolation(KpoError, ValueError):
    """An input breaks a documented precondition (e.g. a non-Hermitian matrix)."""


class AmbiguousTrackingError(KpoError):
    """Adiabatic labels could not be carried across a drive-amplitude step."""

    def __init__(self, beta_prev, beta, label, overlap):
        self.beta_prev = beta_prev
        self.beta = beta
        self.label = label
        self.overlap = overlap
        super().__init__(
            f"label {label} tracked with overlap {overlap:.3f} < 0.7 between "
            f"beta/2pi={beta_prev / 6.283185307179586:.6g} and "
            f"{beta / 6.283185307179586:.6g} MHz; refine the beta grid"
        )


class TruncationEdgeError(KpoError, ValueError):
    pass


class NonUniqueSteadyStateError(KpoError):
    pass


class ConsistencyError(KpoError, ValueError):
    pass


class SingularTermError(KpoError, ZeroDivisionError):
    pass


class DegenerateDataError(KpoError, ValueError):
    pass


class ConfigError(KpoError, ValueError):
    pass


class IngestError(KpoError, ValueError):
    """A CSV input could not be parsed; ``line`` is 1-based."""

    def __init__(self, path, line, message):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")
