from __future__ import annotations


class BellcavError(Exception):
    """Base class for errors raised by bellcav."""


class ConfigError(BellcavError, ValueError):
    pass


class InvalidStateError(BellcavError, ValueError):
    pass


class NumericalError(BellcavError, RuntimeError):
    pass


class PropagatorConvergenceError(NumericalError):
    def __init__(self, message: str, residual: float, order: int) -> None:
        super().__init__(message)
        self.residual = residual
        self.order = order


class IntegratorInstabilityError(NumericalError):
    def __init__(self, message: str, drift: float, substeps: int) -> None:
        super().__init__(message)
        self.drift = drift
        self.substeps = substeps


class CutoffConvergenceError(NumericalError):
    def __init__(self, message: str, delta: float, n_max: int) -> None:
        super().__init__(message)
        self.delta = delta
        self.n_max = n_max
