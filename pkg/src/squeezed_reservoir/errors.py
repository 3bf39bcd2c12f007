"""Exception hierarchy shared by all modules."""


class SimulationError(Exception):
    """Base class for every error raised by this package."""


class InvalidDimensionError(SimulationError, ValueError):
    pass


class InvalidStateError(SimulationError, ValueError):
    pass


class InvalidRateError(SimulationError, ValueError):
    pass


class TruncationError(SimulationError):
    """The Fock truncation is too small for the requested state or operator.

    ``defect`` carries the measured quantity (unitarity defect or leaked
    population) that failed the gate.
    """

    def __init__(self, message, defect):
        super().__init__(f"{message} (measured defect {defect:.3e})")
        self.defect = defect


class StiffnessError(SimulationError):
    pass


class IntegrationDiagnosticError(SimulationError):
    def __init__(self, message, time, magnitude):
        super().__init__(f"{message} at t={time:.6g} (magnitude {magnitude:.3e})")
        self.time = time
        self.magnitude = magnitude


class NonUniqueSteadyStateError(SimulationError):
    pass


class NumericalError(SimulationError):
    pass


class InsufficientDataError(SimulationError, ValueError):
    pass


class ConfigError(SimulationError, ValueError):
    """Invalid run configuration. ``field`` names the offending entry."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
