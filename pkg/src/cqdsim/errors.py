"""Exception types raised across the simulator."""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class SizeError(SimulationError, ValueError):
    """Register size outside the supported range."""


class QubitIndexError(SimulationError, IndexError):
    """Qubit index out of range, or a repeated index where distinct ones are required."""


class NotUnitaryError(SimulationError, ValueError):
    """Gate matrix failed the unitarity check."""


class DimensionError(SimulationError, ValueError):
    """Two states of different qubit counts were compared."""


class ResourceExhaustedError(SimulationError, RuntimeError):
    """A bounded retry loop ran out of attempts."""


class ProtocolError(SimulationError):
    """A protocol step received inconsistent inputs."""


class ConfigError(SimulationError, ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
