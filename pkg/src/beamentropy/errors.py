class BeamEntropyError(Exception):
    """Base class for errors raised by this package."""


class DomainError(BeamEntropyError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ConstraintError(BeamEntropyError, ValueError):
    """Configuration violates a deployment-scenario constraint."""


class EmptyHistogramError(BeamEntropyError, ValueError):
    pass


class ConfigError(BeamEntropyError, ValueError):
    """Malformed or invalid run configuration.  ``where`` names the line or field."""

    def __init__(self, message: str, where: str | None = None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class ChannelFormatError(BeamEntropyError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)
