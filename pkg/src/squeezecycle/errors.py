"""Exception hierarchy shared by all modules."""


class DomainError(ValueError):
    """An argument lies outside the validity domain of an operation."""


class ConfigError(ValueError):
    """A run configuration is malformed. Carries the offending field."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class NumericalError(RuntimeError):
    """Base class for failures of a numerical procedure."""


class IntegrationError(NumericalError):
    """An ODE integration failed, e.g. step-size underflow."""

    def __init__(self, message, time=None, mode=None):
        self.time = time
        self.mode = mode
        super().__init__(message)


class PrecisionError(NumericalError):
    """A requested quantity cannot be evaluated to the required precision."""


class CapacityError(NumericalError):
    """A truncation cutoff would exceed its hard cap."""


class ConsistencyError(NumericalError):
    """Two independent evaluations of the same quantity disagree."""


class UnreliableResultError(NumericalError):
    """A truncated computation leaked too much weight past its cutoff."""
