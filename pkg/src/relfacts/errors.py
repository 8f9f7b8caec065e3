"""Exception hierarchy shared by every layer of the package."""


class RelfactsError(Exception):
    """Base class for all errors raised by relfacts."""


class UsageError(RelfactsError, ValueError):
    """Bad arguments: unknown labels, wrong counts, indices out of range."""


class SizingError(RelfactsError, ValueError):
    """An operator or space would be too large, or a register too small."""


class ContractViolation(RelfactsError, ValueError):
    """An input breaks a mathematical precondition (Hermiticity, norm, ...)."""


class PreconditionError(ContractViolation):
    """A physical precondition fails, e.g. an apparatus not in its ready state."""


class DegenerateMeasurementError(RelfactsError):
    """Every outcome of a measurement has vanishing probability."""


class ConfigurationError(RelfactsError):
    """Observables or scenario pieces that cannot be matched up."""
