class FedSubmaxError(Exception):
    """Base class for all errors raised by this package."""


class InputError(FedSubmaxError, ValueError):
    """An argument violates an operation's precondition."""


class SizeError(InputError):
    """An exact (enumerative) routine was asked to handle too large an instance."""


class InvariantViolation(FedSubmaxError, RuntimeError):
    """An internal invariant failed; usually means an oracle is not what it claims."""


class AggregationOverflow(FedSubmaxError, OverflowError):
    """A value does not fit the fixed-point range of the masked aggregator."""


class ConfigError(FedSubmaxError):
    """Experiment configuration could not be loaded or validated."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
