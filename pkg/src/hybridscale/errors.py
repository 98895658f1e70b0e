"""Exception hierarchy shared across the scheduler and simulator."""


class SchedulerError(Exception):
    """Base class for all library errors."""


class UnknownFunctionError(SchedulerError):
    pass


class UnknownPodError(SchedulerError):
    pass


class UnknownGpuError(SchedulerError):
    pass


class PlacementError(SchedulerError):
    """A pod placement was rejected (SM alignment or quota headroom)."""


class TableFormatError(SchedulerError):
    """A performance table failed validation at load time."""


class FilterDegenerateError(SchedulerError):
    """Kalman update denominator collapsed to zero."""


class UnroutableFunctionError(SchedulerError):
    """A function has no Running pod to receive traffic."""


class TraceFormatError(SchedulerError):
    pass


class ConfigError(SchedulerError):
    pass


class InvariantViolation(SchedulerError):
    """Cluster bookkeeping broke an internal invariant; always a bug."""
