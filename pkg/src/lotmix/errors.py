"""Exception types and warning categories shared across the toolkit."""


class LotmixError(Exception):
    """Base class for all toolkit errors."""


class SchemaError(LotmixError):
    """A document is structurally malformed (missing or mistyped field)."""


class ValidationError(LotmixError):
    """A value violates a documented invariant."""


class InfeasibleInstanceError(ValidationError):
    """No backlog-free schedule can exist for the instance."""


class InfeasibleScheduleError(LotmixError):
    """A schedule violates feasibility and cannot be priced."""


class PlanMismatchError(LotmixError):
    """A purchase plan does not belong to the schedule it is priced with."""


class UnboundedModelError(LotmixError):
    """A linear relaxation is unbounded; the model is missing constraints."""


class LimitExceededError(LotmixError):
    """An internal limit (iterations, nodes, enumeration size) was hit."""


class UtilizationWarning(UserWarning):
    """Material utilization fell below the instance's reporting floor."""
