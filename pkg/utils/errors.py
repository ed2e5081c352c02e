# Error Types
# ===========
# Exceptions raised by the lab. Failed mathematical checks are NOT exceptions;
# they are reported as CheckResult records (see utils.report_utils).


class LabError(Exception):
    """Base class for every error raised by the lab."""


class PreconditionError(LabError, ValueError):
    """An argument is outside the documented domain (bad rank, center, size...)."""


class BudgetExceededError(LabError):
    """
    A computation would exceed one of the configured budgets.

    Attributes:
        budget (str): Name of the budget, matching the config variable
        limit (int): The configured limit
        requested (int): What the call would have needed
    """

    def __init__(self, budget: str, limit: int, requested: int):
        super().__init__(f"budget '{budget}' exceeded: requested {requested}, limit {limit}")
        self.budget = budget
        self.limit = limit
        self.requested = requested

    def as_dict(self) -> dict:
        return {
            "error": "budget_exceeded",
            "budget": self.budget,
            "limit": self.limit,
            "requested": self.requested,
        }


class InvariantViolationError(LabError):
    """An exact identity that must always hold did not (an internal bug)."""


class NumericOverflowError(LabError, OverflowError):
    """A log-space evaluation left the representable floating point range."""
