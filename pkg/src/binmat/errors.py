"""Shared exception types."""


class BudgetExceeded(RuntimeError):
    """An exact computation was refused because it would blow its size cap.

    Carries a human-readable hint about the sampling / Monte-Carlo fallback
    where one exists. CLI maps this to exit code 2.
    """
