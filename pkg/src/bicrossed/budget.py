"""Deterministic work-unit budgeting and size caps for the search kernels."""

from __future__ import annotations


class CapExceeded(RuntimeError):
    """A size cap (group order, census n, alternating k, ...) was exceeded."""


class BudgetExceeded(RuntimeError):
    """A search ran out of work units.

    ``partial`` holds whatever results were completed before the budget ran
    out; they are flagged, never silently returned as a full answer.
    """

    def __init__(self, message: str, partial: list | None = None):
        super().__init__(message)
        self.partial = partial if partial is not None else []


class Budget:
    """Counts abstract work units; deterministic across machines.

    Search kernels charge one unit per elementary evaluation (one deformation
    compatibility check, one closure product, one table propagation).  A
    limit of ``None`` never trips.
    """

    def __init__(self, limit: int | None):
        if limit is not None and limit <= 0:
            raise ValueError(f"budget limit must be positive, got {limit}")
        self.limit = limit
        self.used = 0

    def charge(self, units: int = 1) -> None:
        self.used += units
        if self.limit is not None and self.used > self.limit:
            raise BudgetExceeded(f"work budget of {self.limit} units exhausted")

    def fork(self) -> "Budget":
        """Fresh counter with the same limit (per-branch accounting)."""
        return Budget(self.limit)
