"""Structured validation reports listing every violated instance."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Violation:
    """One violated instance of a named rule, located by index tuple."""

    rule: str
    where: tuple
    detail: str = ""

    def as_dict(self) -> dict:
        return {"rule": self.rule, "where": list(self.where), "detail": self.detail}


@dataclass
class ValidationReport:
    """Outcome of an exhaustive table check; empty violation list means valid.

    All violations are collected (not just the first) so a bad table can be
    diffed entry by entry.
    """

    subject: str
    violations: list[Violation] = field(default_factory=list)
    checks: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, rule: str, where: tuple, detail: str = "") -> None:
        self.violations.append(Violation(rule, where, detail))

    def raise_if_failed(self) -> None:
        if not self.ok:
            head = "; ".join(
                f"{v.rule}@{v.where}" + (f" ({v.detail})" if v.detail else "")
                for v in self.violations[:5]
            )
            more = "" if len(self.violations) <= 5 else f" and {len(self.violations) - 5} more"
            raise ValueError(f"{self.subject}: {head}{more}")

    def as_dict(self) -> dict:
        return {
            "subject": self.subject,
            "ok": self.ok,
            "checks": self.checks,
            "violations": [v.as_dict() for v in self.violations],
            "notes": list(self.notes),
        }
