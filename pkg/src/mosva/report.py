"""Check reports: violation lists plus counts of verified instances.

Counting matters as much as passing: a checker that silently skips every
instance (e.g. because a cutoff leaves nothing to verify) must be
distinguishable from one that verified thousands, so every check records
what it looked at and every skip records why.
"""

from __future__ import annotations

from collections import Counter


class Report:
    def __init__(self, title: str):
        self.title = title
        self.violations: list[str] = []
        self.counts: Counter = Counter()

    @property
    def ok(self) -> bool:
        return not self.violations

    def record(self, key: str, n: int = 1):
        self.counts[key] += n

    def fail(self, message: str):
        self.violations.append(message)

    def require(self, condition: bool, message: str, key: str) -> bool:
        self.counts[key] += 1
        if not condition:
            self.violations.append(message)
        return condition

    def merge(self, other: "Report"):
        self.violations.extend(f"{other.title}: {v}" for v in other.violations)
        self.counts.update(other.counts)

    def checked(self, key: str) -> int:
        return self.counts[key]

    def summary(self) -> str:
        lines = [f"{self.title}: {'pass' if self.ok else 'FAIL'}"]
        for key in sorted(self.counts):
            lines.append(f"  {key}: {self.counts[key]}")
        for v in self.violations:
            lines.append(f"  violation: {v}")
        return "\n".join(lines)

    def __repr__(self) -> str:
        return self.summary()
