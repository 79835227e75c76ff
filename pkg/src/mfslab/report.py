"""Check reports: an ordered list of named pass/fail/skipped results."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


@dataclass
class Check:
    name: str
    status: str
    witness: Any = None

    def to_json(self) -> dict:
        out = {"name": self.name, "status": self.status}
        if self.status == FAIL:
            out["witness"] = self.witness
        return out


@dataclass
class Report:
    checks: List[Check] = field(default_factory=list)
    meta: Dict[str, Any] = field(default_factory=dict)

    def add(self, name: str, ok: bool, witness: Any = None) -> None:
        if ok:
            self.checks.append(Check(name, PASS))
        else:
            self.checks.append(Check(name, FAIL, witness if witness is not None else {}))

    def skip(self, name: str) -> None:
        self.checks.append(Check(name, SKIPPED))

    def extend(self, other: "Report", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.status, c.witness))

    @property
    def passed(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    def failures(self) -> List[Check]:
        return [c for c in self.checks if c.status == FAIL]

    def status_of(self, name: str) -> Optional[str]:
        for c in self.checks:
            if c.name == name:
                return c.status
        return None

    def to_json(self) -> dict:
        out: Dict[str, Any] = {"checks": [c.to_json() for c in self.checks]}
        out.update(self.meta)
        return out

    def __repr__(self):
        bad = ", ".join(c.name for c in self.failures())
        return f"Report({len(self.checks)} checks, failures: [{bad}])"
