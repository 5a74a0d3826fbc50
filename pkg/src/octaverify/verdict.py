from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class Verdict:
    """Outcome of a check; truthy iff it passed.  ``details`` carries witnesses or counterexamples."""

    ok: bool
    reason: str = ""
    details: dict[str, Any] = field(default_factory=dict)

    def __bool__(self):
        return self.ok

    @classmethod
    def passed(cls, reason="", **details):
        return cls(True, reason, details)

    @classmethod
    def failed(cls, reason, **details):
        return cls(False, reason, details)
