"""Small tagged result type used for every semi-decidable check."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Verdict:
    """``kind`` is a short tag such as ``"holds-on-samples"``; ``data`` is JSON-able."""

    kind: str
    data: dict = field(default_factory=dict)
    ok: bool = True

    def to_json(self):
        return {"verdict": self.kind, "ok": self.ok, **self.data}

    def __bool__(self):
        return self.ok
