"""Small record types shared by the bound calculators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class BoundReport:
    """A computed bound together with the formula and parameters behind it."""

    value: float
    formula: str
    params: dict[str, Any]
    extras: dict[str, Any] = field(default_factory=dict)
    notes: tuple[str, ...] = ()
    approximate: bool = False

    def as_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "formula": self.formula,
            "params": dict(self.params),
            "extras": dict(self.extras),
            "notes": list(self.notes),
            "approximate": self.approximate,
        }
