"""Pass/fail report records shared by the verification routines and the CLI."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .linalg import RatMatrix, format_rational


def jsonable(value: Any) -> Any:
    """Convert exact values to JSON-friendly data (rationals become ``"p/q"`` strings)."""
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, bool) or value is None or isinstance(value, (int, float, str)):
        return value
    if hasattr(value, "to_json"):
        return value.to_json()
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return str(value)


@dataclass
class Item:
    id: str
    passed: bool
    value: Any = None
    expected: Any = None
    note: str = ""

    def to_json(self) -> dict:
        out = {"id": self.id, "pass": self.passed, "value": jsonable(self.value),
               "expected": jsonable(self.expected)}
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class Section:
    name: str
    items: list[Item] = field(default_factory=list)

    def add(self, id: str, passed: bool, value=None, expected=None, note: str = "") -> Item:
        item = Item(id, bool(passed), value, expected, note)
        self.items.append(item)
        return item

    def check_equal(self, id: str, value, expected, note: str = "") -> Item:
        return self.add(id, value == expected, value, expected, note)

    @property
    def passed(self) -> bool:
        return all(i.passed for i in self.items)

    def failures(self) -> list[Item]:
        return [i for i in self.items if not i.passed]

    def to_json(self) -> dict:
        return {"name": self.name, "pass": self.passed,
                "counts": {"total": len(self.items), "failed": len(self.failures())},
                "items": [i.to_json() for i in self.items]}

    def summary(self) -> str:
        return f"{self.name}: {len(self.items) - len(self.failures())}/{len(self.items)} passed"


def dumps(obj: Any) -> str:
    return json.dumps(jsonable(obj), indent=1, sort_keys=False)
