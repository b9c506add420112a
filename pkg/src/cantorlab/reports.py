"""Certificate reports: named exact checks with both sides kept as rationals.

Every construction that asserts a paper bound returns (or embeds) a Report
so the CLI and the acceptance suite can print one PASS/FAIL line per
certified inequality, with no decimal approximations anywhere.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any


def fmt(value: Any) -> Any:
    """Render a value for a report: Fractions as 'num/den' strings, exactly."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, (list, tuple)):
        return [fmt(v) for v in value]
    if isinstance(value, dict):
        return {str(k): fmt(v) for k, v in value.items()}
    # Domain objects serialize through their elements/fields.
    from . import serialize

    return serialize.to_doc(value)


_REL = {
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    "==": lambda a, b: a == b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
    "!=": lambda a, b: a != b,
}


class Check:
    """One certified relation; lhs and rhs stay exact."""

    __slots__ = ("name", "lhs", "relation", "rhs", "passed")

    def __init__(self, name: str, lhs, relation: str, rhs, passed: bool | None = None):
        self.name = name
        self.lhs = lhs
        self.relation = relation
        self.rhs = rhs
        if passed is None:
            passed = _REL[relation](lhs, rhs)
        self.passed = bool(passed)

    def to_doc(self) -> dict:
        return {
            "check": self.name,
            "lhs": fmt(self.lhs),
            "relation": self.relation,
            "rhs": fmt(self.rhs),
            "result": "PASS" if self.passed else "FAIL",
        }

    def __repr__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.lhs} {self.relation} {self.rhs}"


class Report:
    """Ordered collection of checks plus arbitrary exact payload data."""

    def __init__(self, title: str):
        self.title = title
        self.checks: list[Check] = []
        self.data: dict[str, Any] = {}

    def check(self, name: str, lhs, relation: str, rhs) -> Check:
        c = Check(name, lhs, relation, rhs)
        self.checks.append(c)
        return c

    def record(self, name: str, passed: bool) -> Check:
        """A boolean certificate that is not a two-sided comparison."""
        c = Check(name, bool(passed), "==", True, passed=passed)
        self.checks.append(c)
        return c

    def put(self, key: str, value) -> None:
        self.data[key] = value

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def require(self) -> "Report":
        if not self.passed:
            failed = [c for c in self.checks if not c.passed]
            raise AssertionError(f"{self.title}: failed checks {failed}")
        return self

    def to_doc(self) -> dict:
        return {
            "title": self.title,
            "checks": [c.to_doc() for c in self.checks],
            "data": fmt(self.data),
            "result": "PASS" if self.passed else "FAIL",
        }

    def __repr__(self) -> str:
        lines = [f"Report({self.title}): {'PASS' if self.passed else 'FAIL'}"]
        lines += [f"  {c!r}" for c in self.checks]
        return "\n".join(lines)


def dumps(doc: Any) -> str:
    """Canonical JSON: sorted keys, no floats, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"
