"""Validation stage names and the shared stage report shape."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class Stage(str, Enum):
    FORMAT = "Format"
    SYNTAX = "Syntax"
    DEPLOYMENT = "Deployment"


@dataclass
class FormatViolation:
    line: int
    column: int | None
    rule_id: str  # brackets-spacing | indentation | duplicate-key | parse-failure | trailing-space
    message: str


@dataclass
class SyntaxViolation:
    path: str  # slash-separated, e.g. Resources/MyTopic/Properties/Foo
    rule_id: str
    message: str


@dataclass
class StageReport:
    stage: Stage
    violations: list[Any] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def messages(self) -> list[str]:
        return [v.message for v in self.violations]
