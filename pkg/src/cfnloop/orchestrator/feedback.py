"""Tiered feedback: stage budgets, tier selection, and message assembly.

Assistance escalates per stage: two general attempts (stage name only),
four detailed attempts (full tool messages), and, when enabled, four
human attempts. Failure counters are cumulative per stage across the
whole run, so a regression to an earlier stage consumes that stage's
remaining budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

from ..errors import MissingHumanText
from ..stages import Stage, StageReport


class FeedbackTier(IntEnum):
    GENERAL = 1
    DETAILED = 2
    HUMAN = 3

    @property
    def label(self) -> str:
        return {1: "General", 2: "Detailed", 3: "Human"}[self.value]


@dataclass(frozen=True)
class StageBudget:
    general_attempts: int = 2
    detailed_attempts: int = 4
    human_attempts: int = 4

    def total(self, human_enabled: bool) -> int:
        base = self.general_attempts + self.detailed_attempts
        return base + self.human_attempts if human_enabled else base


# Stage -> the error-type phrase used in general feedback.
STAGE_ERROR_TYPES = {
    Stage.FORMAT: "YAML Syntax",
    Stage.SYNTAX: "CloudFormation Template Syntax",
    Stage.DEPLOYMENT: "Deployment",
}


def general_feedback_text(stage: Stage) -> str:
    return f"Based on the evaluation, the template contains {STAGE_ERROR_TYPES[stage]} Errors."


def next_tier(failures: int, budgets: StageBudget, human_enabled: bool) -> FeedbackTier | None:
    """Tier for a failure at a stage with `failures` prior failures.

    Returns None when the stage budget is exhausted.
    """
    if failures < budgets.general_attempts:
        return FeedbackTier.GENERAL
    if failures < budgets.general_attempts + budgets.detailed_attempts:
        return FeedbackTier.DETAILED
    if human_enabled and failures < budgets.total(True):
        return FeedbackTier.HUMAN
    return None


@dataclass(frozen=True)
class FeedbackMessage:
    tier: FeedbackTier
    text: str


def make_feedback(
    stage_report: StageReport, tier: FeedbackTier, human_text: str | None = None
) -> FeedbackMessage:
    """Build the feedback message for a failed stage report.

    General: the fixed per-stage sentence. Detailed: that sentence plus
    every violation message verbatim, one per line. Human: operator text
    verbatim.
    """
    if tier is FeedbackTier.HUMAN:
        if not human_text:
            raise MissingHumanText("human tier selected but no operator text supplied")
        return FeedbackMessage(tier, human_text)
    general = general_feedback_text(stage_report.stage)
    if tier is FeedbackTier.GENERAL:
        return FeedbackMessage(tier, general)
    lines = [general] + stage_report.messages()
    return FeedbackMessage(tier, "\n".join(lines))
