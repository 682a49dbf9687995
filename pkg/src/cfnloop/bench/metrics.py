"""passItr@n, the error taxonomy, and experiment reports."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import EmptyRecordSet
from ..orchestrator.runner import RunRecord


def pass_itr(records: list[RunRecord], n: int) -> float:
    """Percentage of runs that deployed at or before iteration n."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not records:
        raise EmptyRecordSet("pass_itr needs at least one run record")
    hits = sum(1 for r in records if r.success_iteration is not None and r.success_iteration <= n)
    return 100.0 * hits / len(records)


@dataclass(frozen=True)
class ErrorCategory:
    category: str
    stage: str | None

    def __str__(self) -> str:
        return f"{self.category}/{self.stage or 'unknown'}"


# Ordered first-match rules over the five recurring error messages;
# placeholders (names, values, line numbers) are wildcarded.
_CATALOG_RULES: list[tuple[str, str, re.Pattern]] = [
    ("MissingValue", "Deployment", re.compile(r"Parameters: \[.*\] must have values")),
    (
        "ArbitraryDefaultValue",
        "Deployment",
        re.compile(r"Parameter validation failed: parameter value .* for parameter name .* does not exist"),
    ),
    (
        "SelfDefinedProperty",
        "Syntax",
        re.compile(r"Additional properties are not allowed \('.*' was unexpected\)"),
    ),
    ("NullSubstitution", "Syntax", re.compile(r"'Fn::Sub' isn't needed because there are no variables")),
    ("UnnecessaryWhitespace", "Format", re.compile(r"Line \d+: too many spaces inside brackets")),
]


def classify_error(message: str, stage: str | None = None) -> ErrorCategory:
    """Map an error message onto the taxonomy; unmatched messages are
    Uncategorized with whatever stage the caller observed."""
    for category, rule_stage, pattern in _CATALOG_RULES:
        if pattern.search(message):
            return ErrorCategory(category, rule_stage)
    return ErrorCategory("Uncategorized", stage)


@dataclass
class Report:
    pass_itr_at: dict[int, float] = field(default_factory=dict)
    per_model_pass_itr: dict[str, dict[int, float]] = field(default_factory=dict)
    per_difficulty_pass_itr1: dict[int, float] = field(default_factory=dict)
    error_stage_distribution: dict[str, int] = field(default_factory=dict)
    error_category_counts: dict[str, int] = field(default_factory=dict)
    feedback_level_attribution: dict[str, int] = field(default_factory=dict)
    total_runs: int = 0

    def to_dict(self) -> dict:
        return {
            "total_runs": self.total_runs,
            "pass_itr_at": {str(k): v for k, v in self.pass_itr_at.items()},
            "per_model_pass_itr": {
                m: {str(k): v for k, v in vals.items()} for m, vals in self.per_model_pass_itr.items()
            },
            "per_difficulty_pass_itr1": {str(k): v for k, v in self.per_difficulty_pass_itr1.items()},
            "error_stage_distribution": dict(self.error_stage_distribution),
            "error_category_counts": dict(self.error_category_counts),
            "feedback_level_attribution": dict(self.feedback_level_attribution),
        }


def _first_failure_stage(record: RunRecord) -> str | None:
    for iteration in record.iterations:
        if iteration.stage_reached != "Deployed":
            return iteration.stage_reached
    return None


def _max_tier_used(record: RunRecord) -> str:
    order = {"General": 1, "Detailed": 2, "Human": 3}
    best = 0
    for iteration in record.iterations:
        if iteration.feedback_tier_used is not None:
            best = max(best, order.get(iteration.feedback_tier_used, 0))
    return {0: "none needed", 1: "General", 2: "Detailed", 3: "Human"}[best]


def build_report(
    records: list[RunRecord],
    at: tuple[int, ...] = (1, 5, 10, 15, 25),
    difficulties: dict[str, int] | None = None,
) -> Report:
    """Aggregate run records into the benchmark report.

    The error-stage distribution counts the stage of the first failure of
    each run; runs that deploy on iteration one land in the no-failure
    bucket. Feedback attribution records the maximum tier a successful
    run needed. difficulties maps task_id -> level for the per-difficulty
    slice.
    """
    if not records:
        raise EmptyRecordSet("build_report needs at least one run record")

    report = Report(total_runs=len(records))
    report.pass_itr_at = {n: round(pass_itr(records, n), 1) for n in at}

    by_model: dict[str, list[RunRecord]] = {}
    for record in records:
        by_model.setdefault(record.model_name, []).append(record)
    report.per_model_pass_itr = {
        model: {n: round(pass_itr(group, n), 1) for n in at} for model, group in sorted(by_model.items())
    }

    if difficulties:
        by_level: dict[int, list[RunRecord]] = {}
        for record in records:
            level = difficulties.get(record.task_id)
            if level is not None:
                by_level.setdefault(level, []).append(record)
        report.per_difficulty_pass_itr1 = {
            level: round(pass_itr(group, 1), 1) for level, group in sorted(by_level.items())
        }

    stage_counts: dict[str, int] = {}
    category_counts: dict[str, int] = {}
    attribution: dict[str, int] = {}
    for record in records:
        first = _first_failure_stage(record)
        bucket = first if first is not None else "no failure"
        stage_counts[bucket] = stage_counts.get(bucket, 0) + 1
        for iteration in record.iterations:
            if iteration.stage_reached == "Deployed":
                continue
            for message in iteration.violations_summary:
                category = classify_error(message, stage=iteration.stage_reached)
                category_counts[category.category] = category_counts.get(category.category, 0) + 1
        if record.final_status == "Deployed":
            tier = _max_tier_used(record)
            attribution[tier] = attribution.get(tier, 0) + 1

    report.error_stage_distribution = dict(sorted(stage_counts.items()))
    report.error_category_counts = dict(sorted(category_counts.items()))
    report.feedback_level_attribution = dict(sorted(attribution.items()))
    return report


def render_text_report(report: Report) -> str:
    lines = [f"runs: {report.total_runs}", ""]
    lines.append("passItr@n (all models)")
    for n, value in sorted(report.pass_itr_at.items()):
        lines.append(f"  @{n:<3} {value:6.1f}%")
    if report.per_model_pass_itr:
        lines.append("")
        lines.append("passItr@n per model")
        header = "  " + "model".ljust(24) + "".join(f"@{n:<7}" for n in sorted(report.pass_itr_at))
        lines.append(header)
        for model, values in report.per_model_pass_itr.items():
            row = "  " + model.ljust(24) + "".join(f"{values[n]:<8.1f}" for n in sorted(values))
            lines.append(row)
    if report.per_difficulty_pass_itr1:
        lines.append("")
        lines.append("passItr@1 per difficulty level")
        for level, value in report.per_difficulty_pass_itr1.items():
            lines.append(f"  level {level}: {value:.1f}%")
    lines.append("")
    lines.append("first-failure stage distribution")
    for stage, count in report.error_stage_distribution.items():
        lines.append(f"  {stage:<12} {count}")
    lines.append("")
    lines.append("error categories")
    for category, count in report.error_category_counts.items():
        lines.append(f"  {category:<24} {count}")
    lines.append("")
    lines.append("maximum feedback level needed (successful runs)")
    for tier, count in report.feedback_level_attribution.items():
        lines.append(f"  {tier:<12} {count}")
    return "\n".join(lines) + "\n"


def write_report(report: Report, out_dir: str | Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    (out_dir / "report.txt").write_text(render_text_report(report))
