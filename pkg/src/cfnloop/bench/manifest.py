"""Benchmark manifest loading with eager reference validation.

Every entry must point at a reference template that parses and survives
all three stages in a fresh environment; a benchmark with undeployable
references would make passItr meaningless. Difficulty is recomputed from
the reference and wins over the stored value (with a warning) so stale
manifests cannot skew per-difficulty reporting.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..deploy.engine import DeploymentFailure, deploy
from ..deploy.environment import new_environment
from ..errors import ManifestError, ParseError
from ..template import classify_difficulty, measure, parse_template
from ..validators.format import check_format
from ..validators.resource_spec import ResourceSpec, load_resource_spec
from ..validators.syntax import check_syntax

logger = logging.getLogger(__name__)


@dataclass
class Task:
    task_id: str
    prompt: str
    reference_path: Path
    difficulty: int
    services: list[str] = field(default_factory=list)
    reference_text: str = ""


def _validate_reference(task_id: str, text: str, spec: ResourceSpec) -> str | None:
    """Returns an error string when the reference is not deployable."""
    report = check_format(text)
    if not report.passed:
        return f"{task_id}: reference fails format stage: {report.violations[0].message}"
    try:
        template = parse_template(text)
    except ParseError as exc:
        return f"{task_id}: reference does not parse: {exc}"
    report = check_syntax(template, spec)
    if not report.passed:
        first = report.violations[0]
        return f"{task_id}: reference fails syntax stage at {first.path}: {first.message}"
    result = deploy(new_environment(), template, resource_spec=spec)
    if isinstance(result, DeploymentFailure):
        return f"{task_id}: reference fails deployment: {result.message}"
    return None


def load_manifest(path: str | Path, resource_spec: ResourceSpec | None = None) -> list[Task]:
    """Load tasks from a YAML manifest and validate each reference eagerly."""
    path = Path(path)
    if not path.exists():
        raise ManifestError([f"manifest file not found: {path}"])
    raw = yaml.safe_load(path.read_text())
    if not isinstance(raw, list):
        raise ManifestError([f"manifest {path} must be a list of task entries"])

    spec = resource_spec or load_resource_spec()
    tasks: list[Task] = []
    problems: list[str] = []
    seen_ids: set[str] = set()

    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            problems.append(f"entry {i}: not a mapping")
            continue
        task_id = str(entry.get("id") or "")
        if not task_id:
            problems.append(f"entry {i}: missing id")
            continue
        if task_id in seen_ids:
            problems.append(f"{task_id}: duplicate task id")
            continue
        seen_ids.add(task_id)
        prompt = entry.get("prompt")
        if not prompt:
            problems.append(f"{task_id}: missing prompt")
            continue
        reference = entry.get("reference")
        if not reference:
            problems.append(f"{task_id}: missing reference path")
            continue
        reference_path = (path.parent / reference).resolve()
        if not reference_path.exists():
            problems.append(f"{task_id}: reference file not found: {reference}")
            continue

        text = reference_path.read_text()
        error = _validate_reference(task_id, text, spec)
        if error:
            problems.append(error)
            continue

        computed = classify_difficulty(measure(text))
        stored = entry.get("difficulty")
        if stored is not None and int(stored) != computed:
            logger.warning(
                "task %s: manifest difficulty %s disagrees with recomputed %s; using recomputed",
                task_id,
                stored,
                computed,
            )
        tasks.append(
            Task(
                task_id=task_id,
                prompt=str(prompt),
                reference_path=reference_path,
                difficulty=computed,
                services=[str(s) for s in entry.get("services", [])],
                reference_text=text,
            )
        )

    if problems:
        raise ManifestError(problems)
    return tasks
