"""Experiment execution: run a manifest of tasks and persist the outputs.

An experiment directory always ends up with the resolved config echo,
one RunRecord per line in runs.jsonl (in manifest order, so scripted
runs are byte-identical across executions), a tasks.json difficulty map,
and the report pair.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable

from ..config import AppConfig
from ..deploy.environment import EnvConfig, new_environment
from ..errors import ConfigError
from ..llm.messages import GenerationSettings
from ..llm.providers import HttpChatProvider, ScriptedProvider, load_script_library
from ..orchestrator.feedback import StageBudget
from ..orchestrator.runner import RunOptions, RunRecord, run_task
from ..orchestrator.sessions import SessionStore
from ..validators.resource_spec import load_resource_spec
from .manifest import Task, load_manifest
from .metrics import build_report, write_report

logger = logging.getLogger(__name__)


def run_experiment(
    config: AppConfig,
    provider_kind: str = "script",
    session_store: SessionStore | None = None,
    on_record: Callable[[RunRecord], None] | None = None,
    human_responder: Callable[[dict], str] | None = None,
) -> list[RunRecord]:
    """Run every manifest task and write logs plus report to the out dir."""
    if not config.manifest:
        raise ConfigError(["an experiment needs a manifest"])
    tasks = load_manifest(config.manifest)
    spec = load_resource_spec()
    env_config = EnvConfig.from_yaml(config.env_config) if config.env_config else EnvConfig()
    env_config.validate()

    script_library: dict[str, list[str]] = {}
    if provider_kind == "script":
        if not config.script:
            raise ConfigError(["provider 'script' needs a script fixture (--script)"])
        script_library = load_script_library(config.script)

    budgets = StageBudget(config.general_attempts, config.detailed_attempts, config.human_attempts)
    human_enabled = config.human_mode != "off" or human_responder is not None
    global_cap = config.global_cap_human if human_enabled else config.global_cap
    settings = GenerationSettings(
        temperature=config.temperature,
        max_output_tokens=config.max_output_tokens,
        model_name=config.model,
    )

    def run_one(task: Task) -> RunRecord:
        if provider_kind == "script":
            provider = ScriptedProvider(script_library.get(task.task_id, []), name=task.task_id)
        else:
            provider = HttpChatProvider(config.base_url, api_key_env=config.api_key_env)
        options = RunOptions(
            history_mode=config.history_mode,
            human_mode=config.human_mode,
            human_responder=human_responder,
            global_cap=global_cap,
            settings=settings,
            resource_spec=spec,
            session_store=session_store,
        )
        record = run_task(task, provider, lambda: new_environment(env_config), budgets, options)
        if on_record is not None:
            on_record(record)
        logger.info("task %s: %s (success_iteration=%s)", task.task_id, record.final_status, record.success_iteration)
        return record

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(run_one, tasks))
    else:
        records = [run_one(task) for task in tasks]

    write_outputs(config, tasks, records)
    return records


def write_outputs(config: AppConfig, tasks: list[Task], records: list[RunRecord]) -> Path:
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    from ..config import echo_config  # local import avoids a cycle at module load

    echo_config(config, out_dir)

    with (out_dir / "runs.jsonl").open("w") as handle:
        for record in records:
            handle.write(json.dumps(record.to_dict()) + "\n")

    difficulties = {task.task_id: task.difficulty for task in tasks}
    (out_dir / "tasks.json").write_text(json.dumps(difficulties, indent=2, sort_keys=True) + "\n")

    report = build_report(records, difficulties=difficulties)
    write_report(report, out_dir)
    return out_dir


def read_run_log(path: str | Path) -> list[RunRecord]:
    path = Path(path)
    records = []
    with path.open() as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(RunRecord.from_dict(json.loads(line)))
    return records
