"""Command-line surface.

Exit codes: 0 success, 1 validation/deployment failure, 2 usage or
configuration errors (click's own usage failures also exit 2).
"""

from __future__ import annotations

import json
import sys
import threading
import time
from pathlib import Path

import click

from .bench.experiment import read_run_log, run_experiment
from .bench.metrics import build_report, render_text_report, write_report
from .config import AppConfig, load_config
from .deploy.engine import DeploymentFailure, deploy
from .deploy.environment import EnvConfig, new_environment
from .errors import CfnLoopError, ConfigError, ManifestError, ParseError
from .llm.messages import GenerationSettings
from .llm.providers import HttpChatProvider, ScriptedProvider, load_script_library
from .orchestrator.feedback import StageBudget
from .orchestrator.runner import RunOptions, TaskInput, run_task
from .orchestrator.server import RunRegistry, SessionServer
from .orchestrator.sessions import SessionStore
from .template import load_template_file
from .trust.intent import IntentSpec, eval_intent
from .trust.policy import load_policies, scan_security
from .validators.format import check_format
from .validators.resource_spec import load_resource_spec
from .validators.syntax import check_syntax


@click.group()
def main():
    """Generate, validate, and benchmark deployable CloudFormation templates."""


def _fail_config(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(2)


def _build_config(config_path: str | None, **overrides) -> AppConfig:
    try:
        return load_config(config_path, overrides)
    except ConfigError as exc:
        _fail_config(exc)


def _run_stages_12(path: str, format_hint: str | None = None):
    """Returns (template, failed_report) where exactly one is None."""
    report = check_format(Path(path).read_text())
    if not report.passed:
        return None, report
    template = load_template_file(path, format_hint)
    syntax = check_syntax(template, load_resource_spec())
    if not syntax.passed:
        return None, syntax
    return template, None


@main.command()
@click.option("--prompt", help="Infrastructure requirement text.")
@click.option("--prompt-file", type=click.Path(exists=True), help="File containing the requirement.")
@click.option("--task-id", default="adhoc", show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--provider", "provider_kind", type=click.Choice(["http", "script"]), default="http")
@click.option("--script", type=click.Path(exists=True), help="Reply fixture for the scripted provider.")
@click.option("--model", help="Model name sent to the provider.")
@click.option("--history", "history_mode", type=click.Choice(["full", "last-error-only"]))
@click.option("--human", "human_mode", type=click.Choice(["off", "tty"]), default="off")
@click.option("--global-cap", type=int)
def generate(prompt, prompt_file, task_id, config_path, provider_kind, script, model, history_mode, human_mode, global_cap):
    """Run the iterative loop for one prompt and print the final template."""
    if not prompt and not prompt_file:
        raise click.UsageError("provide --prompt or --prompt-file")
    if prompt_file:
        prompt = Path(prompt_file).read_text().strip()
    config = _build_config(
        config_path, model=model, history_mode=history_mode, human_mode=human_mode, global_cap=global_cap, script=script
    )

    if provider_kind == "script":
        if not config.script:
            _fail_config(ConfigError(["--provider script needs --script FIXTURE"]))
        library = load_script_library(config.script)
        provider = ScriptedProvider(library.get(task_id, []), name=task_id)
    else:
        provider = HttpChatProvider(config.base_url, api_key_env=config.api_key_env)

    env_config = EnvConfig.from_yaml(config.env_config) if config.env_config else EnvConfig()
    options = RunOptions(
        history_mode=config.history_mode,
        human_mode=config.human_mode,
        global_cap=config.global_cap_human if config.human_mode != "off" else config.global_cap,
        settings=GenerationSettings(config.temperature, config.max_output_tokens, config.model),
    )
    budgets = StageBudget(config.general_attempts, config.detailed_attempts, config.human_attempts)
    record = run_task(
        TaskInput(task_id=task_id, prompt=prompt),
        provider,
        lambda: new_environment(env_config),
        budgets,
        options,
    )

    final_template = next(
        (it.template_text for it in reversed(record.iterations) if it.template_text), None
    )
    click.echo(f"status: {record.final_status}")
    click.echo(f"iterations: {len(record.iterations)}")
    if record.success_iteration:
        click.echo(f"deployed at iteration {record.success_iteration}")
    if final_template:
        click.echo("--- final template ---")
        click.echo(final_template)
    sys.exit(0 if record.final_status == "Deployed" else 1)


@main.command()
@click.argument("template_file", type=click.Path(exists=True))
@click.option("--format-hint", type=click.Choice(["yaml", "json"]))
def validate(template_file, format_hint):
    """Run stages 1-2 (format and syntax) on a template file."""
    report = check_format(Path(template_file).read_text())
    if not report.passed:
        click.echo("format stage failed:")
        for violation in report.violations:
            click.echo(f"  [{violation.rule_id}] {violation.message}")
        sys.exit(1)
    click.echo("format stage passed")
    try:
        template = load_template_file(template_file, format_hint)
    except ParseError as exc:
        click.echo(f"parse failed: {exc}")
        sys.exit(1)
    syntax = check_syntax(template, load_resource_spec())
    if not syntax.passed:
        click.echo("syntax stage failed:")
        for violation in syntax.violations:
            click.echo(f"  [{violation.rule_id}] {violation.path}: {violation.message}")
        sys.exit(1)
    click.echo("syntax stage passed")


@main.command("deploy-sim")
@click.argument("template_file", type=click.Path(exists=True))
@click.option("--env", "env_path", type=click.Path(exists=True), help="Environment fixture YAML.")
@click.option("--param", "-p", "params", multiple=True, help="NAME=VALUE parameter override.")
def deploy_sim(template_file, env_path, params):
    """Run stage 3 (simulated deployment); exits 0 iff CREATE_COMPLETE."""
    template, failed = _run_stages_12(template_file)
    if failed is not None:
        click.echo(f"{failed.stage.value} stage failed; fix before deploying:")
        for violation in failed.violations:
            click.echo(f"  {violation.message}")
        sys.exit(1)

    supplied = {}
    for raw in params:
        if "=" not in raw:
            raise click.UsageError(f"--param needs NAME=VALUE, got {raw!r}")
        name, _, value = raw.partition("=")
        supplied[name] = value

    env_config = EnvConfig.from_yaml(env_path) if env_path else EnvConfig()
    env = new_environment(env_config)
    result = deploy(env, template, supplied)
    if isinstance(result, DeploymentFailure):
        click.echo(f"status: ROLLBACK_COMPLETE ({result.phase})")
        click.echo(result.message)
        sys.exit(1)
    click.echo(f"status: {result.status.value}")
    for logical, physical in result.provisioned:
        click.echo(f"  {logical} -> {physical}")
    sys.exit(0)


@main.group()
def bench():
    """Benchmark experiments over a task manifest."""


@bench.command("run")
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--model", help="Model name for the provider and the report.")
@click.option("--provider", "provider_kind", type=click.Choice(["http", "script"]), default="script", show_default=True)
@click.option("--script", type=click.Path(exists=True))
@click.option("--human", "human_mode", type=click.Choice(["off", "serve", "tty"]))
@click.option("--history", "history_mode", type=click.Choice(["full", "last-error-only"]))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--workers", type=int)
@click.option("--env", "env_config", type=click.Path(exists=True))
@click.option("--global-cap", type=int)
@click.option("--serve-port", type=int, default=8080, show_default=True, help="Session API port for --human serve.")
def bench_run(manifest, model, provider_kind, script, human_mode, history_mode, out_dir, config_path, workers, env_config, global_cap, serve_port):
    """Run every manifest task against a provider and write logs + report."""
    config = _build_config(
        config_path,
        manifest=manifest,
        model=model,
        script=script,
        human_mode=human_mode,
        history_mode=history_mode,
        out_dir=out_dir,
        workers=workers,
        env_config=env_config,
        global_cap=global_cap,
    )
    server = None
    store = None
    registry = None
    if config.human_mode == "serve":
        store = SessionStore()
        registry = RunRegistry()
        server = SessionServer(store, registry, port=serve_port).start()
        click.echo(f"session API listening on {server.address} (review console or POST feedback there)")
    try:
        records = run_experiment(
            config,
            provider_kind=provider_kind,
            session_store=store,
            on_record=registry.put if registry else None,
        )
    except (ConfigError, ManifestError) as exc:
        _fail_config(exc)
    finally:
        if server is not None:
            server.stop()
    deployed = sum(1 for r in records if r.final_status == "Deployed")
    click.echo(f"{deployed}/{len(records)} tasks deployed; outputs in {config.out_dir}")


@bench.command("report")
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True))
@click.option("--at", "at_spec", default="1,5,10,15", show_default=True)
def bench_report(in_dir, at_spec):
    """Recompute the report from an experiment directory's run log."""
    in_dir = Path(in_dir)
    log_path = in_dir / "runs.jsonl"
    if not log_path.exists():
        _fail_config(ConfigError([f"no runs.jsonl in {in_dir}"]))
    records = read_run_log(log_path)
    at = tuple(int(x) for x in at_spec.split(","))
    difficulties = None
    tasks_path = in_dir / "tasks.json"
    if tasks_path.exists():
        difficulties = {k: int(v) for k, v in json.loads(tasks_path.read_text()).items()}
    report = build_report(records, at=at, difficulties=difficulties)
    write_report(report, in_dir)
    click.echo(render_text_report(report))


@main.command("intent-eval")
@click.option("--template", "template_file", required=True, type=click.Path(exists=True))
@click.option("--spec", "spec_file", required=True, type=click.Path(exists=True))
def intent_eval(template_file, spec_file):
    """Score a template against an intent spec; exits 0 iff fully matched."""
    try:
        template = load_template_file(template_file)
        spec = IntentSpec.from_yaml(spec_file)
        result = eval_intent(template, spec)
    except CfnLoopError as exc:
        _fail_config(exc)
    summary = {
        "task_id": spec.task_id,
        "resource_ok": result.resource_ok,
        "attribute_ok": result.attribute_ok,
        "both_ok": result.both_ok,
    }
    click.echo(json.dumps(summary, indent=2))
    sys.exit(0 if result.both_ok else 1)


@main.command("security-scan")
@click.option("--template", "template_file", required=True, type=click.Path(exists=True))
@click.option("--policies", "policies_file", type=click.Path(exists=True))
def security_scan(template_file, policies_file):
    """Scan a template against the policy set; exits 0 iff compliant."""
    try:
        template = load_template_file(template_file)
        policies = load_policies(policies_file)
        scan = scan_security(template, policies, template_id=Path(template_file).stem)
    except CfnLoopError as exc:
        _fail_config(exc)
    applicable = scan.applicable_checks()
    summary = {
        "template": scan.template_id,
        "applicable": len(applicable),
        "passed": sum(1 for c in applicable if c.passed),
        "failed": [
            {"policy_id": c.policy_id, "failing_resource": c.failing_resource}
            for c in applicable
            if not c.passed
        ],
        "compliant": scan.fully_compliant(),
    }
    click.echo(json.dumps(summary, indent=2))
    sys.exit(0 if scan.fully_compliant() else 1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True, type=int)
@click.option("--frontend", "static_dir", type=click.Path(exists=True), help="Review console build to serve at /.")
@click.option("--manifest", type=click.Path(exists=True), help="Run this manifest with the human tier enabled.")
@click.option("--provider", "provider_kind", type=click.Choice(["http", "script"]), default="script", show_default=True)
@click.option("--script", type=click.Path(exists=True))
@click.option("--model")
@click.option("--out", "out_dir", type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True))
def serve(host, port, static_dir, manifest, provider_kind, script, model, out_dir, config_path):
    """Serve the session/run API (and optionally the review console)."""
    store = SessionStore()
    registry = RunRegistry()
    server = SessionServer(store, registry, host=host, port=port, static_dir=static_dir).start()
    click.echo(f"session API listening on {server.address}")

    worker = None
    if manifest:
        config = _build_config(
            config_path,
            manifest=manifest,
            script=script,
            model=model,
            out_dir=out_dir or "experiments/serve",
            human_mode="serve",
        )

        def _run():
            try:
                run_experiment(
                    config,
                    provider_kind=provider_kind,
                    session_store=store,
                    on_record=registry.put,
                )
                click.echo("experiment finished; server still running (Ctrl-C to stop)")
            except CfnLoopError as exc:
                click.echo(f"experiment failed: {exc}", err=True)

        worker = threading.Thread(target=_run, daemon=True)
        worker.start()

    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        click.echo("shutting down")
    finally:
        server.stop()


if __name__ == "__main__":
    main()
