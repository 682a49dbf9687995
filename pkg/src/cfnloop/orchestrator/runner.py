"""The generate -> validate -> feed-back loop for one benchmark task.

Each iteration asks the provider for a template, runs the three stages in
order (short-circuiting at the first failure), escalates the feedback
tier from the failing stage's cumulative failure count, and appends the
exchange to the conversation. Every deployment attempt gets a fresh
simulated environment so runs never contaminate each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from ..deploy.engine import DeploymentFailure, delete_stack, deploy
from ..errors import EmptyExtraction, ParseError, ProviderError, ScriptExhausted, TransportError
from ..llm.messages import ChatMessage, Conversation, GenerationSettings, Usage
from ..llm.prompts import PromptConfig, build_system_prompt
from ..llm.providers import ChatProvider, generate
from ..stages import FormatViolation, Stage, StageReport
from ..template import extract_code_block, parse_template
from ..validators.format import check_format
from ..validators.resource_spec import ResourceSpec, load_resource_spec
from ..validators.syntax import check_syntax
from .feedback import FeedbackTier, StageBudget, make_feedback, next_tier
from .sessions import SessionStore

FINAL_DEPLOYED = "Deployed"
FINAL_BUDGET_EXHAUSTED = "BudgetExhausted"
FINAL_PROVIDER_FAILED = "ProviderFailed"

RUN_LOG_SCHEMA = 1


@dataclass
class TaskInput:
    task_id: str
    prompt: str
    reference_text: str = ""


@dataclass
class RunOptions:
    history_mode: str = "full"  # full | last-error-only
    human_mode: str = "off"  # off | tty | serve
    human_responder: Callable[[dict], str] | None = None
    global_cap: int | None = None  # default 15, or 25 with human tier
    settings: GenerationSettings = field(default_factory=GenerationSettings)
    prompt_config: PromptConfig = field(default_factory=PromptConfig)
    supplied_params: dict = field(default_factory=dict)
    resource_spec: ResourceSpec | None = None
    session_store: SessionStore | None = None
    session_timeout: float | None = None


@dataclass
class IterationRecord:
    index: int
    template_text: str | None
    stage_reached: str  # Format | Syntax | Deployment | Deployed
    violations_summary: list[str]
    feedback_tier_used: str | None
    feedback_text: str | None
    usage: Usage

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "template_text": self.template_text,
            "stage_reached": self.stage_reached,
            "violations_summary": list(self.violations_summary),
            "feedback_tier_used": self.feedback_tier_used,
            "feedback_text": self.feedback_text,
            "usage": {
                "prompt_tokens": self.usage.prompt_tokens,
                "completion_tokens": self.usage.completion_tokens,
                "latency_ms": self.usage.latency_ms,
            },
        }


@dataclass
class RunRecord:
    task_id: str
    model_name: str
    history_mode: str
    iterations: list[IterationRecord] = field(default_factory=list)
    success_iteration: int | None = None
    final_status: str = FINAL_BUDGET_EXHAUSTED

    def to_dict(self) -> dict:
        return {
            "schema": RUN_LOG_SCHEMA,
            "task_id": self.task_id,
            "model_name": self.model_name,
            "history_mode": self.history_mode,
            "success_iteration": self.success_iteration,
            "final_status": self.final_status,
            "iterations": [it.to_dict() for it in self.iterations],
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "RunRecord":
        iterations = [
            IterationRecord(
                index=it["index"],
                template_text=it.get("template_text"),
                stage_reached=it["stage_reached"],
                violations_summary=list(it.get("violations_summary", [])),
                feedback_tier_used=it.get("feedback_tier_used"),
                feedback_text=it.get("feedback_text"),
                usage=Usage(**it.get("usage", {})),
            )
            for it in raw.get("iterations", [])
        ]
        return cls(
            task_id=raw["task_id"],
            model_name=raw.get("model_name", ""),
            history_mode=raw.get("history_mode", "full"),
            iterations=iterations,
            success_iteration=raw.get("success_iteration"),
            final_status=raw.get("final_status", FINAL_BUDGET_EXHAUSTED),
        )


def _validate_once(
    reply_text: str,
    spec: ResourceSpec,
    env_factory: Callable,
    supplied_params: dict,
) -> tuple[StageReport | None, str | None]:
    """Run stages 1-3 over one model reply.

    Returns (None, template_text) on successful deployment, otherwise the
    failing stage's report. The deployed stack is deleted immediately so
    the environment finishes clean either way.
    """
    try:
        template_text = extract_code_block(reply_text)
    except EmptyExtraction:
        report = StageReport(
            Stage.FORMAT,
            [FormatViolation(1, None, "parse-failure", "no template block found in reply")],
        )
        return report, None

    format_report = check_format(template_text)
    if not format_report.passed:
        return format_report, template_text

    try:
        template = parse_template(template_text)
    except ParseError as exc:  # format stage passed, so this is unexpected
        line = exc.line or 1
        report = StageReport(
            Stage.FORMAT,
            [FormatViolation(line, exc.column, "parse-failure", f"Line {line}: syntax error: {exc}")],
        )
        return report, template_text

    syntax_report = check_syntax(template, spec)
    if not syntax_report.passed:
        return syntax_report, template_text

    env = env_factory()
    result = deploy(env, template, supplied_params, resource_spec=spec)
    if isinstance(result, DeploymentFailure):
        return StageReport(Stage.DEPLOYMENT, [result]), template_text
    delete_stack(env, result.stack_id)
    return None, template_text


def _obtain_human_text(
    options: RunOptions,
    task: Any,
    failing_stage: Stage,
    attempts: int,
    report: StageReport,
    conversation: Conversation,
    template_text: str | None,
) -> str:
    context = {
        "task_id": task.task_id,
        "failing_stage": failing_stage.value,
        "attempts": attempts,
        "violations": report.messages(),
        "conversation": conversation.transcript(),
        "current_template": template_text or "",
        "reference_template": getattr(task, "reference_text", "") or "",
    }
    if options.human_responder is not None:
        return options.human_responder(context)
    if options.human_mode == "serve":
        store = options.session_store
        if store is None:
            raise ValueError("human_mode=serve requires a session store")
        session = store.create(
            task_id=context["task_id"],
            failing_stage=context["failing_stage"],
            attempts=attempts,
            violations=context["violations"],
            conversation=context["conversation"],
            current_template=context["current_template"],
            reference_template=context["reference_template"],
        )
        return store.wait_for_feedback(session, timeout=options.session_timeout)
    # interactive terminal fallback
    print(f"\n[human feedback needed] task {context['task_id']} failed at {context['failing_stage']}:")
    for message in context["violations"]:
        print(f"  {message}")
    return input("feedback> ")


def run_task(
    task: Any,
    provider: ChatProvider,
    env_factory: Callable,
    budgets: StageBudget | None = None,
    options: RunOptions | None = None,
) -> RunRecord:
    """Drive one task through the iterative loop until deployment or budget end."""
    budgets = budgets or StageBudget()
    options = options or RunOptions()
    human_enabled = options.human_mode != "off" or options.human_responder is not None
    cap = options.global_cap or (25 if human_enabled else 15)
    spec = options.resource_spec or load_resource_spec()

    system_prompt = build_system_prompt(options.prompt_config)
    conversation = Conversation(system_prompt, task.prompt)
    counters = {Stage.FORMAT: 0, Stage.SYNTAX: 0, Stage.DEPLOYMENT: 0}
    record = RunRecord(
        task_id=task.task_id,
        model_name=options.settings.model_name,
        history_mode=options.history_mode,
    )

    for index in range(1, cap + 1):
        try:
            reply, usage = generate(provider, conversation, options.settings)
        except (TransportError, ProviderError, ScriptExhausted):
            record.final_status = FINAL_PROVIDER_FAILED
            return record
        conversation.append(reply)

        report, template_text = _validate_once(reply.content, spec, env_factory, options.supplied_params)

        if report is None:
            record.iterations.append(
                IterationRecord(index, template_text, "Deployed", [], None, None, usage)
            )
            record.success_iteration = index
            record.final_status = FINAL_DEPLOYED
            return record

        failing_stage = report.stage
        prior_failures = counters[failing_stage]
        tier = next_tier(prior_failures, budgets, human_enabled)
        if tier is None:
            # A regression hit a stage whose budget was already consumed.
            record.iterations.append(
                IterationRecord(index, template_text, failing_stage.value, report.messages(), None, None, usage)
            )
            record.final_status = FINAL_BUDGET_EXHAUSTED
            return record

        human_text = None
        if tier is FeedbackTier.HUMAN:
            human_text = _obtain_human_text(
                options, task, failing_stage, prior_failures, report, conversation, template_text
            )
        feedback = make_feedback(report, tier, human_text)
        counters[failing_stage] += 1
        record.iterations.append(
            IterationRecord(
                index,
                template_text,
                failing_stage.value,
                report.messages(),
                tier.label,
                feedback.text,
                usage,
            )
        )

        if options.history_mode == "full":
            conversation.append(ChatMessage("user", feedback.text))
        else:
            conversation = Conversation(system_prompt, task.prompt)
            conversation.append(ChatMessage("assistant", reply.content))
            conversation.append(ChatMessage("user", feedback.text))

        # The stage that just failed may now be out of budget; stop before
        # generating an attempt that could receive no feedback.
        if next_tier(counters[failing_stage], budgets, human_enabled) is None:
            record.final_status = FINAL_BUDGET_EXHAUSTED
            return record

    record.final_status = FINAL_BUDGET_EXHAUSTED
    return record
