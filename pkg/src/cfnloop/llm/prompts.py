"""System prompt assembly: role, task, and an optional step-ordering hint."""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_ROLE = (
    "You are an experienced cloud DevOps engineer who writes AWS CloudFormation "
    "templates that deploy successfully on the first attempt."
)

DEFAULT_TASK = (
    "Produce a complete AWS CloudFormation template in YAML that satisfies the "
    "user's infrastructure requirement. Reply with exactly one fenced code block "
    "containing the full template and nothing else outside it. Every parameter "
    "must either have a sensible default or be resolvable in a fresh AWS account."
)

DEFAULT_STEPS = (
    "Work in this order: first identify the resources the requirement needs, "
    "then the parameters they expose, then each resource's properties, and "
    "finally output the assembled template."
)


@dataclass(frozen=True)
class PromptConfig:
    role_text: str = DEFAULT_ROLE
    task_text: str = DEFAULT_TASK
    chain_of_thought: bool = True
    steps_text: str = DEFAULT_STEPS


def build_system_prompt(cfg: PromptConfig | None = None) -> str:
    cfg = cfg or PromptConfig()
    blocks = [f"## Role\n{cfg.role_text}", f"## Task\n{cfg.task_text}"]
    if cfg.chain_of_thought:
        blocks.append(f"## Approach\n{cfg.steps_text}")
    return "\n\n".join(blocks)
