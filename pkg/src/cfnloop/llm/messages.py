"""Chat message and conversation types.

The conversation is the loop's memory: system prompt first, then the task
prompt, then strictly alternating assistant/user turns. It is append-only
by construction, which is what makes the full-history mode meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    content: str

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"invalid role {self.role!r}")
        if not self.content:
            raise ValueError("message content must be non-empty")


@dataclass(frozen=True)
class GenerationSettings:
    temperature: float = 0.0
    max_output_tokens: int = 8000
    model_name: str = "scripted"


@dataclass(frozen=True)
class Usage:
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency_ms: int = 0


class Conversation:
    """Ordered, append-only message history with role alternation enforced."""

    def __init__(self, system_prompt: str, task_prompt: str):
        self._messages: list[ChatMessage] = [
            ChatMessage("system", system_prompt),
            ChatMessage("user", task_prompt),
        ]

    @property
    def messages(self) -> tuple[ChatMessage, ...]:
        return tuple(self._messages)

    def __len__(self) -> int:
        return len(self._messages)

    def append(self, message: ChatMessage) -> None:
        last = self._messages[-1]
        expected = "assistant" if last.role in ("user", "system") else "user"
        if message.role != expected:
            raise ValueError(
                f"conversation roles must alternate: expected {expected!r}, got {message.role!r}"
            )
        self._messages.append(message)

    def transcript(self) -> list[dict]:
        return [{"role": m.role, "content": m.content} for m in self._messages]
