"""Chat-completion providers: OpenAI-compatible HTTP and a scripted stand-in.

The HTTP provider retries transport failures and 5xx responses (up to
three attempts, exponential backoff) but never retries 4xx: a well-formed
model reply that fails validation is an iteration, not a retry. The
scripted provider replays a fixed queue so whole experiments are
deterministic and runnable offline.
"""

from __future__ import annotations

import os
import threading
import time
from typing import Callable, Protocol

import requests

from ..errors import ProviderError, ScriptExhausted, TransportError
from .messages import ChatMessage, Conversation, GenerationSettings, Usage

import yaml


class ChatProvider(Protocol):
    def complete(self, messages: list[ChatMessage], settings: GenerationSettings) -> tuple[str, Usage]:
        ...


class HttpChatProvider:
    """POSTs to {base_url}/chat/completions with an OpenAI-style payload.

    Credentials come from the environment variable named by api_key_env,
    never from configuration values on disk.
    """

    def __init__(
        self,
        base_url: str,
        api_key_env: str = "CFNLOOP_API_KEY",
        max_attempts: int = 3,
        backoff_base: float = 0.5,
        timeout: float = 120.0,
        sleep: Callable[[float], None] = time.sleep,
        session: requests.Session | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.api_key_env = api_key_env
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.timeout = timeout
        self._sleep = sleep
        self._session = session or requests.Session()

    def complete(self, messages: list[ChatMessage], settings: GenerationSettings) -> tuple[str, Usage]:
        payload = {
            "model": settings.model_name,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
            "temperature": settings.temperature,
            "max_tokens": settings.max_output_tokens,
        }
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"

        url = f"{self.base_url}/chat/completions"
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            if attempt:
                self._sleep(self.backoff_base * (2 ** (attempt - 1)))
            started = time.monotonic()
            try:
                response = self._session.post(url, json=payload, headers=headers, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = TransportError(f"request to {url} failed: {exc}")
                continue
            if response.status_code >= 500:
                last_error = TransportError(f"server error {response.status_code} from {url}")
                continue
            if response.status_code >= 400:
                raise ProviderError(
                    f"provider rejected request ({response.status_code}): {response.text[:500]}",
                    status_code=response.status_code,
                )
            latency_ms = int((time.monotonic() - started) * 1000)
            return _parse_completion(response.json(), latency_ms)
        raise last_error or TransportError(f"no response from {url}")


def _parse_completion(body: dict, latency_ms: int) -> tuple[str, Usage]:
    try:
        content = body["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise ProviderError(f"malformed completion response: {exc}") from exc
    usage_raw = body.get("usage") or {}
    usage = Usage(
        prompt_tokens=int(usage_raw.get("prompt_tokens", 0)),
        completion_tokens=int(usage_raw.get("completion_tokens", 0)),
        latency_ms=latency_ms,
    )
    return content, usage


class ScriptedProvider:
    """Replays queued reply bodies in order; exhaustion is an error."""

    def __init__(self, replies: list[str], name: str = "scripted"):
        self._replies = list(replies)
        self._index = 0
        self._lock = threading.Lock()
        self.name = name

    def complete(self, messages: list[ChatMessage], settings: GenerationSettings) -> tuple[str, Usage]:
        with self._lock:
            if self._index >= len(self._replies):
                raise ScriptExhausted(
                    f"scripted provider '{self.name}' has no reply for call {self._index + 1}"
                )
            reply = self._replies[self._index]
            self._index += 1
        prompt_tokens = sum(len(m.content) for m in messages) // 4
        return reply, Usage(prompt_tokens=prompt_tokens, completion_tokens=len(reply) // 4, latency_ms=0)


def load_script_library(path) -> dict[str, list[str]]:
    """Load a YAML fixture mapping task id -> ordered list of reply bodies."""
    with open(path) as handle:
        raw = yaml.safe_load(handle) or {}
    if not isinstance(raw, dict):
        raise ProviderError(f"script fixture {path} must map task ids to reply lists")
    library = {}
    for task_id, replies in raw.items():
        if not isinstance(replies, list):
            raise ProviderError(f"replies for task {task_id!r} must be a list")
        library[str(task_id)] = [str(r) for r in replies]
    return library


def generate(
    provider: ChatProvider, conversation: Conversation, settings: GenerationSettings
) -> tuple[ChatMessage, Usage]:
    """Run one completion. The conversation is not mutated; callers append."""
    content, usage = provider.complete(list(conversation.messages), settings)
    return ChatMessage("assistant", content), usage
