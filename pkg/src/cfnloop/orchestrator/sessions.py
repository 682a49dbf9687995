"""Blocking human-feedback sessions shared between runs and the review API.

A run that reaches the human tier creates a session and blocks until an
operator submits text (through the HTTP session API or any other
caller). Single writer per session; any number of readers.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from ..errors import MissingHumanText, SessionAlreadyResolved, UnknownSession


@dataclass
class Session:
    session_id: str
    task_id: str
    failing_stage: str
    attempts: int
    violations: list[str]
    conversation: list[dict]
    current_template: str
    reference_template: str
    resolved: bool = False
    text: str | None = None
    _event: threading.Event = field(default_factory=threading.Event, repr=False)

    def summary(self) -> dict:
        return {
            "id": self.session_id,
            "task_id": self.task_id,
            "failing_stage": self.failing_stage,
            "attempts": self.attempts,
        }

    def detail(self) -> dict:
        return {
            "id": self.session_id,
            "task_id": self.task_id,
            "failing_stage": self.failing_stage,
            "attempts": self.attempts,
            "violations": list(self.violations),
            "conversation": list(self.conversation),
            "current_template": self.current_template,
            "reference_template": self.reference_template,
            "resolved": self.resolved,
        }


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._counter = 0

    def create(
        self,
        task_id: str,
        failing_stage: str,
        attempts: int,
        violations: list[str],
        conversation: list[dict],
        current_template: str,
        reference_template: str,
    ) -> Session:
        with self._lock:
            self._counter += 1
            session = Session(
                session_id=f"s-{self._counter:04d}",
                task_id=task_id,
                failing_stage=failing_stage,
                attempts=attempts,
                violations=violations,
                conversation=conversation,
                current_template=current_template,
                reference_template=reference_template,
            )
            self._sessions[session.session_id] = session
            return session

    def list_pending(self) -> list[dict]:
        with self._lock:
            return [s.summary() for s in self._sessions.values() if not s.resolved]

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"no session with id '{session_id}'")
        return session

    def submit_feedback(self, session_id: str, text: str) -> None:
        session = self.get(session_id)
        with self._lock:
            if session.resolved:
                raise SessionAlreadyResolved(f"session '{session_id}' already has feedback")
            session.text = text
            session.resolved = True
        session._event.set()

    def wait_for_feedback(self, session: Session, timeout: float | None = None) -> str:
        if not session._event.wait(timeout):
            raise MissingHumanText(f"no feedback arrived for session '{session.session_id}'")
        assert session.text is not None
        return session.text
