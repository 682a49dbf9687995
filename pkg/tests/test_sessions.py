import threading
import time

import pytest
import requests

from cfnloop.deploy import new_environment
from cfnloop.errors import SessionAlreadyResolved, UnknownSession
from cfnloop.llm import ScriptedProvider
from cfnloop.orchestrator import RunOptions, SessionStore, TaskInput, run_task
from cfnloop.orchestrator.server import RunRegistry, SessionServer

from conftest import SNS_TEMPLATE_WITH_DEFAULT, fenced

BAD_SYNTAX = "Resources:\n  B:\n    Type: AWS::S3::Bucket\n    Properties:\n      BucketNam: oops\n"


class TestSessionStore:
    def test_submit_resolves_waiter(self):
        store = SessionStore()
        session = store.create("t1", "Syntax", 6, ["msg"], [], "tmpl", "ref")
        result = {}

        def waiter():
            result["text"] = store.wait_for_feedback(session)

        thread = threading.Thread(target=waiter)
        thread.start()
        assert store.list_pending() and store.list_pending()[0]["id"] == session.session_id
        store.submit_feedback(session.session_id, "use BucketName")
        thread.join(timeout=5)
        assert result["text"] == "use BucketName"
        assert store.list_pending() == []

    def test_double_submit_rejected(self):
        store = SessionStore()
        session = store.create("t1", "Syntax", 6, [], [], "", "")
        store.submit_feedback(session.session_id, "first")
        with pytest.raises(SessionAlreadyResolved):
            store.submit_feedback(session.session_id, "second")

    def test_unknown_session(self):
        with pytest.raises(UnknownSession):
            SessionStore().get("s-9999")


@pytest.fixture()
def server():
    srv = SessionServer(SessionStore(), RunRegistry()).start()
    yield srv
    srv.stop()


class TestSessionApi:
    def test_empty_pending_list(self, server):
        response = requests.get(f"{server.address}/sessions", timeout=5)
        assert response.status_code == 200
        assert response.json() == []
        assert response.headers["Content-Type"] == "application/json"

    def test_run_blocks_until_feedback_via_api(self, server):
        # 6 failing replies consume general+detailed; the 7th failure asks a human
        replies = [fenced(BAD_SYNTAX)] * 7 + [fenced(SNS_TEMPLATE_WITH_DEFAULT)]
        provider = ScriptedProvider(replies)
        task = TaskInput("t-blocked", "make a bucket", reference_text="the-reference-template")
        options = RunOptions(human_mode="serve", session_store=server.store, session_timeout=30)
        done = {}

        def runner():
            done["record"] = run_task(task, provider, new_environment, None, options)

        thread = threading.Thread(target=runner)
        thread.start()

        # poll until the blocked session appears
        for _ in range(200):
            pending = requests.get(f"{server.address}/sessions", timeout=5).json()
            if pending:
                break
            time.sleep(0.02)
        assert pending and pending[0]["task_id"] == "t-blocked"
        assert pending[0]["failing_stage"] == "Syntax"

        session_id = pending[0]["id"]
        detail = requests.get(f"{server.address}/sessions/{session_id}", timeout=5).json()
        assert detail["reference_template"] == "the-reference-template"
        assert detail["current_template"].startswith("Resources:")
        assert detail["conversation"][0]["role"] == "system"
        assert any("BucketNam" in v for v in detail["violations"])

        response = requests.post(
            f"{server.address}/sessions/{session_id}/feedback",
            json={"text": "Rename BucketNam to BucketName"},
            timeout=5,
        )
        assert response.status_code == 200
        thread.join(timeout=10)
        record = done["record"]
        assert record.iterations[6].feedback_tier_used == "Human"
        assert record.iterations[6].feedback_text == "Rename BucketNam to BucketName"
        assert record.final_status == "Deployed"

        # the session left the pending list and re-submitting conflicts
        assert requests.get(f"{server.address}/sessions", timeout=5).json() == []
        again = requests.post(
            f"{server.address}/sessions/{session_id}/feedback", json={"text": "more"}, timeout=5
        )
        assert again.status_code == 409

    def test_unknown_session_404(self, server):
        assert requests.get(f"{server.address}/sessions/s-0404", timeout=5).status_code == 404
        response = requests.post(
            f"{server.address}/sessions/s-0404/feedback", json={"text": "x"}, timeout=5
        )
        assert response.status_code == 404

    def test_runs_endpoints(self, server):
        provider = ScriptedProvider([fenced(SNS_TEMPLATE_WITH_DEFAULT)])
        record = run_task(TaskInput("t-ok", "prompt"), provider, new_environment, None, RunOptions())
        server.runs.put(record)
        summaries = requests.get(f"{server.address}/runs", timeout=5).json()
        assert summaries == [
            {"task_id": "t-ok", "final_status": "Deployed", "success_iteration": 1, "iterations": 1}
        ]
        full = requests.get(f"{server.address}/runs/t-ok", timeout=5).json()
        assert full["schema"] == 1
        assert full["iterations"][0]["stage_reached"] == "Deployed"
        assert requests.get(f"{server.address}/runs/ghost", timeout=5).status_code == 404
