"""Local HTTP API for human-feedback sessions and run inspection.

Endpoints (all JSON):
  GET  /sessions                  pending sessions awaiting feedback
  GET  /sessions/{id}             full session view
  POST /sessions/{id}/feedback    {"text": ...} resolves the session
  GET  /runs                      run summaries
  GET  /runs/{id}                 full run record

A static directory (the review console build) can be mounted at /; the
API itself has no other write surface, so the console stays read-only
apart from feedback submission.
"""

from __future__ import annotations

import json
import threading
from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from ..errors import SessionAlreadyResolved, UnknownSession
from .runner import RunRecord
from .sessions import SessionStore


class RunRegistry:
    """Thread-safe store of completed and in-flight run records."""

    def __init__(self):
        self._runs: dict[str, dict] = {}
        self._lock = threading.Lock()

    def put(self, record: RunRecord) -> None:
        with self._lock:
            self._runs[record.task_id] = record.to_dict()

    def summaries(self) -> list[dict]:
        with self._lock:
            return [
                {
                    "task_id": run["task_id"],
                    "final_status": run["final_status"],
                    "success_iteration": run["success_iteration"],
                    "iterations": len(run["iterations"]),
                }
                for run in self._runs.values()
            ]

    def get(self, task_id: str) -> dict | None:
        with self._lock:
            return self._runs.get(task_id)


class _Handler(SimpleHTTPRequestHandler):
    # set per-server via partial class attributes
    store: SessionStore
    runs: RunRegistry
    static_dir: str | None = None

    def log_message(self, *args):  # keep test output quiet
        pass

    def _send_json(self, payload, status: int = 200) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def do_GET(self):
        parts = [p for p in self.path.split("?")[0].split("/") if p]
        if parts[:1] == ["sessions"]:
            if len(parts) == 1:
                return self._send_json(self.store.list_pending())
            try:
                return self._send_json(self.store.get(parts[1]).detail())
            except UnknownSession as exc:
                return self._send_json({"error": str(exc)}, status=404)
        if parts[:1] == ["runs"]:
            if len(parts) == 1:
                return self._send_json(self.runs.summaries())
            run = self.runs.get(parts[1])
            if run is None:
                return self._send_json({"error": f"no run for task '{parts[1]}'"}, status=404)
            return self._send_json(run)
        if self.static_dir is not None:
            return super().do_GET()
        return self._send_json({"error": "not found"}, status=404)

    def do_POST(self):
        parts = [p for p in self.path.split("?")[0].split("/") if p]
        if len(parts) == 3 and parts[0] == "sessions" and parts[2] == "feedback":
            length = int(self.headers.get("Content-Length", 0))
            try:
                payload = json.loads(self.rfile.read(length) or b"{}")
            except json.JSONDecodeError:
                return self._send_json({"error": "body must be JSON"}, status=400)
            text = payload.get("text")
            if not text:
                return self._send_json({"error": "text must be non-empty"}, status=400)
            try:
                self.store.submit_feedback(parts[1], str(text))
            except UnknownSession as exc:
                return self._send_json({"error": str(exc)}, status=404)
            except SessionAlreadyResolved as exc:
                return self._send_json({"error": str(exc)}, status=409)
            return self._send_json({"ok": True, "id": parts[1]})
        return self._send_json({"error": "not found"}, status=404)


class SessionServer:
    """ThreadingHTTPServer wrapper owning a session store and run registry."""

    def __init__(
        self,
        store: SessionStore | None = None,
        runs: RunRegistry | None = None,
        host: str = "127.0.0.1",
        port: int = 0,
        static_dir: str | Path | None = None,
    ):
        self.store = store or SessionStore()
        self.runs = runs or RunRegistry()
        static = str(static_dir) if static_dir else None

        handler = type(
            "BoundHandler",
            (_Handler,),
            {"store": self.store, "runs": self.runs, "static_dir": static},
        )
        if static:
            self._server = ThreadingHTTPServer((host, port), lambda *a, **kw: handler(*a, directory=static, **kw))
        else:
            self._server = ThreadingHTTPServer((host, port), handler)
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "SessionServer":
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread:
            self._thread.join(timeout=5)
