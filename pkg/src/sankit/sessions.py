"""Annotation-session persistence: append-only JSON-lines event log per
session, replayed on load.  Human-auditable, no database dependency.

Each session serializes concurrent writers through a per-session lock;
the event log is the serialization point, so the final state always equals
some sequential order of the requests.
"""

from __future__ import annotations

import json
import secrets
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import SessionFinalized, SessionNotFound

OPEN = "OPEN"
FINALIZED = "FINALIZED"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class AnnotationSession:
    id: str
    input_text: str
    script: str
    predictions: dict
    corrections: list = field(default_factory=list)
    status: str = OPEN
    created_at: str = ""
    updated_at: str = ""

    def to_dict(self) -> dict:
        return {
            "id": self.id, "input_text": self.input_text, "script": self.script,
            "predictions": self.predictions, "corrections": self.corrections,
            "status": self.status, "created_at": self.created_at,
            "updated_at": self.updated_at,
        }


class SessionStore:
    def __init__(self, data_dir):
        self.root = Path(data_dir) / "sessions"
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def _path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.jsonl"

    def _append(self, session_id: str, event: dict) -> None:
        with open(self._path(session_id), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")

    def _replay(self, session_id: str) -> AnnotationSession:
        path = self._path(session_id)
        if not path.exists():
            raise SessionNotFound(session_id)
        session: AnnotationSession | None = None
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                event = json.loads(line)
                kind = event["event"]
                if kind == "created":
                    s = event["session"]
                    session = AnnotationSession(
                        id=s["id"], input_text=s["input_text"], script=s["script"],
                        predictions=s["predictions"], corrections=[],
                        status=OPEN, created_at=event["at"], updated_at=event["at"])
                elif kind == "correction":
                    session.corrections.append({
                        "task": event["task"], "payload": event["payload"],
                        "note": event.get("note", ""), "at": event["at"]})
                    session.updated_at = event["at"]
                elif kind == "finalized":
                    session.status = FINALIZED
                    session.updated_at = event["at"]
        if session is None:
            raise SessionNotFound(session_id)
        return session

    # ------------------------------------------------------------- public

    def create(self, input_text: str, script: str, predictions: dict) -> AnnotationSession:
        session_id = secrets.token_urlsafe(16)  # 128 bits, URL-safe
        at = _now()
        session = AnnotationSession(session_id, input_text, script, predictions,
                                    [], OPEN, at, at)
        with self._lock_for(session_id):
            self._append(session_id, {"event": "created", "at": at,
                                      "session": session.to_dict()})
        return session

    def get(self, session_id: str) -> AnnotationSession:
        with self._lock_for(session_id):
            return self._replay(session_id)

    def add_correction(self, session_id: str, task: str, payload: dict,
                       note: str = "") -> AnnotationSession:
        with self._lock_for(session_id):
            session = self._replay(session_id)
            if session.status == FINALIZED:
                raise SessionFinalized(session_id)
            at = _now()
            self._append(session_id, {"event": "correction", "at": at,
                                      "task": task, "payload": payload, "note": note})
            session.corrections.append({"task": task, "payload": payload,
                                        "note": note, "at": at})
            session.updated_at = at
            return session

    def finalize(self, session_id: str) -> AnnotationSession:
        with self._lock_for(session_id):
            session = self._replay(session_id)
            if session.status == FINALIZED:
                raise SessionFinalized(session_id)
            at = _now()
            self._append(session_id, {"event": "finalized", "at": at})
            session.status = FINALIZED
            session.updated_at = at
            return session

    def ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.jsonl"))
