"""HTTP/JSON annotation service over the analysis pipeline.

Endpoints: analyze, session fetch/correct/finalize/export, chatbot,
leaderboard, health.  Sessions persist as JSON-lines event logs; models
are immutable shared-read; per-session locks serialize corrections.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from . import errors
from .chatbot import ChatRuleTable, chat_respond
from .config import Config
from .pipeline import Toolkit
from .sessions import SessionStore
from .text import Script

_ERROR_STATUS = {
    errors.InvalidRequest: 400,
    errors.InvalidCharacter: 400,
    errors.InvalidCorrection: 400,
    errors.FormatUnsupported: 400,
    errors.SessionNotFound: 404,
    errors.SessionFinalized: 409,
    errors.ModelMissing: 409,
    errors.EmptyInput: 400,
}


def _error_response(exc: errors.SankitError) -> JSONResponse:
    status = 500
    for klass, code in _ERROR_STATUS.items():
        if isinstance(exc, klass):
            status = code
            break
    payload = {"error": type(exc).__name__, "detail": str(exc)}
    if isinstance(exc, errors.ModelMissing):
        payload["task"] = exc.task
    if isinstance(exc, errors.InvalidCorrection):
        payload["reason"] = exc.reason
    return JSONResponse(payload, status_code=status)


def create_app(toolkit: Toolkit, store: SessionStore, chat_rules: ChatRuleTable,
               leaderboard_path: str, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="sankit annotation service")

    @app.exception_handler(errors.SankitError)
    async def sankit_error_handler(request: Request, exc: errors.SankitError):
        return _error_response(exc)

    @app.post("/api/analyze")
    def analyze(body: dict):
        text = body.get("text", "")
        script = Script.parse(body.get("script", "SLP1"))
        tasks = body.get("tasks", [])
        predictions = toolkit.analyze(text, script, tasks)
        session = store.create(text, script.value, predictions)
        return {"session_id": session.id, "predictions": predictions}

    @app.get("/api/session/{session_id}")
    def get_session(session_id: str):
        return store.get(session_id).to_dict()

    @app.post("/api/session/{session_id}/correction")
    def add_correction(session_id: str, body: dict):
        task = body.get("task", "")
        payload = body.get("payload", {})
        note = body.get("note", "")
        session = store.get(session_id)
        if session.status == "FINALIZED":
            raise errors.SessionFinalized(session_id)
        normalized = toolkit.validate_correction(session.predictions,
                                                 session.corrections, task, payload)
        updated = store.add_correction(session_id, task.upper(), normalized, note)
        return updated.to_dict()

    @app.post("/api/session/{session_id}/finalize")
    def finalize(session_id: str):
        return store.finalize(session_id).to_dict()

    @app.get("/api/session/{session_id}/export")
    def export(session_id: str, format: str = "json"):
        session = store.get(session_id)
        if format == "conllu":
            return PlainTextResponse(toolkit.export_conllu(session),
                                     media_type="text/plain; charset=utf-8")
        if format == "json":
            return toolkit.export_json(session)
        raise errors.FormatUnsupported(format)

    @app.post("/api/chat")
    def chat(body: dict):
        return chat_respond(chat_rules, body.get("message", ""))

    @app.get("/api/leaderboard")
    def leaderboard():
        with open(leaderboard_path, encoding="utf-8") as fh:
            return json.load(fh)

    @app.get("/api/health")
    def health():
        return {"status": "ok", "models": toolkit.loaded_models(),
                "sessions": len(store.ids())}

    if static_dir and Path(static_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def build_toolkit(cfg: Config) -> Toolkit:
    from .compound import load_compound_model
    from .lexicon import Lexicon
    from .parser import load_parser_model
    from .sandhi import RuleTable
    from .segmenter import load_seg_model
    from .tagger import load_tag_model

    lexicon = Lexicon.load(cfg.lexicon_path)
    rules = RuleTable.load(cfg.rules_path)
    loaders = {"SEGMENT": load_seg_model, "MORPH": load_tag_model,
               "PARSE": load_parser_model, "COMPOUND": load_compound_model}
    loaded = {}
    for task, loader in loaders.items():
        path = cfg.models.get(task)
        if path and Path(path).exists():
            loaded[task] = loader(path)
    return Toolkit(lexicon, rules,
                   seg_model=loaded.get("SEGMENT"),
                   tag_model=loaded.get("MORPH"),
                   parser_model=loaded.get("PARSE"),
                   compound_model=loaded.get("COMPOUND"))


def app_from_config(cfg: Config) -> FastAPI:
    from .chatbot import load_chat_rules

    toolkit = build_toolkit(cfg)
    store = SessionStore(cfg.ensure_data_dir())
    chat_rules = load_chat_rules(cfg.chat_rules_path)
    return create_app(toolkit, store, chat_rules, cfg.leaderboard_path, cfg.static_dir)
