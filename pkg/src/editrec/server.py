"""HTTP service exposing editing sessions.

Thin layer over EditSession: request/response models, an in-memory session
registry, and a uniform error envelope.  Engine errors map to stable HTTP
statuses so clients can distinguish missing resources (404), stale state
(409), and unmet preconditions (412).
"""

from __future__ import annotations

import logging
import re
import uuid
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .backends import Backends
from .config import EngineConfig
from .errors import (EditRecError, NoCandidate, PreconditionFailed,
                     RevisionMismatch, StaleEdit, UnknownRegion,
                     UnknownSession)
from .model import Edit
from .session import EditSession

logger = logging.getLogger(__name__)

_STATUS_BY_ERROR = (
    (UnknownSession, 404),
    (UnknownRegion, 404),
    (RevisionMismatch, 409),
    (StaleEdit, 409),
    (NoCandidate, 409),
    (PreconditionFailed, 412),
)


def _error_code(exc: Exception) -> str:
    name = type(exc).__name__
    return re.sub(r"(?<!^)(?=[A-Z])", "_", name).lower()


def _status_of(exc: EditRecError) -> int:
    for klass, status in _STATUS_BY_ERROR:
        if isinstance(exc, klass):
            return status
    return 400


class CreateSessionRequest(BaseModel):
    session_id: str | None = None
    files: dict[str, list[str] | str] = Field(default_factory=dict)
    prompt: str = ""


class EditPayload(BaseModel):
    file_path: str
    anchor_line: int
    edit_type: str
    before_code: list[str] = Field(default_factory=list)
    after_code: list[str] = Field(default_factory=list)


class RecordEditRequest(BaseModel):
    revision: int
    edit: EditPayload


class FeedbackRequest(BaseModel):
    revision: int
    action: str
    content: list[str] | None = None


def create_app(config: EngineConfig | None = None,
               backends: Backends | None = None,
               log_dir: str | Path | None = None) -> FastAPI:
    """Build the service; sessions live in process memory."""
    app = FastAPI(title="editrec", version="0.1.0")
    app.state.config = config or EngineConfig()
    app.state.backends = backends or Backends.lexical()
    app.state.log_dir = Path(log_dir) if log_dir else None
    app.state.sessions = {}

    @app.exception_handler(EditRecError)
    async def engine_error(_request: Request, exc: EditRecError):
        status = _status_of(exc)
        payload = {"error": {"code": _error_code(exc), "message": str(exc)}}
        if isinstance(exc, RevisionMismatch):
            payload["error"]["expected"] = exc.expected
            payload["error"]["got"] = exc.got
        return JSONResponse(status_code=status, content=payload)

    @app.exception_handler(ValueError)
    async def value_error(_request: Request, exc: ValueError):
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "invalid_request", "message": str(exc)}},
        )

    def session_of(session_id: str) -> EditSession:
        session = app.state.sessions.get(session_id)
        if session is None:
            raise UnknownSession(session_id)
        return session

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "sessions": len(app.state.sessions)}

    @app.post("/sessions", status_code=201)
    async def create_session(req: CreateSessionRequest):
        session_id = req.session_id or uuid.uuid4().hex[:12]
        if session_id in app.state.sessions:
            raise ValueError(f"session {session_id!r} already exists")
        log_path = None
        if app.state.log_dir is not None:
            app.state.log_dir.mkdir(parents=True, exist_ok=True)
            log_path = app.state.log_dir / f"{session_id}.jsonl"
        session = EditSession.create(
            session_id=session_id,
            files=req.files,
            config=app.state.config,
            backends=app.state.backends,
            prompt=req.prompt,
            log_path=log_path,
        )
        app.state.sessions[session_id] = session
        return {
            "session_id": session_id,
            "revision": session.revision,
            "config_hash": app.state.config.config_hash(),
        }

    @app.post("/sessions/{session_id}/events")
    async def record_edit(session_id: str, req: RecordEditRequest):
        session = session_of(session_id)
        edit = Edit.from_dict(req.edit.model_dump())
        revision = session.record_edit(edit, req.revision)
        return {"session_id": session_id, "revision": revision}

    @app.get("/sessions/{session_id}/locations")
    async def locations(session_id: str):
        return session_of(session_id).recommend_locations()

    @app.post("/sessions/{session_id}/regions/{ref}/candidates")
    async def candidates(session_id: str, ref: str,
                         k: int = Query(default=3, ge=1, le=50)):
        return session_of(session_id).candidates_for(ref, k)

    @app.post("/sessions/{session_id}/regions/{ref}/feedback")
    async def feedback(session_id: str, ref: str, req: FeedbackRequest):
        session = session_of(session_id)
        result = session.apply_feedback(
            ref, req.action, req.revision,
            content=req.content,
        )
        return {"session_id": session_id, **result}

    return app


def serve(host: str = "127.0.0.1", port: int = 8940,
          config: EngineConfig | None = None,
          log_dir: str | Path | None = None):
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    uvicorn.run(create_app(config=config, log_dir=log_dir),
                host=host, port=port, log_level="info")
