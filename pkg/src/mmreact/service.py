"""HTTP API hosting sessions, media uploads, turn execution and live trace
streaming.

Persistence is an append-only JSONL log per session: replaying the log
reconstructs the session's media, messages and traces exactly, so a
restarted service reproduces every visible transcript byte for byte.
Uploads are content-addressed (sha256 of the bytes, original extension
kept), so identical bytes always land on the same stored path.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, File, Form, HTTPException, UploadFile
from fastapi.responses import PlainTextResponse, StreamingResponse

from .config import EngineConfig
from .core import MediaHandle, MediaKind, Message, Role, SessionConfig, SessionState, new_session
from .errors import BackendError, InvalidConfigError, MMReactError
from .orchestrate import TraceEvent, TurnResult, export_trace, run_turn
from .prompting import PromptPrefix, build_prefix


@dataclass(slots=True)
class SessionRecord:
    state: SessionState
    created_at: float
    config: SessionConfig
    turn_events: list[TraceEvent] = field(default_factory=list)
    last_result: TurnResult | None = None
    busy: bool = False
    lock: threading.Lock = field(default_factory=threading.Lock)
    changed: threading.Condition = field(default_factory=threading.Condition)


class SessionStore:
    """In-memory sessions backed by per-session append-only logs."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.sessions_dir = self.data_dir / "sessions"
        self.media_dir = self.data_dir / "media"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.media_dir.mkdir(parents=True, exist_ok=True)
        self._records: dict[str, SessionRecord] = {}
        self._lock = threading.Lock()
        for log in sorted(self.sessions_dir.glob("*.jsonl")):
            record = self._replay(log)
            self._records[record.state.session_id] = record

    def _log_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.jsonl"

    def append_log(self, session_id: str, record: dict) -> None:
        with self._log_path(session_id).open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, sort_keys=True) + "\n")

    def _replay(self, log: Path) -> SessionRecord:
        state: SessionState | None = None
        record: SessionRecord | None = None
        for line in log.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            entry = json.loads(line)
            kind = entry["type"]
            if kind == "created":
                config = SessionConfig(**entry["config"])
                state = SessionState(session_id=entry["session_id"], config=config)
                record = SessionRecord(state=state, created_at=entry["created_at"], config=config)
            elif kind == "media":
                assert state is not None
                handle = MediaHandle(
                    id=entry["id"],
                    kind=MediaKind(entry["kind"]),
                    path=entry["path"],
                    display_name=entry["display_name"],
                )
                state.media[handle.id] = handle
            elif kind == "message":
                assert state is not None
                state.messages.append(
                    Message(
                        role=Role(entry["role"]),
                        text=entry["text"],
                        media=entry["media"],
                        step=entry["step"],
                    )
                )
            elif kind == "turn":
                assert state is not None and record is not None
                state.turn_counter = entry["turn_counter"]
                events = tuple(
                    TraceEvent(step=e["step"], kind=e["kind"], detail=e["detail"]) for e in entry["events"]
                )
                record.turn_events = list(events)
                record.last_result = TurnResult(
                    final_text=entry["final_text"], trace=events, steps_used=entry["steps_used"]
                )
        assert record is not None, f"empty session log: {log}"
        return record

    def create(self, config: SessionConfig) -> SessionRecord:
        state = new_session(config)
        record = SessionRecord(state=state, created_at=time.time(), config=config)
        with self._lock:
            self._records[state.session_id] = record
        self.append_log(
            state.session_id,
            {
                "type": "created",
                "session_id": state.session_id,
                "created_at": record.created_at,
                "config": {
                    "max_steps": config.max_steps,
                    "budget": config.budget,
                    "reserved_for_completion": config.reserved_for_completion,
                    "watchword": config.watchword,
                },
            },
        )
        return record

    def get(self, session_id: str) -> SessionRecord | None:
        with self._lock:
            return self._records.get(session_id)

    def store_media(self, filename: str, content: bytes) -> str:
        """Content-addressed media path: same bytes, same path."""
        digest = hashlib.sha256(content).hexdigest()
        suffix = Path(filename or "").suffix
        target = self.media_dir / f"{digest}{suffix}"
        if not target.exists():
            target.write_bytes(content)
        return str(target.resolve())

    def commit_turn(self, record: SessionRecord, new_state: SessionState, result: TurnResult) -> None:
        """Persist the state delta a turn produced, then swap in the new state."""
        old = record.state
        session_id = old.session_id
        for media_id, handle in new_state.media.items():
            if media_id not in old.media:
                self.append_log(
                    session_id,
                    {
                        "type": "media",
                        "id": handle.id,
                        "kind": handle.kind.value,
                        "path": handle.path,
                        "display_name": handle.display_name,
                    },
                )
        for message in new_state.messages[len(old.messages):]:
            self.append_log(
                session_id,
                {
                    "type": "message",
                    "role": message.role.value,
                    "text": message.text,
                    "media": list(message.media),
                    "step": message.step,
                },
            )
        self.append_log(
            session_id,
            {
                "type": "turn",
                "turn_counter": new_state.turn_counter,
                "final_text": result.final_text,
                "steps_used": result.steps_used,
                "events": [{"step": e.step, "kind": e.kind, "detail": e.detail} for e in result.trace],
            },
        )
        record.state = new_state
        record.last_result = result


def _message_payload(message: Message) -> dict:
    return {
        "role": message.role.value,
        "text": message.text,
        "media": list(message.media),
        "step": message.step,
    }


def create_app(engine_config: EngineConfig | None = None) -> FastAPI:
    engine_config = engine_config or EngineConfig()
    store = SessionStore(engine_config.data_dir)
    registry = engine_config.build_registry()
    backend = engine_config.build_backend()
    prefix: PromptPrefix = build_prefix(registry)

    app = FastAPI(title="mmreact")
    app.state.store = store

    def _require(session_id: str) -> SessionRecord:
        record = store.get(session_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"unknown session: {session_id}")
        return record

    @app.post("/v1/sessions")
    def create_session(overrides: dict | None = None):
        base = engine_config.session_config()
        overrides = overrides or {}
        try:
            config = SessionConfig(
                max_steps=int(overrides.get("max_steps", base.max_steps)),
                budget=int(overrides.get("budget", base.budget)),
                reserved_for_completion=int(
                    overrides.get("reserved_for_completion", base.reserved_for_completion)
                ),
                watchword=str(overrides.get("watchword", base.watchword)),
            )
            config.validate()
        except (InvalidConfigError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        record = store.create(config)
        return {"session_id": record.state.session_id}

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        record = _require(session_id)
        state = record.state
        return {
            "session_id": state.session_id,
            "turn_counter": state.turn_counter,
            "busy": record.busy,
            "media": [
                {"id": h.id, "kind": h.kind.value, "path": h.path, "display_name": h.display_name}
                for h in state.media.values()
            ],
            "transcript": [_message_payload(m) for m in state.visible_transcript()],
        }

    @app.post("/v1/sessions/{session_id}/messages")
    def post_message(
        session_id: str,
        text: str = Form(""),
        attachments: list[UploadFile] = File(default=[]),
    ):
        record = _require(session_id)
        with record.lock:
            if record.busy:
                raise HTTPException(status_code=409, detail="a turn is already in flight")
            record.busy = True
        try:
            try:
                paths = [
                    store.store_media(upload.filename or "upload", upload.file.read())
                    for upload in attachments
                ]
            except OSError as exc:
                raise HTTPException(status_code=500, detail=f"storage failure: {exc}")
            # Re-uploading identical bytes maps to an already-registered path;
            # reference it instead of re-registering.
            known = {h.path for h in record.state.media.values()}
            new_paths = [p for p in paths if p not in known]

            with record.changed:
                record.turn_events = []
                record.changed.notify_all()

            def on_event(event: TraceEvent) -> None:
                with record.changed:
                    record.turn_events.append(event)
                    record.changed.notify_all()

            try:
                new_state, result = run_turn(
                    record.state,
                    text,
                    new_paths,
                    registry=registry,
                    backend=backend,
                    prefix=prefix,
                    on_event=on_event,
                )
            except BackendError as exc:
                raise HTTPException(status_code=502, detail=f"backend error: {exc}")
            except MMReactError as exc:
                raise HTTPException(status_code=500, detail=str(exc))
            store.commit_turn(record, new_state, result)
            return {
                "final_text": result.final_text,
                "steps_used": result.steps_used,
                "media_ids": [mid for mid, h in new_state.media.items() if h.path in paths],
            }
        finally:
            with record.lock:
                record.busy = False
            with record.changed:
                record.changed.notify_all()

    @app.get("/v1/sessions/{session_id}/events")
    def stream_events(session_id: str):
        record = _require(session_id)

        def generate():
            sent = 0
            with record.changed:
                idle = not record.busy and not record.turn_events
            if idle:
                yield ": heartbeat\n\n"
                return
            while True:
                with record.changed:
                    while sent >= len(record.turn_events) and record.busy:
                        record.changed.wait(timeout=0.1)
                    pending = record.turn_events[sent:]
                    active = record.busy
                for event in pending:
                    sent += 1
                    payload = json.dumps({"step": event.step, "kind": event.kind, "detail": event.detail})
                    yield f"event: {event.kind}\ndata: {payload}\n\n"
                    if event.kind == "final_response":
                        return
                if not active and not pending:
                    return

        return StreamingResponse(generate(), media_type="text/event-stream")

    @app.get("/v1/sessions/{session_id}/trace", response_class=PlainTextResponse)
    def get_trace(session_id: str):
        record = _require(session_id)
        if record.last_result is None:
            return ""
        return export_trace(record.last_result)

    return app
