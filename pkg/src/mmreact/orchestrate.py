"""The reason/act loop: alternate LLM calls and expert executions until a
final response, emitting a numbered execution trace.

The loop is bounded by max_steps LLM calls; hitting the bound produces a
templated forced-final response. Expert failures and unparseable actions
never abort a turn: they become recovery observations the model can route
around on its next call.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .actionparse import (
    ActionRequest,
    Actions,
    FinalResponse,
    parse_llm_output,
    render_request,
    resolve_expert,
)
from .core import MediaKind, Message, Role, SessionState
from .errors import (
    BackendError,
    ExpertFailureError,
    MalformedActionError,
    MissingPathError,
    MMReactError,
    UnknownExpertError,
)
from .experts.registry import ExpertRegistry, OutputKind, RawExpertOutput
from .llm import LLMBackend
from .prompting import PromptPrefix, TokenBudget, build_prefix, render_dialogue
from .serialize import Observation, standardize

VIDEO_EXTENSIONS = (".mp4", ".mov", ".avi", ".webm", ".mkv")

FORCED_FINAL_TEMPLATE = (
    "I reached my step limit of {max_steps} steps before finishing. "
    "Here is the best information I gathered so far:\n{summary}"
)
NO_INFORMATION = "no expert information was gathered."


@dataclass(slots=True, frozen=True)
class TraceEvent:
    step: int
    kind: str  # llm_call | expert_batch | final_response | recovery
    detail: dict


@dataclass(slots=True, frozen=True)
class TurnResult:
    final_text: str
    trace: tuple[TraceEvent, ...]
    steps_used: int

    def __post_init__(self) -> None:
        if not self.trace or self.trace[-1].kind != "final_response":
            raise ValueError("trace must end with a final_response event")


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def media_kind_for_path(path: str) -> MediaKind:
    lowered = path.lower()
    if any(lowered.endswith(ext) for ext in VIDEO_EXTENSIONS):
        return MediaKind.VIDEO
    return MediaKind.IMAGE


def execute_batch(
    session: SessionState,
    requests: Sequence[ActionRequest],
    registry: ExpertRegistry,
) -> list[Observation]:
    """Run requests sequentially, in parsed order. Failures become recovery
    observations in place; the batch never aborts."""
    sticky = session.last_referenced_media()
    sticky_path = sticky.path if sticky else None
    observations: list[Observation] = []
    for request in requests:
        started = time.monotonic_ns()
        try:
            resolved = resolve_expert(request, registry, sticky_path=sticky_path)
            raw = registry.execute(resolved)
            duration_ms = (time.monotonic_ns() - started) // 1_000_000
            observations.append(standardize(resolved.expert_name, raw, duration_ms=duration_ms))
            if resolved.path:
                sticky_path = resolved.path
        except (UnknownExpertError, MissingPathError, ExpertFailureError, MMReactError) as exc:
            duration_ms = (time.monotonic_ns() - started) // 1_000_000
            reason = f"Expert request '{request.expert_name}' failed: {exc}"
            observations.append(
                Observation(
                    expert_name=request.expert_name,
                    text=reason,
                    source_payload=RawExpertOutput(OutputKind.PLAIN_TEXT, reason),
                    duration_ms=duration_ms,
                    ok=False,
                )
            )
    return observations


def _compose_user_text(user_text: str, uploads: list) -> str:
    notices = [f"(uploaded {h.kind.value}: <{h.path}>)" for h in uploads]
    return "\n".join(([user_text] if user_text else []) + notices)


def _forced_final(session: SessionState, max_steps: int) -> str:
    gathered = [m.text for m in session.messages if m.role is Role.OBSERVATION]
    summary = "\n".join(gathered[-3:]) if gathered else NO_INFORMATION
    return FORCED_FINAL_TEMPLATE.format(max_steps=max_steps, summary=summary)


def run_turn(
    session: SessionState,
    user_text: str,
    media_paths: Sequence[str] = (),
    *,
    registry: ExpertRegistry,
    backend: LLMBackend,
    prefix: PromptPrefix | None = None,
    budget: TokenBudget | None = None,
    max_steps: int | None = None,
    on_event: Callable[[TraceEvent], None] | None = None,
) -> tuple[SessionState, TurnResult]:
    """Execute one full user turn and return the updated session plus its trace.

    The input session is never mutated: on success the returned session
    replaces it, on BackendError the caller's state is untouched.
    """
    config = session.config
    budget = budget or TokenBudget(limit=config.budget, reserved_for_completion=config.reserved_for_completion)
    max_steps = max_steps if max_steps is not None else config.max_steps
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    prefix = prefix or build_prefix(registry, watchword=config.watchword)

    work = session.clone()
    work.turn_counter += 1
    uploads = [work.register_media(path, media_kind_for_path(path)) for path in media_paths]
    work.append(
        Message(
            role=Role.USER,
            text=_compose_user_text(user_text, uploads),
            media=[h.id for h in uploads],
        )
    )

    trace: list[TraceEvent] = []

    def emit(kind: str, detail: dict) -> TraceEvent:
        event = TraceEvent(step=len(trace) + 1, kind=kind, detail=detail)
        trace.append(event)
        if on_event is not None:
            on_event(event)
        return event

    llm_calls = 0
    while llm_calls < max_steps:
        rendered = render_dialogue(work, prefix, budget)
        try:
            output = backend.complete(rendered)
        except BackendError:
            raise
        llm_calls += 1
        llm_event = emit(
            "llm_call",
            {"input_digest": _digest(rendered.text), "input_chars": len(rendered.text), "output": output},
        )

        known_paths = [h.path for h in work.media.values()]
        try:
            decision = parse_llm_output(output, watchword=config.watchword, known_paths=known_paths)
        except MalformedActionError as exc:
            reason = f"Could not parse the requested action: {exc}"
            event = emit("recovery", {"reason": reason})
            work.append(Message(role=Role.OBSERVATION, text=reason, step=event.step))
            continue

        if isinstance(decision, FinalResponse):
            work.append(Message(role=Role.ASSISTANT_FINAL, text=decision.text))
            emit("final_response", {"text": decision.text})
            return work, TurnResult(final_text=decision.text, trace=tuple(trace), steps_used=llm_calls)

        assert isinstance(decision, Actions)
        if decision.thought:
            work.append(Message(role=Role.THOUGHT, text=decision.thought, step=llm_event.step))
        for request in decision.requests:
            work.append(
                Message(
                    role=Role.ACTION_REQUEST,
                    text=render_request(request, watchword=config.watchword),
                    step=llm_event.step,
                )
            )

        observations = execute_batch(work, decision.requests, registry)
        executions = []
        batch_event_step = len(trace) + 1
        for request, observation in zip(decision.requests, observations):
            work.append(Message(role=Role.OBSERVATION, text=observation.text, step=batch_event_step))
            executions.append(
                {
                    "expert": observation.expert_name,
                    "request": render_request(request, watchword=config.watchword),
                    "observation_digest": _digest(observation.text),
                    "duration_ms": observation.duration_ms,
                    "ok": observation.ok,
                }
            )
        emit("expert_batch", {"executions": executions})

    final_text = _forced_final(work, max_steps)
    work.append(Message(role=Role.ASSISTANT_FINAL, text=final_text))
    emit("final_response", {"text": final_text, "forced": True})
    return work, TurnResult(final_text=final_text, trace=tuple(trace), steps_used=llm_calls)


def export_trace(turn_result: TurnResult) -> str:
    """Line-delimited JSON, one record per event; import_trace inverts it."""
    return "\n".join(
        json.dumps({"step": e.step, "kind": e.kind, "detail": e.detail}, sort_keys=True)
        for e in turn_result.trace
    )


def import_trace(document: str) -> tuple[TraceEvent, ...]:
    events = []
    for line in document.split("\n"):
        if not line.strip():
            continue
        record = json.loads(line)
        events.append(TraceEvent(step=record["step"], kind=record["kind"], detail=record["detail"]))
    return tuple(events)
