"""Parse LLM output into a final user response or a batch of expert requests.

The protocol: a watchword (default "Assistant,") at a line start or
sentence boundary marks one action request. Text before the first
watchword is the model's thought. Output without any watchword is a final
response and passes through byte-identical.

Each request clause is split around its file-path token: text before the
path names (or implies) the expert, text after it is the free-text query.
A clause with no path token keeps its first word as the expert name and
falls back to the session's sticky path at resolution time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

from .errors import MalformedActionError, UnknownExpertError
from .experts.registry import ExpertRegistry, ResolvedRequest

DEFAULT_WATCHWORD = "Assistant,"

_ANGLE_PATH_RE = re.compile(r"<([^<>\n]+)>")
_SENTENCE_END = ".!?:"


@dataclass(slots=True, frozen=True)
class ActionRequest:
    expert_name: str
    path: str | None = None
    query: str | None = None
    raw_span: tuple[int, int] = (0, 0)

    def __post_init__(self) -> None:
        if not self.expert_name:
            raise ValueError("expert_name must be non-empty")


@dataclass(slots=True, frozen=True)
class FinalResponse:
    text: str


@dataclass(slots=True, frozen=True)
class Actions:
    requests: tuple[ActionRequest, ...]
    thought: str | None = None

    def __post_init__(self) -> None:
        if not self.requests:
            raise ValueError("Actions requires at least one request")


Decision = FinalResponse | Actions


def _watchword_occurrences(text: str, watchword: str) -> list[int]:
    """Offsets of watchword occurrences anchored at line starts or sentence
    boundaries, so quoted occurrences inside running prose do not fire."""
    offsets = []
    for match in re.finditer(re.escape(watchword), text):
        start = match.start()
        i = start - 1
        while i >= 0 and text[i] in " \t":
            i -= 1
        if i < 0 or text[i] == "\n" or text[i] in _SENTENCE_END:
            offsets.append(start)
    return offsets


def _first_path(clause: str, known_paths: Iterable[str]) -> tuple[str, int, int] | None:
    """Earliest path token in the clause: angle-bracketed, or a verbatim
    occurrence of a known registered path."""
    candidates: list[tuple[int, int, str]] = []
    match = _ANGLE_PATH_RE.search(clause)
    if match:
        candidates.append((match.start(), match.end(), match.group(1).strip()))
    for path in known_paths:
        at = clause.find(path)
        if at != -1:
            candidates.append((at, at + len(path), path))
    if not candidates:
        return None
    start, end, path = min(candidates)
    return path, start, end


def _parse_clause(clause: str, span: tuple[int, int], known_paths: Iterable[str]) -> ActionRequest | None:
    found = _first_path(clause, known_paths)
    if found is not None:
        path, start, end = found
        before = clause[:start].strip().rstrip(",").strip()
        after = clause[end:].strip()
        if not before and not after:
            return None
        return ActionRequest(
            expert_name=before or after,
            path=path,
            query=(after or None) if before else None,
            raw_span=span,
        )
    words = clause.split(None, 1)
    if not words:
        return None
    name = words[0].rstrip(",:.!?")
    if not name:
        return None
    query = words[1].strip() if len(words) > 1 else None
    return ActionRequest(expert_name=name, path=None, query=query or None, raw_span=span)


def parse_llm_output(
    text: str,
    watchword: str = DEFAULT_WATCHWORD,
    known_paths: Iterable[str] = (),
) -> Decision:
    """Split LLM output into a Decision. Identity on watchword-free text."""
    if not watchword:
        raise ValueError("watchword must be non-empty")
    offsets = _watchword_occurrences(text, watchword)
    if not offsets:
        return FinalResponse(text)

    thought = text[: offsets[0]].strip() or None
    requests = []
    bounds = offsets + [len(text)]
    for start, end in zip(bounds, bounds[1:]):
        clause = text[start + len(watchword):end].strip()
        request = _parse_clause(clause, (start, end), known_paths)
        if request is not None:
            requests.append(request)
    if not requests:
        raise MalformedActionError(
            f"watchword {watchword!r} present but no expert clause or path token could be parsed"
        )
    return Actions(requests=tuple(requests), thought=thought)


def render_request(request: ActionRequest, watchword: str = DEFAULT_WATCHWORD) -> str:
    """Canonical textual form; parse_llm_output inverts it (modulo raw_span)."""
    parts = [watchword, request.expert_name]
    if request.path is not None:
        parts.append(f"<{request.path}>")
    if request.query is not None:
        parts.append(request.query)
    return " ".join(parts)


def _normalize(clause: str) -> str:
    return re.sub(r"\s+", " ", clause).strip().strip(",.:!?").lower()


def resolve_expert(
    request: ActionRequest,
    registry: ExpertRegistry,
    sticky_path: str | None = None,
) -> ResolvedRequest:
    """Match a request's clause to a registered expert.

    Exact (case-insensitive) name match wins over trigger phrases; among
    trigger-phrase matches the earliest-registered expert wins. A request
    without a path inherits the sticky path.
    """
    clause = _normalize(request.expert_name)
    full_clause = _normalize(f"{request.expert_name} {request.query or ''}")
    path = request.path if request.path is not None else sticky_path

    for name in registry.names():
        if clause == name.lower() or clause.split(" ", 1)[0] == name.lower():
            return ResolvedRequest(expert_name=name, path=path, query=request.query)
    for descriptor in registry.descriptors():
        if any(phrase in full_clause for phrase in descriptor.trigger_phrases):
            return ResolvedRequest(expert_name=descriptor.name, path=path, query=full_clause)
    raise UnknownExpertError(f"no expert matches clause: {request.expert_name!r}")


def extract_paths(text: str, known_paths: Iterable[str] = ()) -> list[str]:
    """All path tokens in order of first occurrence, deduplicated."""
    hits: list[tuple[int, str]] = []
    for match in _ANGLE_PATH_RE.finditer(text):
        hits.append((match.start(), match.group(1).strip()))
    for path in known_paths:
        at = text.find(path)
        if at != -1:
            hits.append((at, path))
    seen: set[str] = set()
    ordered = []
    for _, path in sorted(hits):
        if path not in seen:
            seen.add(path)
            ordered.append(path)
    return ordered
