"""Domain types and dialogue-session state shared by every other module.

Media is never opened or decoded here: a registered path is an opaque
placeholder string that experts interpret later.
"""

from __future__ import annotations

import copy
import time
from dataclasses import dataclass, field
from enum import Enum
from uuid import uuid4

from .errors import DanglingMediaError, DuplicatePathError, InvalidConfigError


class MediaKind(str, Enum):
    IMAGE = "image"
    VIDEO = "video"


class Role(str, Enum):
    USER = "user"
    ASSISTANT_FINAL = "assistant_final"
    THOUGHT = "thought"
    ACTION_REQUEST = "action_request"
    OBSERVATION = "observation"
    SYSTEM = "system"


# Roles shown to the end user; everything else is internal reasoning machinery.
VISIBLE_ROLES = frozenset({Role.USER, Role.ASSISTANT_FINAL})

# Roles that carry a per-turn execution step index.
STEPPED_ROLES = frozenset({Role.THOUGHT, Role.ACTION_REQUEST, Role.OBSERVATION})


@dataclass(slots=True, frozen=True)
class MediaHandle:
    """A registered non-text input, identified only by its path string."""

    id: str
    kind: MediaKind
    path: str
    display_name: str

    @staticmethod
    def default_display_name(path: str) -> str:
        return path.rstrip("/").rsplit("/", 1)[-1] or path


@dataclass(slots=True)
class Message:
    """One dialogue entry. `step` is set exactly for internal roles."""

    role: Role
    text: str
    media: list[str] = field(default_factory=list)
    step: int | None = None
    timestamp: int = field(default_factory=time.monotonic_ns)

    def validate(self) -> None:
        if not self.text and not (self.role is Role.USER and self.media):
            raise ValueError("message text may be empty only for pure-upload user messages")
        if (self.step is not None) != (self.role in STEPPED_ROLES):
            raise ValueError(f"step must be present exactly for {sorted(r.value for r in STEPPED_ROLES)}")

    @property
    def visible(self) -> bool:
        return self.role in VISIBLE_ROLES


@dataclass(slots=True, frozen=True)
class SessionConfig:
    max_steps: int = 10
    budget: int = 4096
    reserved_for_completion: int = 512
    watchword: str = "Assistant,"

    def validate(self) -> None:
        if self.max_steps < 1:
            raise InvalidConfigError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.budget < 256:
            raise InvalidConfigError(f"budget must be >= 256, got {self.budget}")
        if self.reserved_for_completion >= self.budget:
            raise InvalidConfigError("reserved_for_completion must be smaller than budget")


@dataclass(slots=True)
class SessionState:
    """Append-only message log plus the media registry for one dialogue."""

    session_id: str
    config: SessionConfig
    messages: list[Message] = field(default_factory=list)
    media: dict[str, MediaHandle] = field(default_factory=dict)
    turn_counter: int = 0

    def register_media(self, path: str, kind: MediaKind) -> MediaHandle:
        """Record a placeholder path verbatim. The file is never inspected."""
        if not path:
            raise ValueError("media path must be non-empty")
        if any(h.path == path for h in self.media.values()):
            raise DuplicatePathError(f"path already registered in this session: {path}")
        handle = MediaHandle(
            id=uuid4().hex,
            kind=MediaKind(kind),
            path=path,
            display_name=MediaHandle.default_display_name(path),
        )
        self.media[handle.id] = handle
        return handle

    def append(self, message: Message) -> None:
        message.validate()
        for media_id in message.media:
            if media_id not in self.media:
                raise DanglingMediaError(f"unknown media id: {media_id}")
        self.messages.append(message)

    def visible_transcript(self) -> list[Message]:
        return [m for m in self.messages if m.visible]

    def handle_for_path(self, path: str) -> MediaHandle | None:
        for handle in self.media.values():
            if handle.path == path:
                return handle
        return None

    def last_referenced_media(self) -> MediaHandle | None:
        """Most recently referenced handle, for sticky-path resolution."""
        for message in reversed(self.messages):
            if message.media:
                return self.media[message.media[-1]]
        return None

    def clone(self) -> SessionState:
        return copy.deepcopy(self)


def new_session(config: SessionConfig | None = None) -> SessionState:
    config = config or SessionConfig()
    config.validate()
    return SessionState(session_id=uuid4().hex, config=config)
