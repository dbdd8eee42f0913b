"""Expert registry and the plug-in executor contract.

An expert is a (descriptor, executor) pair. The descriptor is what gets
rendered into the prompt prefix and what the action parser resolves
against; the executor is any callable turning a resolved request into a
raw structured output. Registration order is preserved and meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

from ..errors import (
    DuplicateNameError,
    ExpertFailureError,
    MissingPathError,
    UnknownExpertError,
)


class InputSpec(str, Enum):
    IMAGE_PATH = "image_path"
    VIDEO_PATH = "video_path"
    TEXT = "text"
    PATH_PLUS_TEXT = "path_plus_text"


class OutputKind(str, Enum):
    PLAIN_TEXT = "plain_text"
    TAGS = "tags"
    DETECTIONS = "detections"
    OCR_LINES = "ocr_lines"
    RECEIPT_FIELDS = "receipt_fields"
    KEY_VALUES = "key_values"
    FRAME_CAPTIONS = "frame_captions"


PATH_INPUT_SPECS = frozenset({InputSpec.IMAGE_PATH, InputSpec.VIDEO_PATH, InputSpec.PATH_PLUS_TEXT})


@dataclass(slots=True, frozen=True)
class Detection:
    label: str
    x1: int
    y1: int
    x2: int
    y2: int

    def __post_init__(self) -> None:
        if self.x1 < 0 or self.y1 < 0:
            raise ValueError("coordinates must be non-negative")
        if self.x1 >= self.x2 or self.y1 >= self.y2:
            raise ValueError("box must have x1 < x2 and y1 < y2")


@dataclass(slots=True, frozen=True)
class RawExpertOutput:
    """Kind-discriminated structured expert result, pre-textualization."""

    kind: OutputKind
    payload: Any

    def __post_init__(self) -> None:
        if self.kind is OutputKind.TAGS:
            for _, confidence in self.payload:
                if not 0.0 <= confidence <= 1.0:
                    raise ValueError(f"confidence out of [0, 1]: {confidence}")


@dataclass(slots=True, frozen=True)
class ExpertDescriptor:
    """Everything the prompt prefix and the resolver need to know about an expert."""

    name: str
    capability: str
    input_spec: InputSpec
    output_kind: OutputKind
    trigger_phrases: tuple[str, ...] = ()
    examples: tuple[tuple[str, str], ...] = ()  # (user utterance, action line)

    def __post_init__(self) -> None:
        for phrase in self.trigger_phrases:
            if phrase != phrase.lower():
                raise ValueError(f"trigger phrases must be lowercase: {phrase!r}")


@dataclass(slots=True, frozen=True)
class ResolvedRequest:
    """An action request whose expert has been resolved against a registry."""

    expert_name: str
    path: str | None = None
    query: str | None = None


Executor = Callable[[ResolvedRequest], RawExpertOutput]


@dataclass(slots=True)
class ExpertRegistry:
    """Ordered name -> (descriptor, executor) map; insertion order is iteration order."""

    _entries: dict[str, tuple[ExpertDescriptor, Executor]] = field(default_factory=dict)

    def register(self, descriptor: ExpertDescriptor, executor: Executor) -> None:
        if descriptor.name in self._entries:
            raise DuplicateNameError(f"expert already registered: {descriptor.name}")
        self._entries[descriptor.name] = (descriptor, executor)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def names(self) -> list[str]:
        return list(self._entries)

    def descriptors(self) -> list[ExpertDescriptor]:
        return [d for d, _ in self._entries.values()]

    def descriptor(self, name: str) -> ExpertDescriptor:
        try:
            return self._entries[name][0]
        except KeyError:
            raise UnknownExpertError(f"no such expert: {name}") from None

    def executor(self, name: str) -> Executor:
        try:
            return self._entries[name][1]
        except KeyError:
            raise UnknownExpertError(f"no such expert: {name}") from None

    def execute(self, resolved: ResolvedRequest) -> RawExpertOutput:
        """Run one resolved request. Tool exceptions surface as ExpertFailureError."""
        descriptor = self.descriptor(resolved.expert_name)
        if descriptor.input_spec in PATH_INPUT_SPECS and not resolved.path:
            raise MissingPathError(f"expert {resolved.expert_name} requires a media path")
        executor = self.executor(resolved.expert_name)
        try:
            return executor(resolved)
        except (MissingPathError, ExpertFailureError):
            raise
        except Exception as exc:
            raise ExpertFailureError(f"{resolved.expert_name} failed: {exc}") from exc
