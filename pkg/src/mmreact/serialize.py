"""Standardize raw expert outputs into observation text the LLM consumes.

Detection output follows the one-box-per-line `<label, x1, y1, x2, y2>`
layout with a single leading sentence explaining the coordinates; a
companion inverse parser recovers the box list exactly, which keeps the
format honest. Numbers are rendered without thousands separators.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import UnknownKindError
from .experts.registry import Detection, OutputKind, RawExpertOutput

# Emitted once per detection observation, not per box.
DETECTION_EXPLANATION = (
    "Each detected object is listed as <object name, x1, y1, x2, y2>, "
    "where (x1, y1) is the top-left corner and (x2, y2) is the bottom-right "
    "corner of its bounding box in pixels."
)

NO_OBJECTS = "no objects detected"
NO_TAGS = "no confident tags"
NO_FIELDS = "no fields extracted"
NO_TEXT = "no text found"

OBSERVATION_HEADER = "Observation from {expert}:"

# Receipt fields render in this order; unknown keys follow alphabetically.
RECEIPT_FIELD_ORDER = ("merchant", "date", "total", "line_items")

_BOX_LINE_RE = re.compile(r"^<(.*), (\d+), (\d+), (\d+), (\d+)>$")


@dataclass(slots=True, frozen=True)
class Observation:
    expert_name: str
    text: str
    source_payload: RawExpertOutput
    duration_ms: int = 0
    ok: bool = True  # False for recovery observations describing a failed request

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("observation text must be non-empty")
        if self.duration_ms < 0:
            raise ValueError("duration_ms must be non-negative")


def serialize_detections(payload: list[Detection]) -> str:
    lines = [DETECTION_EXPLANATION]
    if not payload:
        lines.append(NO_OBJECTS)
    else:
        lines.extend(f"<{d.label}, {d.x1}, {d.y1}, {d.x2}, {d.y2}>" for d in payload)
    return "\n".join(lines)


def parse_detections(text: str) -> list[Detection]:
    """Exact inverse of serialize_detections for labels free of ',' '<' '>'."""
    lines = text.split("\n")
    if not lines or lines[0] != DETECTION_EXPLANATION:
        raise ValueError("missing detection explanation line")
    if lines[1:] == [NO_OBJECTS]:
        return []
    boxes = []
    for line in lines[1:]:
        match = _BOX_LINE_RE.match(line)
        if match is None:
            raise ValueError(f"unparseable box line: {line!r}")
        label, x1, y1, x2, y2 = match.groups()
        boxes.append(Detection(label, int(x1), int(y1), int(x2), int(y2)))
    return boxes


def serialize_tags(payload: list[tuple[str, float]], threshold: float = 0.5) -> str:
    kept = sorted(
        ((tag, confidence) for tag, confidence in payload if confidence >= threshold),
        key=lambda item: (-item[1], item[0]),
    )
    if not kept:
        return NO_TAGS
    return ", ".join(tag for tag, _ in kept)


def _field_order(fields: dict) -> list[str]:
    known = [key for key in RECEIPT_FIELD_ORDER if key in fields]
    extra = sorted(key for key in fields if key not in RECEIPT_FIELD_ORDER)
    return known + extra


def serialize_key_values(payload: dict) -> str:
    if not payload:
        return NO_FIELDS
    lines = []
    for key in _field_order(payload):
        value = payload[key]
        if isinstance(value, (list, tuple)):
            lines.append(f"{key}:")
            for item in value:
                if isinstance(item, (list, tuple)) and len(item) == 2:
                    lines.append(f"  - {item[0]}: {item[1]}")
                else:
                    lines.append(f"  - {item}")
        else:
            lines.append(f"{key}: {value}")
    return "\n".join(lines)


def serialize_ocr_lines(payload: list[str]) -> str:
    return "\n".join(payload) if payload else NO_TEXT


def _format_timestamp(seconds: float) -> str:
    if seconds == int(seconds):
        return f"{int(seconds)}s"
    return f"{seconds}s"


def serialize_frame_captions(payload: list[tuple[float, str]]) -> str:
    if not payload:
        return NO_TEXT
    return "\n".join(f"at {_format_timestamp(ts)}: {caption}" for ts, caption in payload)


_SERIALIZERS = {
    OutputKind.PLAIN_TEXT: str,
    OutputKind.TAGS: serialize_tags,
    OutputKind.DETECTIONS: serialize_detections,
    OutputKind.OCR_LINES: serialize_ocr_lines,
    OutputKind.RECEIPT_FIELDS: serialize_key_values,
    OutputKind.KEY_VALUES: serialize_key_values,
    OutputKind.FRAME_CAPTIONS: serialize_frame_captions,
}


def standardize(expert_name: str, payload: RawExpertOutput, duration_ms: int = 0) -> Observation:
    """Dispatch to the kind-specific serializer and attach the header."""
    serializer = _SERIALIZERS.get(payload.kind)
    if serializer is None:
        raise UnknownKindError(f"no serializer for output kind: {payload.kind}")
    body = serializer(payload.payload)
    header = OBSERVATION_HEADER.format(expert=expert_name)
    return Observation(
        expert_name=expert_name,
        text=f"{header}\n{body}",
        source_payload=payload,
        duration_ms=duration_ms,
    )
