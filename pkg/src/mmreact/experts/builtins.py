"""The built-in deterministic mock expert pool.

Every vision-style mock reads its answer from a fixture directory keyed by
the hash of the media path, so end-to-end scenarios are fully scripted and
repeatable. The math and search experts are real (exact arithmetic, local
corpus); the editing mock derives a new output path from its input.
"""

from __future__ import annotations

import hashlib
import json
import re
from pathlib import Path

from ..errors import ExpertFailureError, ExpressionParseError
from . import mathexpr
from .registry import (
    Detection,
    ExpertDescriptor,
    ExpertRegistry,
    InputSpec,
    OutputKind,
    RawExpertOutput,
    ResolvedRequest,
)

NO_RESULTS_SENTINEL = "no results"


def media_path_digest(path: str) -> str:
    """Stable directory name for a media path's fixtures."""
    return hashlib.sha256(path.encode("utf-8")).hexdigest()


def _decode_payload(kind: OutputKind, data) -> object:
    if kind is OutputKind.PLAIN_TEXT:
        return str(data)
    if kind is OutputKind.TAGS:
        return [(str(tag), float(confidence)) for tag, confidence in data]
    if kind is OutputKind.DETECTIONS:
        return [Detection(str(label), int(x1), int(y1), int(x2), int(y2)) for label, x1, y1, x2, y2 in data]
    if kind is OutputKind.OCR_LINES:
        return [str(line) for line in data]
    if kind in (OutputKind.RECEIPT_FIELDS, OutputKind.KEY_VALUES):
        return dict(data)
    if kind is OutputKind.FRAME_CAPTIONS:
        return [(float(timestamp), str(caption)) for timestamp, caption in data]
    raise ExpertFailureError(f"no decoder for output kind {kind}")


def fixture_executor(name: str, kind: OutputKind, fixture_dir: str | Path):
    """Executor that answers from fixture_dir/<path digest>/<name>.json."""
    fixture_dir = Path(fixture_dir)

    def run(resolved: ResolvedRequest) -> RawExpertOutput:
        fixture = fixture_dir / media_path_digest(resolved.path or "") / f"{name}.json"
        if not fixture.is_file():
            raise ExpertFailureError(f"{name}: no fixture for path {resolved.path}")
        data = json.loads(fixture.read_text(encoding="utf-8"))
        return RawExpertOutput(kind, _decode_payload(kind, data))

    return run


def math_executor(resolved: ResolvedRequest) -> RawExpertOutput:
    expression = resolved.query or ""
    if not expression.strip():
        raise ExpressionParseError("math expert needs an expression")
    return RawExpertOutput(OutputKind.PLAIN_TEXT, mathexpr.eval_math(expression))


def normalize_query(query: str) -> str:
    return re.sub(r"\s+", " ", query).strip().lower()


def search_executor(corpus_path: str | Path | None):
    """Search mock answering from a JSON corpus of normalized query -> snippet."""
    corpus: dict[str, str] = {}
    if corpus_path is not None and Path(corpus_path).is_file():
        raw = json.loads(Path(corpus_path).read_text(encoding="utf-8"))
        corpus = {normalize_query(query): str(snippet) for query, snippet in raw.items()}

    def run(resolved: ResolvedRequest) -> RawExpertOutput:
        snippet = corpus.get(normalize_query(resolved.query or ""), NO_RESULTS_SENTINEL)
        return RawExpertOutput(OutputKind.PLAIN_TEXT, snippet)

    return run


def editing_executor(resolved: ResolvedRequest) -> RawExpertOutput:
    """Mock editor: reports a derived output path for the requested edit."""
    source = Path(resolved.path or "")
    edited = source.with_name(f"{source.stem}_edited{source.suffix or '.png'}")
    edit = resolved.query or "requested edit"
    return RawExpertOutput(
        OutputKind.PLAIN_TEXT,
        f"Applied edit '{edit}' to {source}. Edited image saved to <{edited}>",
    )


_VISION_EXPERTS = [
    ExpertDescriptor(
        name="captioning",
        capability="Generates one natural-language sentence describing the overall image content.",
        input_spec=InputSpec.IMAGE_PATH,
        output_kind=OutputKind.PLAIN_TEXT,
        trigger_phrases=("caption", "describe", "what is in"),
        examples=(
            ("What is this picture about?", "Assistant, captioning <ImagePath>"),
            ("Describe the photo I uploaded.", "Assistant, captioning <ImagePath>"),
        ),
    ),
    ExpertDescriptor(
        name="tagging",
        capability="Lists keywords for the objects, scenes and attributes present in the image, with confidences.",
        input_spec=InputSpec.IMAGE_PATH,
        output_kind=OutputKind.TAGS,
        trigger_phrases=("tags", "keywords", "topics"),
        examples=(
            ("What tags fit this image?", "Assistant, tagging <ImagePath>"),
            ("Give me keywords for the photo.", "Assistant, tagging <ImagePath>"),
        ),
    ),
    ExpertDescriptor(
        name="dense_captioning",
        capability="Describes each salient image region with its own short caption.",
        input_spec=InputSpec.IMAGE_PATH,
        output_kind=OutputKind.DETECTIONS,
        trigger_phrases=("dense caption", "region", "describe each part"),
        examples=(
            ("Describe every part of the image.", "Assistant, dense_captioning <ImagePath>"),
            ("What is in each region?", "Assistant, dense_captioning <ImagePath>"),
        ),
    ),
    ExpertDescriptor(
        name="detection",
        capability="Finds salient objects and returns their names with bounding-box pixel coordinates.",
        input_spec=InputSpec.IMAGE_PATH,
        output_kind=OutputKind.DETECTIONS,
        trigger_phrases=("objects", "detect", "where is", "bounding box"),
        examples=(
            ("What objects are in the image?", "Assistant, what objects do you see in this image? <ImagePath>"),
            ("Where is the dog?", "Assistant, detection <ImagePath>"),
        ),
    ),
    ExpertDescriptor(
        name="ocr",
        capability="Extracts all readable scene text from the image, one line per text region.",
        input_spec=InputSpec.IMAGE_PATH,
        output_kind=OutputKind.OCR_LINES,
        trigger_phrases=("read the text", "scene text", "what does it say"),
        examples=(
            ("What does the sign say?", "Assistant, ocr <ImagePath>"),
            ("Read the text in this image.", "Assistant, ocr <ImagePath>"),
        ),
    ),
    ExpertDescriptor(
        name="celebrity",
        capability="Identifies well-known people appearing in the image by name.",
        input_spec=InputSpec.IMAGE_PATH,
        output_kind=OutputKind.PLAIN_TEXT,
        trigger_phrases=("celebrity", "who is this person", "famous"),
        examples=(
            ("Who is in this photo?", "Assistant, celebrity <ImagePath>"),
            ("Is this person famous?", "Assistant, celebrity <ImagePath>"),
        ),
    ),
    ExpertDescriptor(
        name="receipt",
        capability="Reads a receipt image and extracts merchant, date, total and line items.",
        input_spec=InputSpec.IMAGE_PATH,
        output_kind=OutputKind.RECEIPT_FIELDS,
        trigger_phrases=("receipt", "invoice", "how much did"),
        examples=(
            ("How much was this receipt?", "Assistant, receipt <ImagePath>"),
            ("What did I buy here?", "Assistant, receipt <ImagePath>"),
        ),
    ),
    ExpertDescriptor(
        name="video_summary",
        capability="Samples a video and captions representative frames with their timestamps.",
        input_spec=InputSpec.VIDEO_PATH,
        output_kind=OutputKind.FRAME_CAPTIONS,
        trigger_phrases=("video", "summarize the clip", "what happens"),
        examples=(
            ("Summarize this video.", "Assistant, video_summary <VideoPath>"),
            ("What happens in the clip?", "Assistant, video_summary <VideoPath>"),
        ),
    ),
]

SEARCH_DESCRIPTOR = ExpertDescriptor(
    name="search",
    capability="Looks up a text query on the web and returns the best snippet.",
    input_spec=InputSpec.TEXT,
    output_kind=OutputKind.PLAIN_TEXT,
    trigger_phrases=("search", "look up", "latest"),
    examples=(
        ("When is morel mushroom season?", "Assistant, search morel mushroom season"),
        ("Look up the city population.", "Assistant, search city population"),
    ),
)

MATH_DESCRIPTOR = ExpertDescriptor(
    name="math",
    capability="Evaluates an arithmetic expression exactly and returns the decimal result.",
    input_spec=InputSpec.TEXT,
    output_kind=OutputKind.PLAIN_TEXT,
    trigger_phrases=("calculate", "sum", "total of", "add up"),
    examples=(
        ("What is 17 * 23?", "Assistant, math 17 * 23"),
        ("Add up the totals.", "Assistant, math 12.05 + 23.10"),
    ),
)

EDITING_DESCRIPTOR = ExpertDescriptor(
    name="image_editing",
    capability="Edits the image as instructed and returns the path of the edited copy.",
    input_spec=InputSpec.PATH_PLUS_TEXT,
    output_kind=OutputKind.PLAIN_TEXT,
    trigger_phrases=("edit", "remove the", "replace the"),
    examples=(
        ("Remove the lamp from the photo.", "Assistant, image_editing <ImagePath> remove the lamp"),
        ("Make the sky pink.", "Assistant, image_editing <ImagePath> make the sky pink"),
    ),
)


def default_registry(
    fixture_dir: str | Path,
    search_corpus: str | Path | None = None,
    include_editing: bool = True,
) -> ExpertRegistry:
    """Registry with the full built-in pool, fixtures rooted at fixture_dir."""
    registry = ExpertRegistry()
    for descriptor in _VISION_EXPERTS:
        registry.register(descriptor, fixture_executor(descriptor.name, descriptor.output_kind, fixture_dir))
    registry.register(SEARCH_DESCRIPTOR, search_executor(search_corpus))
    registry.register(MATH_DESCRIPTOR, math_executor)
    if include_editing:
        registry.register(EDITING_DESCRIPTOR, editing_executor)
    return registry
