"""Prompt-prefix assembly, dialogue rendering, and the token budget.

The prefix injects every registered expert's name, capability, input and
output formats plus a few in-context example dialogues, followed by the
watchword convention. Rendering folds the whole session (including
internal thoughts, actions and observations) behind the prefix, evicting
old content when the estimate would blow the context budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .actionparse import DEFAULT_WATCHWORD
from .core import Message, Role, SessionState
from .errors import BudgetImpossibleError, EmptyRegistryError
from .experts.registry import ExpertDescriptor, ExpertRegistry
from .llm import LLMInput

DEFAULT_EXAMPLES_PER_EXPERT = 2


def default_template() -> str:
    return resources.files("mmreact").joinpath("templates/prefix.txt").read_text(encoding="utf-8")


@dataclass(slots=True, frozen=True)
class PromptPrefix:
    system_instructions: str
    expert_blocks: tuple[str, ...]
    example_dialogues: tuple[str, ...]

    @property
    def text(self) -> str:
        return self.system_instructions


@dataclass(slots=True, frozen=True)
class TokenBudget:
    limit: int = 4096
    reserved_for_completion: int = 512

    def __post_init__(self) -> None:
        if self.limit <= 0 or self.reserved_for_completion <= 0:
            raise ValueError("budget values must be positive")
        if self.reserved_for_completion >= self.limit:
            raise ValueError("reserved_for_completion must be smaller than limit")

    @property
    def available(self) -> int:
        return self.limit - self.reserved_for_completion


def estimate_tokens(text: str) -> int:
    """Deterministic backend-agnostic heuristic: ceil(characters / 4)."""
    return math.ceil(len(text) / 4)


def _render_block(descriptor: ExpertDescriptor) -> str:
    return (
        f"Expert: {descriptor.name}\n"
        f"Capability: {descriptor.capability}\n"
        f"Input: {descriptor.input_spec.value}\n"
        f"Output: {descriptor.output_kind.value}"
    )


def _render_examples(descriptor: ExpertDescriptor, limit: int) -> list[str]:
    rendered = []
    for user_line, action_line in descriptor.examples[:limit]:
        rendered.append(f"User: {user_line}\n{action_line}")
    return rendered


def build_prefix(
    registry: ExpertRegistry,
    watchword: str = DEFAULT_WATCHWORD,
    template: str | None = None,
    template_path: str | Path | None = None,
    examples_per_expert: int = DEFAULT_EXAMPLES_PER_EXPERT,
) -> PromptPrefix:
    """Pure function of the registry: identical registries give identical prefixes."""
    if len(registry) == 0:
        raise EmptyRegistryError("cannot build a prefix from an empty registry")
    if template is None:
        template = Path(template_path).read_text(encoding="utf-8") if template_path else default_template()
    blocks = tuple(_render_block(d) for d in registry.descriptors())
    examples: list[str] = []
    for descriptor in registry.descriptors():
        examples.extend(_render_examples(descriptor, examples_per_expert))
    instructions = template.format(
        expert_blocks="\n\n".join(blocks),
        examples="\n\n".join(examples),
        watchword=watchword,
    )
    return PromptPrefix(
        system_instructions=instructions,
        expert_blocks=blocks,
        example_dialogues=tuple(examples),
    )


def _segment_role(role: Role) -> str:
    if role in (Role.USER, Role.OBSERVATION):
        return "user"
    if role is Role.SYSTEM:
        return "system"
    return "assistant"


def _protected_indices(messages: list[Message], session: SessionState) -> set[int]:
    """Messages that eviction may never touch: the latest user message and
    everything after it (the current turn), plus any upload message whose
    media is referenced again later."""
    protected: set[int] = set()
    last_user = max((i for i, m in enumerate(messages) if m.role is Role.USER), default=None)
    if last_user is not None:
        protected.update(range(last_user, len(messages)))
    for i, message in enumerate(messages):
        if not message.media:
            continue
        ids = set(message.media)
        paths = {session.media[mid].path for mid in ids if mid in session.media}
        for later in messages[i + 1:]:
            if ids & set(later.media) or any(path in later.text for path in paths):
                protected.add(i)
                break
    return protected


def _eviction_order(messages: list[Message], protected: set[int]) -> list[int]:
    internal = [i for i, m in enumerate(messages) if i not in protected and not m.visible]
    pairs: list[int] = []
    pending_user: int | None = None
    for i, message in enumerate(messages):
        if i in protected or i in internal:
            continue
        if message.role is Role.USER:
            pending_user = i
        elif message.role is Role.ASSISTANT_FINAL and pending_user is not None:
            pairs.extend([pending_user, i])
            pending_user = None
    # last resort: anything unprotected that the first two tiers missed
    leftovers = [
        i for i in range(len(messages)) if i not in protected and i not in internal and i not in pairs
    ]
    return internal + pairs + leftovers


def render_dialogue(session: SessionState, prefix: PromptPrefix, budget: TokenBudget) -> LLMInput:
    """Prefix plus the full dialogue, evicted to fit the budget.

    Oldest internal messages go first, then oldest completed user/final
    pairs; the prefix, the latest user message and the current turn are
    never dropped.
    """
    messages = list(session.messages)
    protected = _protected_indices(messages, session)
    # the +1 covers the newline separating segments in the flattened input
    cost = [estimate_tokens(prefix.text + "\n")] + [estimate_tokens(m.text + "\n") for m in messages]

    last_user = max((i for i, m in enumerate(messages) if m.role is Role.USER), default=None)
    floor = cost[0] + (cost[last_user + 1] if last_user is not None else 0)
    if floor > budget.available:
        raise BudgetImpossibleError(
            f"prefix plus latest user message needs {floor} tokens; {budget.available} available"
        )

    dropped: set[int] = set()
    order = _eviction_order(messages, protected)
    position = 0
    while sum(c for i, c in enumerate(cost) if i == 0 or (i - 1) not in dropped) > budget.available:
        if position >= len(order):
            raise BudgetImpossibleError("cannot fit required messages within the token budget")
        dropped.add(order[position])
        position += 1

    segments: list[tuple[str, str]] = [("system", prefix.text)]
    for i, message in enumerate(messages):
        if i in dropped:
            continue
        segments.append((_segment_role(message.role), message.text))
    return LLMInput(segments=tuple(segments))
