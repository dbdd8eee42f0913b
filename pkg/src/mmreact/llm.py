"""LLM backend abstraction: a deterministic scripted backend for offline
runs and tests, and a chat-completions-style remote client.

Swapping one for the other changes nothing else in the engine; both
consume the same rendered input and return plain text.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import httpx

from .errors import BackendError, NoRuleMatchedError, ScriptParseError
from .serialize import OBSERVATION_HEADER


@dataclass(slots=True, frozen=True)
class LLMInput:
    """Ordered role-tagged segments; the first segment is the system prefix."""

    segments: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("LLMInput must be non-empty")
        if self.segments[0][0] != "system":
            raise ValueError("first segment must be the system prefix")

    @property
    def text(self) -> str:
        return "\n".join(text for _, text in self.segments)


class LLMBackend(Protocol):
    def complete(self, input: LLMInput) -> str: ...


@dataclass(slots=True, frozen=True)
class ScriptedRule:
    """First matching rule wins; matcher is contains(substring) or nth_call(n)."""

    matcher: str  # "contains" | "nth_call"
    argument: str | int
    response: str


@dataclass(slots=True)
class ScriptedBackend:
    """Rule-driven stand-in for the real model; pure given (rules, call count, input)."""

    rules: list[ScriptedRule]
    calls: int = field(default=0)

    def complete(self, input: LLMInput) -> str:
        self.calls += 1
        text = input.text
        for rule in self.rules:
            if rule.matcher == "contains" and str(rule.argument) in text:
                return rule.response
            if rule.matcher == "nth_call" and int(rule.argument) == self.calls:
                return rule.response
        raise NoRuleMatchedError(f"no scripted rule matched call {self.calls}")


_RULE_RE = re.compile(
    r'^WHEN\s+(?:contains\s+"(?P<contains>(?:[^"\\]|\\.)*)"|call\s+(?P<nth>\d+))\s+RESPOND\s+<<<(?P<inline>.*?)>>>\s*$'
)
_RULE_OPEN_RE = re.compile(
    r'^WHEN\s+(?:contains\s+"(?P<contains>(?:[^"\\]|\\.)*)"|call\s+(?P<nth>\d+))\s+RESPOND\s+<<<\s*$'
)


def _unescape(value: str) -> str:
    return value.replace('\\"', '"').replace("\\\\", "\\")


def load_script(path: str | Path) -> list[ScriptedRule]:
    """Parse the line-oriented script format into rules, in file order.

    A rule is `WHEN contains "..." RESPOND <<<body>>>` or
    `WHEN call N RESPOND <<<body>>>`; a body may be inline or span the
    following lines up to a bare `>>>` terminator.
    """
    rules: list[ScriptedRule] = []
    lines = Path(path).read_text(encoding="utf-8").split("\n")
    i = 0
    while i < len(lines):
        line = lines[i]
        if not line.strip() or line.lstrip().startswith("#"):
            i += 1
            continue
        match = _RULE_RE.match(line)
        if match:
            rules.append(_rule_from_match(match, match.group("inline")))
            i += 1
            continue
        match = _RULE_OPEN_RE.match(line)
        if match:
            body_lines = []
            i += 1
            while i < len(lines) and lines[i].strip() != ">>>":
                body_lines.append(lines[i])
                i += 1
            if i >= len(lines):
                raise ScriptParseError("unterminated response body", line=len(lines))
            rules.append(_rule_from_match(match, "\n".join(body_lines)))
            i += 1
            continue
        raise ScriptParseError(f"unrecognized rule: {line.strip()!r}", line=i + 1)
    return rules


def _rule_from_match(match: re.Match, body: str) -> ScriptedRule:
    if match.group("contains") is not None:
        return ScriptedRule("contains", _unescape(match.group("contains")), body)
    return ScriptedRule("nth_call", int(match.group("nth")), body)


def scripted_backend(path: str | Path) -> ScriptedBackend:
    return ScriptedBackend(rules=load_script(path))


# Stop the remote model before it invents its own observations.
_STOP_SEQUENCE = OBSERVATION_HEADER.split("{", 1)[0].strip()

_ROLE_MAP = {"system": "system", "user": "user", "assistant": "assistant"}


@dataclass(slots=True)
class RemoteBackend:
    """Chat-completions-style HTTP client. Temperature 0 for reproducibility."""

    endpoint: str
    model: str
    token: str | None = None
    temperature: float = 0.0
    timeout: float = 60.0
    max_retries: int = 2

    def complete(self, input: LLMInput) -> str:
        body = {
            "model": self.model,
            "messages": [{"role": _ROLE_MAP[role], "content": text} for role, text in input.segments],
            "temperature": self.temperature,
            "stop": [_STOP_SEQUENCE],
        }
        headers = {"Authorization": f"Bearer {self.token}"} if self.token else {}
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            try:
                response = httpx.post(self.endpoint, json=body, headers=headers, timeout=self.timeout)
                if response.status_code >= 500:
                    raise BackendError(f"status {response.status_code}: {response.text[:200]}")
                if response.status_code >= 400:
                    raise BackendError(f"status {response.status_code}: {response.text[:200]}")
                return response.json()["choices"][0]["message"]["content"]
            except (httpx.TransportError, BackendError) as exc:
                last_error = exc
                if attempt < self.max_retries and not (
                    isinstance(exc, BackendError) and "status 4" in str(exc)
                ):
                    time.sleep(0.2 * 2**attempt)
                    continue
                break
            except (KeyError, ValueError) as exc:
                raise BackendError(f"malformed completion response: {exc}") from exc
        raise BackendError(f"remote completion failed: {last_error}")
