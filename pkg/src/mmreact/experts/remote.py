"""Generic HTTP client for remotely hosted experts.

One POST per invocation; the response body mirrors the raw-output wire
shape: {"kind": <output kind>, "payload": <kind-specific value>}.
"""

from __future__ import annotations

import httpx

from ..errors import ExpertFailureError
from .builtins import _decode_payload
from .registry import OutputKind, RawExpertOutput, ResolvedRequest


def remote_executor(endpoint: str, token: str | None = None, timeout: float = 30.0):
    """Executor invoking one remote expert endpoint."""

    def run(resolved: ResolvedRequest) -> RawExpertOutput:
        headers = {"Authorization": f"Bearer {token}"} if token else {}
        body = {
            "expert": resolved.expert_name,
            "path_or_url": resolved.path,
            "query": resolved.query,
        }
        try:
            response = httpx.post(endpoint, json=body, headers=headers, timeout=timeout)
            response.raise_for_status()
            document = response.json()
        except httpx.HTTPError as exc:
            raise ExpertFailureError(f"{resolved.expert_name}: transport error: {exc}") from exc
        try:
            kind = OutputKind(document["kind"])
            return RawExpertOutput(kind, _decode_payload(kind, document["payload"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise ExpertFailureError(f"{resolved.expert_name}: malformed remote response: {exc}") from exc

    return run
