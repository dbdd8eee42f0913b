import hashlib
import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from mmreact.config import EngineConfig
from mmreact.service import create_app
from tests.conftest import write_fixture

IMAGE_BYTES = b"\x89PNG fake image bytes"


def stored_path(data_dir: Path, content: bytes, suffix: str = ".png") -> str:
    return str((data_dir / "media" / f"{hashlib.sha256(content).hexdigest()}{suffix}").resolve())


@pytest.fixture
def harness(tmp_path):
    """App wired to a scripted backend that captions one uploaded image."""
    data_dir = tmp_path / "data"
    fixtures = tmp_path / "fixtures"
    media_path = stored_path(data_dir, IMAGE_BYTES)
    write_fixture(fixtures, media_path, "captioning", "a red bicycle against a wall")
    script = tmp_path / "script.txt"
    script.write_text(
        'WHEN contains "Observation from captioning" RESPOND <<<It shows a red bicycle against a wall.>>>\n'
        f'WHEN contains "describe" RESPOND <<<Let me look. Assistant, captioning <{media_path}>>>>\n'
        'WHEN contains "" RESPOND <<<Hello!>>>\n'
    )
    config = EngineConfig(
        backend_kind="scripted",
        script_path=str(script),
        fixture_dir=str(fixtures),
        data_dir=str(data_dir),
    )
    return config, TestClient(create_app(config))


def _create(client, **overrides):
    response = client.post("/v1/sessions", json=overrides or None)
    assert response.status_code == 200
    return response.json()["session_id"]


def test_create_and_get_empty(harness):
    _, client = harness
    session_id = _create(client)
    body = client.get(f"/v1/sessions/{session_id}").json()
    assert body["transcript"] == []
    assert body["turn_counter"] == 0


def test_invalid_config_rejected(harness):
    _, client = harness
    assert client.post("/v1/sessions", json={"budget": 100}).status_code == 400
    assert client.post("/v1/sessions", json={"max_steps": 0}).status_code == 400


def test_unknown_session(harness):
    _, client = harness
    assert client.get("/v1/sessions/nope").status_code == 404
    assert client.post("/v1/sessions/nope/messages", data={"text": "hi"}).status_code == 404
    assert client.get("/v1/sessions/nope/events").status_code == 404


def test_text_only_turn(harness):
    _, client = harness
    session_id = _create(client)
    body = client.post(f"/v1/sessions/{session_id}/messages", data={"text": "hi"}).json()
    assert body["final_text"] == "Hello!"
    transcript = client.get(f"/v1/sessions/{session_id}").json()["transcript"]
    assert [m["role"] for m in transcript] == ["user", "assistant_final"]


def test_upload_turn(harness):
    _, client = harness
    session_id = _create(client)
    response = client.post(
        f"/v1/sessions/{session_id}/messages",
        data={"text": "please describe this"},
        files=[("attachments", ("bike.png", IMAGE_BYTES, "image/png"))],
    )
    body = response.json()
    assert body["final_text"] == "It shows a red bicycle against a wall."
    assert len(body["media_ids"]) == 1


def test_content_addressed_storage(harness):
    config, client = harness
    session_id = _create(client)
    for _ in range(2):
        response = client.post(
            f"/v1/sessions/{session_id}/messages",
            data={"text": "please describe this"},
            files=[("attachments", ("bike.png", IMAGE_BYTES, "image/png"))],
        )
        assert response.status_code == 200
    media = client.get(f"/v1/sessions/{session_id}").json()["media"]
    # identical bytes map to one stored path, registered once
    assert len(media) == 1
    assert media[0]["path"] == stored_path(Path(config.data_dir), IMAGE_BYTES)


def test_session_busy(harness):
    _, client = harness
    session_id = _create(client)
    record = client.app.state.store.get(session_id)
    record.busy = True
    response = client.post(f"/v1/sessions/{session_id}/messages", data={"text": "hi"})
    assert response.status_code == 409
    record.busy = False


def test_max_steps_override_plumbed(harness):
    _, client = harness
    session_id = _create(client, max_steps=1)
    body = client.post(
        f"/v1/sessions/{session_id}/messages",
        data={"text": "please describe this"},
        files=[("attachments", ("bike.png", IMAGE_BYTES, "image/png"))],
    ).json()
    assert body["steps_used"] == 1
    assert "step limit" in body["final_text"]


def _read_sse(client, session_id):
    events = []
    with client.stream("GET", f"/v1/sessions/{session_id}/events") as response:
        name = None
        for line in response.iter_lines():
            if line.startswith("event: "):
                name = line[len("event: "):]
            elif line.startswith("data: "):
                events.append((name, json.loads(line[len("data: "):])))
    return events


def test_stream_equals_trace(harness):
    _, client = harness
    session_id = _create(client)
    client.post(
        f"/v1/sessions/{session_id}/messages",
        data={"text": "please describe this"},
        files=[("attachments", ("bike.png", IMAGE_BYTES, "image/png"))],
    )
    events = _read_sse(client, session_id)
    trace_lines = client.get(f"/v1/sessions/{session_id}/trace").text.splitlines()
    assert [json.loads(line) for line in trace_lines] == [
        {"step": data["step"], "kind": data["kind"], "detail": data["detail"]} for _, data in events
    ]
    assert [name for name, _ in events] == [data["kind"] for _, data in events]
    assert events[-1][1]["kind"] == "final_response"


def test_stream_idle_heartbeat(harness):
    _, client = harness
    session_id = _create(client)
    with client.stream("GET", f"/v1/sessions/{session_id}/events") as response:
        lines = list(response.iter_lines())
    assert any(line.startswith(": heartbeat") for line in lines)
    assert not any(line.startswith("data:") for line in lines)


def test_restart_replays_transcripts(harness):
    config, client = harness
    session_id = _create(client)
    client.post(f"/v1/sessions/{session_id}/messages", data={"text": "hi"})
    client.post(
        f"/v1/sessions/{session_id}/messages",
        data={"text": "please describe this"},
        files=[("attachments", ("bike.png", IMAGE_BYTES, "image/png"))],
    )
    before = client.get(f"/v1/sessions/{session_id}").json()["transcript"]

    restarted = TestClient(create_app(config))
    after = restarted.get(f"/v1/sessions/{session_id}").json()["transcript"]
    assert after == before
    # the persisted trace survives too
    assert restarted.get(f"/v1/sessions/{session_id}/trace").text == client.get(
        f"/v1/sessions/{session_id}/trace"
    ).text
