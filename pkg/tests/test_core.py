import pytest

from mmreact.core import (
    MediaKind,
    Message,
    Role,
    SessionConfig,
    new_session,
)
from mmreact.errors import DanglingMediaError, DuplicatePathError, InvalidConfigError


def test_new_session_empty_state():
    session = new_session(SessionConfig(max_steps=10, budget=4096))
    assert session.messages == []
    assert session.turn_counter == 0


def test_new_session_rejects_bad_config():
    with pytest.raises(InvalidConfigError):
        new_session(SessionConfig(max_steps=0))
    with pytest.raises(InvalidConfigError):
        new_session(SessionConfig(budget=255))


def test_session_ids_unique():
    config = SessionConfig()
    assert new_session(config).session_id != new_session(config).session_id


def test_register_media_verbatim():
    session = new_session()
    handle = session.register_media("/tmp/receipt1.png", MediaKind.IMAGE)
    assert handle.path == "/tmp/receipt1.png"
    assert handle.display_name == "receipt1.png"


def test_register_media_duplicate_path():
    session = new_session()
    session.register_media("/tmp/a.png", MediaKind.IMAGE)
    with pytest.raises(DuplicatePathError):
        session.register_media("/tmp/a.png", MediaKind.IMAGE)


def test_register_media_url_video():
    session = new_session()
    handle = session.register_media("https://host/video.mp4", MediaKind.VIDEO)
    assert handle.kind is MediaKind.VIDEO


def test_append_increases_length():
    session = new_session()
    session.append(Message(role=Role.USER, text="hello"))
    assert len(session.messages) == 1


def test_append_dangling_media():
    session = new_session()
    with pytest.raises(DanglingMediaError):
        session.append(Message(role=Role.USER, text="look", media=["nope"]))


def test_append_step_round_trip():
    session = new_session()
    session.append(Message(role=Role.THOUGHT, text="hm", step=3))
    assert session.messages[-1].step == 3


def test_step_required_exactly_for_internal_roles():
    with pytest.raises(ValueError):
        Message(role=Role.USER, text="hi", step=1).validate()
    with pytest.raises(ValueError):
        Message(role=Role.OBSERVATION, text="seen").validate()


def test_empty_text_requires_media():
    session = new_session()
    handle = session.register_media("/tmp/x.png", MediaKind.IMAGE)
    session.append(Message(role=Role.USER, text="", media=[handle.id]))
    with pytest.raises(ValueError):
        session.append(Message(role=Role.USER, text=""))


def test_visible_transcript_filters_and_preserves_order():
    session = new_session()
    session.append(Message(role=Role.USER, text="q1"))
    session.append(Message(role=Role.THOUGHT, text="t", step=1))
    session.append(Message(role=Role.ACTION_REQUEST, text="a", step=1))
    session.append(Message(role=Role.OBSERVATION, text="o", step=2))
    session.append(Message(role=Role.ASSISTANT_FINAL, text="done"))
    session.append(Message(role=Role.USER, text="q2"))
    visible = session.visible_transcript()
    assert [m.role for m in visible] == [Role.USER, Role.ASSISTANT_FINAL, Role.USER]
    assert [m.text for m in visible] == ["q1", "done", "q2"]


def test_visible_transcript_empty_session():
    assert new_session().visible_transcript() == []


def test_visible_transcript_is_subsequence():
    session = new_session()
    session.append(Message(role=Role.USER, text="a"))
    session.append(Message(role=Role.THOUGHT, text="b", step=1))
    session.append(Message(role=Role.ASSISTANT_FINAL, text="c"))
    visible = session.visible_transcript()
    it = iter(session.messages)
    assert all(any(m is v for m in it) for v in visible)


def test_media_map_size_counts_registrations():
    session = new_session()
    for i in range(5):
        session.register_media(f"/tmp/{i}.png", MediaKind.IMAGE)
    assert len(session.media) == 5


def test_clone_is_independent():
    session = new_session()
    session.append(Message(role=Role.USER, text="a"))
    copy = session.clone()
    copy.append(Message(role=Role.USER, text="b"))
    assert len(session.messages) == 1
    assert len(copy.messages) == 2
