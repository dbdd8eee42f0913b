import pytest

from mmreact.errors import (
    DuplicateNameError,
    ExpertFailureError,
    MissingPathError,
    UnknownExpertError,
)
from mmreact.experts.builtins import (
    NO_RESULTS_SENTINEL,
    default_registry,
    editing_executor,
)
from mmreact.experts.registry import (
    Detection,
    ExpertDescriptor,
    ExpertRegistry,
    InputSpec,
    OutputKind,
    RawExpertOutput,
    ResolvedRequest,
)
from mmreact.experts.remote import remote_executor
from tests.conftest import write_fixture

EDITING = ExpertDescriptor(
    name="my_editor",
    capability="Edits images.",
    input_spec=InputSpec.PATH_PLUS_TEXT,
    output_kind=OutputKind.PLAIN_TEXT,
    trigger_phrases=("edit",),
)


def test_register_grows_registry(registry):
    before = len(registry)
    registry.register(EDITING, editing_executor)
    assert len(registry) == before + 1


def test_register_duplicate_name(registry):
    with pytest.raises(DuplicateNameError):
        registry.register(registry.descriptor("ocr"), lambda r: None)


def test_register_lookup_round_trip():
    registry = ExpertRegistry()
    registry.register(EDITING, editing_executor)
    assert registry.descriptor("my_editor") is EDITING


def test_registration_order_is_iteration_order(registry):
    names = registry.names()
    registry.register(EDITING, editing_executor)
    assert registry.names() == names + ["my_editor"]


def test_descriptor_rejects_uppercase_triggers():
    with pytest.raises(ValueError):
        ExpertDescriptor("x", "c", InputSpec.TEXT, OutputKind.PLAIN_TEXT, trigger_phrases=("Loud",))


def test_execute_fixture_captioning(registry, fixture_dir):
    write_fixture(fixture_dir, "kitchen.png", "captioning", "a sunny kitchen with a kettle")
    output = registry.execute(ResolvedRequest("captioning", path="kitchen.png"))
    assert output == RawExpertOutput(OutputKind.PLAIN_TEXT, "a sunny kitchen with a kettle")


def test_execute_missing_path(registry):
    with pytest.raises(MissingPathError):
        registry.execute(ResolvedRequest("detection", path=None))


def test_execute_unknown_expert(registry):
    with pytest.raises(UnknownExpertError):
        registry.execute(ResolvedRequest("sommelier", path="a.png"))


def test_execute_missing_fixture_is_expert_failure(registry):
    with pytest.raises(ExpertFailureError):
        registry.execute(ResolvedRequest("captioning", path="unknown.png"))


def test_execute_deterministic(registry, fixture_dir):
    write_fixture(fixture_dir, "a.png", "detection", [["cat", 1, 2, 30, 40]])
    request = ResolvedRequest("detection", path="a.png")
    assert registry.execute(request) == registry.execute(request)
    assert registry.execute(request).payload == [Detection("cat", 1, 2, 30, 40)]


def test_detection_fixture_validates_boxes(registry, fixture_dir):
    write_fixture(fixture_dir, "bad.png", "detection", [["cat", 50, 2, 30, 40]])
    with pytest.raises(ExpertFailureError):
        registry.execute(ResolvedRequest("detection", path="bad.png"))


def test_math_expert(registry):
    output = registry.execute(ResolvedRequest("math", query="2*(3+4)"))
    assert output.payload == "14"


def test_math_expert_bad_expression(registry):
    with pytest.raises(ExpertFailureError):
        registry.execute(ResolvedRequest("math", query="2 +"))


def test_search_hit(registry):
    output = registry.execute(ResolvedRequest("search", query="morel mushroom season"))
    assert output.payload == "Morels fruit in spring."


def test_search_normalization(registry):
    output = registry.execute(ResolvedRequest("search", query="  Morel   Mushroom SEASON "))
    assert output.payload == "Morels fruit in spring."


def test_search_miss(registry):
    output = registry.execute(ResolvedRequest("search", query="quantum gardening"))
    assert output.payload == NO_RESULTS_SENTINEL


def test_editing_returns_derived_path():
    output = editing_executor(ResolvedRequest("image_editing", path="/pics/photo.png", query="remove the lamp"))
    assert "/pics/photo_edited.png" in output.payload
    assert "remove the lamp" in output.payload


def test_remote_expert_unreachable():
    run = remote_executor("http://127.0.0.1:1/expert", timeout=0.2)
    with pytest.raises(ExpertFailureError) as info:
        run(ResolvedRequest("captioning", path="a.png"))
    assert "transport" in str(info.value)


def test_registry_isolation(registry, fixture_dir):
    write_fixture(fixture_dir, "a.png", "captioning", "before")
    request = ResolvedRequest("captioning", path="a.png")
    baseline = registry.execute(request)
    registry.register(EDITING, editing_executor)
    assert registry.execute(request) == baseline


def test_default_registry_names(fixture_dir):
    registry = default_registry(fixture_dir)
    expected = {
        "captioning",
        "tagging",
        "dense_captioning",
        "detection",
        "ocr",
        "celebrity",
        "receipt",
        "search",
        "math",
        "video_summary",
        "image_editing",
    }
    assert set(registry.names()) == expected
