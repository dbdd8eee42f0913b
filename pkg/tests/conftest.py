import json
from pathlib import Path

import pytest

from mmreact.experts.builtins import default_registry, media_path_digest
from mmreact.llm import ScriptedBackend, ScriptedRule

REPO_ROOT = Path(__file__).resolve().parent.parent


def write_fixture(fixture_dir: Path, media_path: str, expert: str, payload) -> None:
    directory = fixture_dir / media_path_digest(media_path)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / f"{expert}.json").write_text(json.dumps(payload), encoding="utf-8")


def rules(*pairs) -> ScriptedBackend:
    """Backend from (matcher, argument, response) triples."""
    return ScriptedBackend(rules=[ScriptedRule(m, a, r) for m, a, r in pairs])


@pytest.fixture
def fixture_dir(tmp_path):
    directory = tmp_path / "fixtures"
    directory.mkdir()
    return directory


@pytest.fixture
def registry(fixture_dir, tmp_path):
    corpus = tmp_path / "corpus.json"
    corpus.write_text(json.dumps({"morel mushroom season": "Morels fruit in spring."}), encoding="utf-8")
    return default_registry(fixture_dir, search_corpus=corpus)
