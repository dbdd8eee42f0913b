import subprocess
import sys
from pathlib import Path

import pytest

from mmreact.cli import (
    EXIT_BACKEND,
    EXIT_CONFIG,
    EXIT_EXPECTATION,
    EXIT_OK,
    Engine,
    main,
    parse_scenario,
    run_batch,
)
from mmreact.config import EngineConfig
from mmreact.errors import InvalidConfigError
from tests.conftest import write_fixture

REPO_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture
def caption_setup(tmp_path):
    fixtures = tmp_path / "fixtures"
    write_fixture(fixtures, "bike.png", "captioning", "a red bicycle")
    script = tmp_path / "script.txt"
    script.write_text(
        'WHEN contains "Observation from captioning" RESPOND <<<A red bicycle.>>>\n'
        'WHEN contains "describe" RESPOND <<<Assistant, captioning <bike.png>>>>\n'
        'WHEN contains "" RESPOND <<<Hi there.>>>\n'
    )
    return EngineConfig(backend_kind="scripted", script_path=str(script), fixture_dir=str(fixtures))


def _engine(config, trace_out=None):
    return Engine.from_config(config, experts=None, trace_out=trace_out)


def _scenario(tmp_path, text):
    path = tmp_path / "scenario.txt"
    path.write_text(text)
    return path


def test_batch_success(tmp_path, caption_setup):
    scenario = _scenario(
        tmp_path,
        "upload bike.png\n"
        "say please describe this\n"
        "expect_trace_kinds llm_call,expert_batch,llm_call,final_response\n"
        "expect_contains red bicycle\n",
    )
    assert run_batch(scenario, _engine(caption_setup)) == EXIT_OK


def test_batch_wrong_expectation(tmp_path, caption_setup, capsys):
    scenario = _scenario(tmp_path, "say hello\nexpect_contains purple submarine\n")
    assert run_batch(scenario, _engine(caption_setup)) == EXIT_EXPECTATION
    assert "purple submarine" in capsys.readouterr().out


def test_batch_empty_scenario(tmp_path, caption_setup):
    scenario = _scenario(tmp_path, "\n# only comments\n")
    assert run_batch(scenario, _engine(caption_setup)) == EXIT_OK


def test_scenario_parse_error(tmp_path):
    scenario = _scenario(tmp_path, "frobnicate now\n")
    with pytest.raises(InvalidConfigError):
        parse_scenario(scenario)


def test_batch_backend_exhausted(tmp_path):
    script = tmp_path / "script.txt"
    script.write_text('WHEN call 1 RESPOND <<<only once>>>\n')
    config = EngineConfig(backend_kind="scripted", script_path=str(script), fixture_dir=str(tmp_path))
    scenario = _scenario(tmp_path, "say one\nsay two\n")
    assert run_batch(scenario, _engine(config)) == EXIT_BACKEND


def test_trace_out_written_and_deterministic(tmp_path, caption_setup):
    scenario = _scenario(tmp_path, "upload bike.png\nsay please describe this\n")
    traces = []
    for name in ("t1.jsonl", "t2.jsonl"):
        trace_path = tmp_path / name
        assert run_batch(scenario, _engine(caption_setup, trace_out=str(trace_path))) == EXIT_OK
        traces.append(trace_path.read_text())
    assert traces[0] == traces[1]
    assert traces[0].strip()


def test_main_config_error(tmp_path):
    # scripted backend without a script path
    exit_code = main(["batch", str(_scenario(tmp_path, "say hi\n"))])
    assert exit_code == EXIT_CONFIG


def test_main_missing_config_file():
    assert main(["repl", "--config", "/nonexistent.ini"]) == EXIT_CONFIG


def test_main_unknown_expert_filter(tmp_path, caption_setup):
    scenario = _scenario(tmp_path, "say hi\n")
    exit_code = main(
        [
            "batch",
            str(scenario),
            "--backend",
            "scripted",
            "--script",
            caption_setup.script_path,
            "--experts",
            "sommelier",
        ]
    )
    assert exit_code == EXIT_CONFIG


def test_shipped_fig3_scenario_via_cli():
    result = subprocess.run(
        [
            sys.executable,
            "-m",
            "mmreact.cli",
            "batch",
            "scenarios/fig3/scenario.txt",
            "--config",
            "scenarios/fig3/config.ini",
        ],
        cwd=REPO_ROOT,
        capture_output=True,
        text=True,
    )
    assert result.returncode == EXIT_OK, result.stdout + result.stderr


def test_repl_quit_and_upload(tmp_path, caption_setup, monkeypatch, capsys):
    from mmreact.cli import repl

    lines = iter(["/upload bike.png", "please describe this", "/reasoning on", "/quit"])
    monkeypatch.setattr("builtins.input", lambda prompt="": next(lines))
    assert repl(_engine(caption_setup), show_reasoning=False) == EXIT_OK
    output = capsys.readouterr().out
    assert "A red bicycle." in output
    assert "staged upload: bike.png" in output
