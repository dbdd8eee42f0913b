"""Terminal front end: an interactive REPL and a line-oriented batch runner
driving the same engine path, plus a `serve` command for the HTTP API.

Exit codes: 0 success, 2 config or scenario parse error, 3 expectation
failure, 4 backend error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from .config import EngineConfig, load_config
from .core import SessionState, new_session
from .errors import BackendError, InvalidConfigError, MMReactError, NoRuleMatchedError
from .experts.registry import ExpertRegistry
from .orchestrate import TurnResult, export_trace, run_turn
from .prompting import build_prefix

DIM = "\x1b[2m"
RESET = "\x1b[0m"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_EXPECTATION = 3
EXIT_BACKEND = 4


def _filter_registry(registry: ExpertRegistry, names: list[str]) -> ExpertRegistry:
    filtered = ExpertRegistry()
    for name in registry.names():
        if name in names:
            filtered.register(registry.descriptor(name), registry.executor(name))
    missing = set(names) - set(registry.names())
    if missing:
        raise InvalidConfigError(f"unknown experts: {', '.join(sorted(missing))}")
    return filtered


@dataclass(slots=True)
class Engine:
    """One session plus everything needed to run turns against it."""

    config: EngineConfig
    registry: ExpertRegistry
    backend: object
    prefix: object
    session: SessionState
    trace_out: Path | None = None

    @classmethod
    def from_config(cls, config: EngineConfig, experts: list[str] | None, trace_out: str | None) -> "Engine":
        registry = config.build_registry()
        if experts:
            registry = _filter_registry(registry, experts)
        return cls(
            config=config,
            registry=registry,
            backend=config.build_backend(),
            prefix=build_prefix(registry),
            session=new_session(config.session_config()),
            trace_out=Path(trace_out) if trace_out else None,
        )

    def run(self, text: str, uploads: list[str]) -> TurnResult:
        self.session, result = run_turn(
            self.session,
            text,
            uploads,
            registry=self.registry,
            backend=self.backend,
            prefix=self.prefix,
        )
        if self.trace_out is not None:
            with self.trace_out.open("a", encoding="utf-8") as handle:
                handle.write(export_trace(result) + "\n")
        return result


def _print_reasoning(result: TurnResult) -> None:
    for event in result.trace:
        if event.kind == "llm_call":
            print(f"{DIM}[{event.step}] llm: {event.detail['output']}{RESET}")
        elif event.kind == "expert_batch":
            for execution in event.detail["executions"]:
                print(f"{DIM}[{event.step}] {execution['expert']}: {execution['request']}{RESET}")
        elif event.kind == "recovery":
            print(f"{DIM}[{event.step}] recovery: {event.detail['reason']}{RESET}")


def repl(engine: Engine, show_reasoning: bool) -> int:
    uploads: list[str] = []
    print("mmreact repl. /upload <path>, /reasoning on|off, /quit")
    while True:
        try:
            line = input("> ")
        except EOFError:
            return EXIT_OK
        line = line.strip()
        if not line:
            continue
        if line == "/quit":
            return EXIT_OK
        if line.startswith("/upload "):
            uploads.append(line.split(None, 1)[1])
            print(f"staged upload: {uploads[-1]}")
            continue
        if line.startswith("/reasoning"):
            show_reasoning = line.split()[-1] == "on"
            print(f"reasoning display {'on' if show_reasoning else 'off'}")
            continue
        try:
            result = engine.run(line, uploads)
        except (BackendError, NoRuleMatchedError) as exc:
            print(f"backend error: {exc}", file=sys.stderr)
            return EXIT_BACKEND
        except MMReactError as exc:
            print(f"error: {exc}", file=sys.stderr)
            continue
        uploads = []
        if show_reasoning:
            _print_reasoning(result)
        print(result.final_text)


def parse_scenario(path: Path) -> list[tuple[str, str]]:
    """Directives: upload PATH | say TEXT | expect_contains TEXT |
    expect_trace_kinds k1,k2,..."""
    directives: list[tuple[str, str]] = []
    for number, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 1)
        keyword = parts[0]
        argument = parts[1] if len(parts) > 1 else ""
        if keyword not in ("upload", "say", "expect_contains", "expect_trace_kinds"):
            raise InvalidConfigError(f"{path}:{number}: unknown directive {keyword!r}")
        if not argument:
            raise InvalidConfigError(f"{path}:{number}: {keyword} needs an argument")
        directives.append((keyword, argument))
    return directives


def run_batch(scenario_path: Path, engine: Engine) -> int:
    directives = parse_scenario(scenario_path)
    uploads: list[str] = []
    last_result: TurnResult | None = None
    failures = 0
    for index, (keyword, argument) in enumerate(directives, start=1):
        if keyword == "upload":
            uploads.append(argument)
        elif keyword == "say":
            try:
                last_result = engine.run(argument, uploads)
            except (BackendError, NoRuleMatchedError) as exc:
                print(f"step {index}: backend error: {exc}", file=sys.stderr)
                return EXIT_BACKEND
            uploads = []
        elif keyword == "expect_contains":
            if last_result is None or argument not in last_result.final_text:
                got = last_result.final_text if last_result else "<no turn run>"
                print(f"step {index}: expected final text to contain {argument!r}\n  got: {got!r}")
                failures += 1
        elif keyword == "expect_trace_kinds":
            expected = [kind.strip() for kind in argument.split(",")]
            got = [event.kind for event in last_result.trace] if last_result else []
            if got != expected:
                print(f"step {index}: expected trace kinds {expected}, got {got}")
                failures += 1
    if failures:
        print(f"{failures} expectation(s) failed")
        return EXIT_EXPECTATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmreact")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("repl", "batch", "serve"):
        command = sub.add_parser(name)
        command.add_argument("--config", default=None, help="config file path")
        command.add_argument("--backend", choices=["scripted", "remote"], default=None)
        command.add_argument("--script", default=None, help="scripted backend rule file")
        command.add_argument("--experts", default=None, help="comma-separated expert names")
        command.add_argument("--max-steps", type=int, default=None)
        command.add_argument("--trace-out", default=None)
        if name == "batch":
            command.add_argument("scenario", help="scenario file")
        if name == "repl":
            command.add_argument("--show-reasoning", action="store_true")
        if name == "serve":
            command.add_argument("--host", default="127.0.0.1")
            command.add_argument("--port", type=int, default=8000)
    return parser


def _engine_config(args: argparse.Namespace) -> EngineConfig:
    config = load_config(args.config)
    if args.backend:
        config.backend_kind = args.backend
    if args.script:
        config.script_path = args.script
    if args.max_steps is not None:
        config.max_steps = args.max_steps
    return config


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _engine_config(args)
    except InvalidConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(config), host=args.host, port=args.port)
        return EXIT_OK

    experts = [name.strip() for name in args.experts.split(",")] if args.experts else None
    try:
        engine = Engine.from_config(config, experts, args.trace_out)
    except (InvalidConfigError, FileNotFoundError, MMReactError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "repl":
        return repl(engine, show_reasoning=args.show_reasoning)
    try:
        return run_batch(Path(args.scenario), engine)
    except (InvalidConfigError, FileNotFoundError) as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
