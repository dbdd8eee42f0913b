"""INI-style configuration shared by the service and the CLI.

Sections: [llm], [experts], [limits], [storage]. The MMREACT_CONFIG
environment variable overrides the config file path.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path

from .core import SessionConfig
from .errors import InvalidConfigError
from .experts.builtins import default_registry
from .experts.registry import ExpertDescriptor, ExpertRegistry, InputSpec, OutputKind
from .experts.remote import remote_executor
from .llm import LLMBackend, RemoteBackend, scripted_backend

ENV_CONFIG_PATH = "MMREACT_CONFIG"


@dataclass(slots=True)
class EngineConfig:
    backend_kind: str = "scripted"  # scripted | remote
    script_path: str | None = None
    llm_endpoint: str | None = None
    llm_model: str = "gpt-3.5-turbo"
    llm_token: str | None = None
    fixture_dir: str = "fixtures"
    search_corpus: str | None = None
    include_editing: bool = True
    # name -> (endpoint, token) for remotely hosted experts
    remote_experts: dict[str, tuple[str, str | None]] = field(default_factory=dict)
    max_steps: int = 10
    budget: int = 4096
    reserved_for_completion: int = 512
    data_dir: str = "data"

    def session_config(self) -> SessionConfig:
        return SessionConfig(
            max_steps=self.max_steps,
            budget=self.budget,
            reserved_for_completion=self.reserved_for_completion,
        )

    def build_registry(self) -> ExpertRegistry:
        registry = default_registry(
            self.fixture_dir,
            search_corpus=self.search_corpus,
            include_editing=self.include_editing,
        )
        for name, (endpoint, token) in self.remote_experts.items():
            registry.register(
                ExpertDescriptor(
                    name=name,
                    capability=f"Remotely hosted expert '{name}'.",
                    input_spec=InputSpec.PATH_PLUS_TEXT,
                    output_kind=OutputKind.PLAIN_TEXT,
                ),
                remote_executor(endpoint, token=token),
            )
        return registry

    def build_backend(self) -> LLMBackend:
        if self.backend_kind == "scripted":
            if not self.script_path:
                raise InvalidConfigError("scripted backend requires a script path")
            return scripted_backend(self.script_path)
        if self.backend_kind == "remote":
            if not self.llm_endpoint:
                raise InvalidConfigError("remote backend requires an endpoint")
            return RemoteBackend(endpoint=self.llm_endpoint, model=self.llm_model, token=self.llm_token)
        raise InvalidConfigError(f"unknown backend kind: {self.backend_kind}")


def load_config(path: str | Path | None = None) -> EngineConfig:
    """Load the config file, honoring the MMREACT_CONFIG override. A missing
    path yields the defaults."""
    if path is None:
        path = os.environ.get(ENV_CONFIG_PATH)
    config = EngineConfig()
    if path is None:
        return config
    path = Path(path)
    if not path.is_file():
        raise InvalidConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    parser.read(path)

    if parser.has_section("llm"):
        llm = parser["llm"]
        config.backend_kind = llm.get("backend", config.backend_kind)
        config.script_path = llm.get("script", config.script_path)
        config.llm_endpoint = llm.get("endpoint", config.llm_endpoint)
        config.llm_model = llm.get("model", config.llm_model)
        config.llm_token = llm.get("token", config.llm_token)
    if parser.has_section("experts"):
        experts = parser["experts"]
        config.fixture_dir = experts.get("fixture_dir", config.fixture_dir)
        config.search_corpus = experts.get("search_corpus", config.search_corpus)
        config.include_editing = experts.getboolean("include_editing", config.include_editing)
        endpoints = {
            key.split(".", 1)[1]: value for key, value in experts.items() if key.startswith("endpoint.")
        }
        tokens = {key.split(".", 1)[1]: value for key, value in experts.items() if key.startswith("token.")}
        config.remote_experts = {name: (url, tokens.get(name)) for name, url in endpoints.items()}
    if parser.has_section("limits"):
        limits = parser["limits"]
        config.max_steps = limits.getint("max_steps", config.max_steps)
        config.budget = limits.getint("budget", config.budget)
        config.reserved_for_completion = limits.getint(
            "reserved_for_completion", config.reserved_for_completion
        )
    if parser.has_section("storage"):
        config.data_dir = parser["storage"].get("data_dir", config.data_dir)
    return config
