"""mmreact: a tool-using dialogue engine.

A text-only LLM is prompted to decompose multimodal requests into
thought/action steps, invoking registered experts on media referenced by
placeholder file paths; expert outputs are textualized and fed back until
a final response emerges.
"""

from .core import MediaHandle, MediaKind, Message, Role, SessionConfig, SessionState, new_session
from .experts import ExpertDescriptor, ExpertRegistry, default_registry
from .llm import RemoteBackend, ScriptedBackend, scripted_backend
from .orchestrate import TurnResult, export_trace, import_trace, run_turn
from .prompting import build_prefix

__all__ = [
    "ExpertDescriptor",
    "ExpertRegistry",
    "MediaHandle",
    "MediaKind",
    "Message",
    "RemoteBackend",
    "Role",
    "ScriptedBackend",
    "SessionConfig",
    "SessionState",
    "TurnResult",
    "build_prefix",
    "default_registry",
    "export_trace",
    "import_trace",
    "new_session",
    "run_turn",
    "scripted_backend",
]

__version__ = "0.1.0"
