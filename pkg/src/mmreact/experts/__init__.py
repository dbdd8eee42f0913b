from .mathexpr import eval_math
from .registry import (
    Detection,
    ExpertDescriptor,
    ExpertRegistry,
    InputSpec,
    OutputKind,
    RawExpertOutput,
    ResolvedRequest,
)
from .builtins import default_registry, media_path_digest
from .remote import remote_executor

__all__ = [
    "Detection",
    "ExpertDescriptor",
    "ExpertRegistry",
    "InputSpec",
    "OutputKind",
    "RawExpertOutput",
    "ResolvedRequest",
    "default_registry",
    "eval_math",
    "media_path_digest",
    "remote_executor",
]
