"""Exception hierarchy shared across the engine."""


class MMReactError(Exception):
    """Base class for all engine errors."""


class InvalidConfigError(MMReactError):
    pass


class DuplicatePathError(MMReactError):
    pass


class DanglingMediaError(MMReactError):
    pass


class EmptyRegistryError(MMReactError):
    pass


class BudgetImpossibleError(MMReactError):
    pass


class MalformedActionError(MMReactError):
    """A watchword fired but nothing parseable followed it. Non-fatal:
    the orchestrator converts it into a recovery observation."""


class UnknownExpertError(MMReactError):
    pass


class DuplicateNameError(MMReactError):
    pass


class MissingPathError(MMReactError):
    pass


class ExpertFailureError(MMReactError):
    """Wrapped tool error; carries the underlying message."""


class ExpressionParseError(MMReactError):
    pass


class DivisionByZeroError(MMReactError):
    pass


class UnknownKindError(MMReactError):
    pass


class NoRuleMatchedError(MMReactError):
    pass


class ScriptParseError(MMReactError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class BackendError(MMReactError):
    """Unrecoverable LLM transport failure; the turn is aborted."""


class UnknownSessionError(MMReactError):
    pass


class SessionBusyError(MMReactError):
    pass


class StorageFailureError(MMReactError):
    pass
