"""Exception types shared across the package."""

from __future__ import annotations


class CfnLoopError(Exception):
    """Base class for all package errors."""


class ParseError(CfnLoopError):
    """Template text could not be parsed.

    line/column are 1-based when known, None otherwise.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


class DuplicateKeyError(ParseError):
    """A mapping repeats a key."""

    def __init__(self, key: str, line: int | None = None, column: int | None = None):
        super().__init__(f'duplicate key "{key}"', line=line, column=column)
        self.key = key


class EmptyExtraction(CfnLoopError):
    """Code-block extraction produced no content."""


class CycleError(CfnLoopError):
    """The resource dependency graph contains a cycle."""

    def __init__(self, nodes: list[str]):
        super().__init__("dependency cycle: " + " -> ".join(nodes))
        self.nodes = nodes


class SpecLoadError(CfnLoopError):
    """Resource specification file is missing or malformed."""


class ConfigError(CfnLoopError):
    """Invalid configuration. Carries one message per invalid field."""

    def __init__(self, problems: list[str] | str):
        if isinstance(problems, str):
            problems = [problems]
        super().__init__("; ".join(problems))
        self.problems = problems


class UnknownStack(CfnLoopError):
    """Stack id does not name a live or rolled-back stack."""


class EvalError(CfnLoopError):
    """Intrinsic evaluation failed.

    kind is one of: unknown-target, index-out-of-range,
    unsupported-cross-stack, missing-mapping-key.
    """

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class TransportError(CfnLoopError):
    """Network-level failure talking to a chat provider (retryable)."""


class ProviderError(CfnLoopError):
    """Provider rejected the request (4xx; not retryable)."""

    def __init__(self, message: str, status_code: int | None = None):
        super().__init__(message)
        self.status_code = status_code


class ScriptExhausted(CfnLoopError):
    """Scripted provider ran out of queued replies."""


class MissingHumanText(CfnLoopError):
    """Human feedback tier selected but no operator text supplied."""


class UnknownSession(CfnLoopError):
    """Session id does not name a pending or resolved session."""


class SessionAlreadyResolved(CfnLoopError):
    """Feedback was already submitted for this session."""


class ManifestError(CfnLoopError):
    """Benchmark manifest is invalid. Carries one message per bad entry."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


class EmptyRecordSet(CfnLoopError):
    """A metric was asked for over zero records."""


class SpecMismatch(CfnLoopError):
    """Intent spec references a resource type spelling the catalog does not know."""
