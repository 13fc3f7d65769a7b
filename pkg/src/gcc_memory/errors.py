"""Error types shared by the library, the CLI and the tool server.

Every error carries a ``code`` drawn from :data:`ERROR_CODES`.  The CLI prints
``error: <code>: <message>`` and the tool server returns ``{"code", "message"}``,
so both surfaces speak the same vocabulary.
"""

from __future__ import annotations


class GccError(Exception):
    code = "Internal"

    def __init__(self, message: str = "") -> None:
        super().__init__(message)
        self.message = message


class BadRequest(GccError):
    code = "BadRequest"


class UnknownOp(GccError):
    code = "UnknownOp"


class NotARepo(GccError):
    code = "NotARepo"


class AlreadyInitialized(GccError):
    code = "AlreadyInitialized"


class CorruptRepo(GccError):
    code = "CorruptRepo"


class IoError(GccError):
    code = "IoError"


class LockHeld(GccError):
    code = "LockHeld"


class UnknownBranch(GccError):
    code = "UnknownBranch"


class BranchExists(GccError):
    code = "BranchExists"


class InvalidName(GccError):
    code = "InvalidName"


class EmptyMessage(GccError):
    code = "EmptyMessage"


class UnknownCommit(GccError):
    code = "UnknownCommit"


class AmbiguousCommit(GccError):
    code = "AmbiguousCommit"


class UnknownSegment(GccError):
    code = "UnknownSegment"


class SelfMerge(GccError):
    code = "SelfMerge"


class AlreadyMerged(GccError):
    code = "AlreadyMerged"


class StaleCursor(GccError):
    code = "StaleCursor"


class VcsError(GccError):
    code = "VcsError"


class ScriptError(GccError):
    code = "ScriptError"


class ParseError(GccError):
    """A document does not follow its canonical format."""

    code = "ParseError"

    def __init__(self, message: str, line: int | None = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def _collect() -> dict[str, type[GccError]]:
    out: dict[str, type[GccError]] = {"Internal": GccError}
    stack = list(GccError.__subclasses__())
    while stack:
        cls = stack.pop()
        out[cls.code] = cls
        stack.extend(cls.__subclasses__())
    return out


ERROR_TYPES = _collect()
ERROR_CODES = frozenset(ERROR_TYPES)
