"""Exception hierarchy shared across the workbench."""

from __future__ import annotations


class SpecforgeError(Exception):
    """Base class for every error raised by specforge."""


class DomainError(SpecforgeError):
    """An index or field path fell outside the kernel state schema."""


class UnknownConstant(SpecforgeError):
    """A ``dt.`` name that is not in the constant table."""


class ConfigError(SpecforgeError):
    pass


class UnsupportedConstruct(SpecforgeError):
    """C text outside the accepted subset."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line = line
        self.col = col


class UnknownHelper(SpecforgeError):
    pass


class NotApplicable(SpecforgeError):
    """The syscall has no injection site for the requested bug class."""


class InfrastructureError(SpecforgeError):
    """Solver crash, timeout, or unparseable solver output. Never a verdict."""


class EncodingBug(SpecforgeError):
    """A solver witness failed to replay concretely."""


class ProviderError(SpecforgeError):
    pass


class FormatError(SpecforgeError):
    """Completion text has no fenced python block."""


FAULT_KINDS = ("ParseError", "TypeSortError", "ApiReferenceError", "DomainError")


class SpecFault(SpecforgeError):
    """A fault in specification text detected before verification.

    ``kind`` is one of :data:`FAULT_KINDS`.
    """

    def __init__(self, kind: str, message: str, line: int = 0, col: int = 0):
        if kind not in FAULT_KINDS:
            raise ValueError(f"bad fault kind {kind!r}")
        super().__init__(f"{kind} at {line}:{col}: {message}")
        self.kind = kind
        self.message = message
        self.line = line
        self.col = col

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": self.message, "line": self.line, "col": self.col}
