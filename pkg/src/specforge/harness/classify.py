"""Failure taxonomy for generated specifications."""

from __future__ import annotations

from dataclasses import dataclass

SYNTAX = "SyntaxError"
SEMANTIC = "SemanticError"
FORMAT = "FormatError"
INFRA = "Infrastructure"

TYPE_SORT = "TypeSort"
API_REFERENCE = "ApiReference"
DOMAIN_PATTERN = "DomainPattern"
TRANSLATION_LOGIC = "TranslationLogic"

SUBCLASSES = {SYNTAX: (TYPE_SORT, API_REFERENCE), SEMANTIC: (DOMAIN_PATTERN, TRANSLATION_LOGIC), FORMAT: (), INFRA: ()}
# syscall categories whose translation needs specialised domain patterns
DOMAIN_CATEGORIES = frozenset({"IPC", "IOMMU", "page-mapping", "page-reclaim"})

FAULT_SUBCLASS = {
    "ParseError": TYPE_SORT,
    "TypeSortError": TYPE_SORT,
    "DomainError": TYPE_SORT,
    "ApiReferenceError": API_REFERENCE,
}


@dataclass(frozen=True, order=True)
class FailureClass:
    top: str
    sub: str | None = None

    def __post_init__(self):
        allowed = SUBCLASSES.get(self.top)
        if allowed is None:
            raise ValueError(f"unknown failure class {self.top!r}")
        if (self.sub is None) != (not allowed) or (self.sub is not None and self.sub not in allowed):
            raise ValueError(f"bad subclass {self.sub!r} for {self.top}")

    @property
    def bucket(self) -> str:
        """Roll-up bucket: format failures count as syntax failures."""
        return SYNTAX if self.top == FORMAT else self.top

    def __str__(self) -> str:
        return f"{self.top}/{self.sub}" if self.sub else self.top

    def to_dict(self) -> dict:
        return {"top": self.top, "sub": self.sub}

    @classmethod
    def from_dict(cls, d: dict) -> "FailureClass":
        return cls(d["top"], d.get("sub"))


def classify_failure(*, format_failed: bool = False, fault_kind: str | None = None, category: str = "",
                     infrastructure: bool = False) -> FailureClass:
    """Classify a failed task from its stage outputs, earliest stage first."""
    if infrastructure:
        return FailureClass(INFRA)
    if format_failed:
        return FailureClass(FORMAT)
    if fault_kind is not None:
        try:
            return FailureClass(SYNTAX, FAULT_SUBCLASS[fault_kind])
        except KeyError:
            raise ValueError(f"unknown fault kind {fault_kind!r}") from None
    return FailureClass(SEMANTIC, DOMAIN_PATTERN if category in DOMAIN_CATEGORIES else TRANSLATION_LOGIC)
