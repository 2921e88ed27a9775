"""The translation guide as structured data and its text rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable

from ..errors import ConfigError

TIERS = ("syntax", "domain", "completeness")
TIER_IDS = {"syntax": range(1, 7), "domain": range(7, 13), "completeness": range(13, 16)}
TITLES = (
    "Specification template", "Pre-condition translation", "Post-condition patterns", "Map field syntax",
    "Operator rules", "Constant prefixes", "Page table PTE formulas", "Shadow metadata", "Reference counting",
    "TLB flush", "State pointers", "Field name mapping", "C helper functions", "Available helpers",
    "IPC system calls",
)


@dataclass(frozen=True)
class GuideEntry:
    source: str
    spec: str
    note: str = ""


@dataclass(frozen=True)
class GuideCategory:
    id: int
    title: str
    tier: str
    summary: str
    entries: tuple[GuideEntry, ...]


@dataclass(frozen=True)
class Guide:
    categories: tuple[GuideCategory, ...]

    def validate(self) -> "Guide":
        """Check the shipped shape: ids 1-15, fixed titles, tiers 1-6/7-12/13-15."""
        ids = [c.id for c in self.categories]
        if ids != list(range(1, 16)):
            raise ConfigError(f"guide ids must be 1..15 in order, got {ids}")
        for c in self.categories:
            if c.title != TITLES[c.id - 1]:
                raise ConfigError(f"guide category {c.id} must be titled {TITLES[c.id - 1]!r}")
            if c.id not in TIER_IDS.get(c.tier, ()):
                raise ConfigError(f"guide category {c.id} is in the wrong tier {c.tier!r}")
        return self


def parse_guide(data: dict) -> Guide:
    try:
        cats = tuple(
            GuideCategory(int(c["id"]), c["title"], c["tier"], c.get("summary", ""),
                          tuple(GuideEntry(e["source"], e["spec"], e.get("note", "")) for e in c.get("entries", ())))
            for c in data["categories"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed guide: {exc}") from None
    return Guide(cats)


def load_guide(path: str | Path) -> Guide:
    try:
        return parse_guide(json.loads(Path(path).read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read guide {path}: {exc}") from None


@lru_cache(maxsize=1)
def default_guide() -> Guide:
    text = resources.files("specforge.data").joinpath("prompt/guide.json").read_text(encoding="utf-8")
    return parse_guide(json.loads(text)).validate()


def _indent(text: str, prefix: str) -> list[str]:
    return [prefix + ln if ln else ln for ln in text.splitlines()]


def render_category(c: GuideCategory) -> str:
    lines = [f"## {c.id}. {c.title}"]
    if c.summary:
        lines.append(c.summary)
    for e in c.entries:
        lines.append("")
        lines.append("C:")
        lines += _indent(e.source, "    ")
        lines.append("Spec:")
        lines += _indent(e.spec, "    ")
        if e.note:
            lines.append(f"Note: {e.note}")
    return "\n".join(lines) + "\n"


def render_guide(guide: Guide, tiers: Iterable[str] | None = None) -> str:
    """Categories in id order, optionally restricted to some tiers."""
    keep = None if tiers is None else set(tiers)
    if keep is not None and not keep <= set(TIERS):
        raise ValueError(f"unknown tier(s): {sorted(keep - set(TIERS))}")
    cats = [c for c in sorted(guide.categories, key=lambda c: c.id) if keep is None or c.tier in keep]
    return "\n".join(render_category(c) for c in cats)
