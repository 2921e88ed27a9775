"""The API inventory: which functions a specification may call."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path

KINDS = {"and", "or", "not", "implies", "cmp", "bvop", "bitvecval", "if", "macro"}


class Inventory:
    """Immutable name -> entry mapping loaded from JSON data."""

    def __init__(self, entries: dict[str, dict]):
        for name, e in entries.items():
            if e.get("kind") not in KINDS:
                raise ValueError(f"inventory entry {name!r} has bad kind {e.get('kind')!r}")
        self._entries = {k: dict(v) for k, v in sorted(entries.items())}
        self._key = json.dumps(self._entries, sort_keys=True)

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def __getitem__(self, name: str) -> dict:
        return self._entries[name]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, Inventory) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def without(self, *names: str) -> "Inventory":
        return Inventory({k: v for k, v in self._entries.items() if k not in names})

    def with_entry(self, name: str, entry: dict) -> "Inventory":
        return Inventory({**self._entries, name: entry})

    def to_json(self) -> str:
        return json.dumps(self._entries, indent=2, sort_keys=True)


def load_inventory(path: str | Path | None = None) -> Inventory:
    if path is None:
        return default_inventory()
    return Inventory(json.loads(Path(path).read_text()))


@lru_cache(maxsize=1)
def default_inventory() -> Inventory:
    text = resources.files("specforge.data").joinpath("inventory.json").read_text()
    return Inventory(json.loads(text))
