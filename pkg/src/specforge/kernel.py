"""Miniature kernel state: configuration, constants, schema and value semantics.

The state is a flat tuple of word-sized cells.  :class:`Layout` maps field
paths such as ``procs[2].offs[1]`` onto cell offsets, so the same layout
drives concrete evaluation, random sampling and SMT symbol naming.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Iterator, Sequence

from .errors import ConfigError, DomainError, UnknownConstant

CONFIG_KEYS = ("word_width", "nproc", "npage", "nofile", "page_words", "page_size", "pte_addr_shift")


@dataclass(frozen=True)
class KernelConfig:
    word_width: int = 64
    NPROC: int = 4
    NPAGE: int = 4
    NOFILE: int = 4
    PAGE_WORDS: int = 4
    PAGE_SIZE: int = 4096
    PTE_ADDR_SHIFT: int = 12

    def __post_init__(self):
        if self.word_width < 4:
            raise ConfigError("word_width must be at least 4")
        limit = 1 << self.word_width
        for name in ("NPROC", "NPAGE", "NOFILE", "PAGE_WORDS"):
            n = getattr(self, name)
            if n < 2 or n >= limit:
                raise ConfigError(f"{name}={n} must be >= 2 and fit in {self.word_width} bits")
        if self.PAGE_SIZE <= 0 or self.PAGE_SIZE & (self.PAGE_SIZE - 1) or self.PAGE_SIZE >= limit:
            raise ConfigError(f"PAGE_SIZE={self.PAGE_SIZE} must be a power of two")
        if not 0 <= self.PTE_ADDR_SHIFT < self.word_width:
            raise ConfigError("PTE_ADDR_SHIFT out of range")

    @property
    def mask(self) -> int:
        return (1 << self.word_width) - 1


def parse_config(text: str) -> KernelConfig:
    """Parse ``key = value`` lines (``#`` comments allowed)."""
    values: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":"
        if sep not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (p.strip() for p in line.split(sep, 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = int(value, 0)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} is not an integer") from None
    kwargs = {k if k == "word_width" else k.upper(): v for k, v in values.items()}
    return KernelConfig(**kwargs)


def load_config(path: str | Path | None) -> KernelConfig:
    if path is None:
        return KernelConfig()
    try:
        return parse_config(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


# --------------------------------------------------------------------------
# constants

PROC_STATES = {"PROC_UNUSED": 0, "PROC_EMBRYO": 1, "PROC_RUNNABLE": 2, "PROC_RUNNING": 3}
PAGE_TYPES = {"PAGE_TYPE_FREE": 0, "PAGE_TYPE_FRAME": 1, "PAGE_TYPE_X86_PT": 2, "PAGE_TYPE_IOMMU_PT": 3}
ERRNO = {"EPERM": 1, "ESRCH": 3, "EBADF": 9, "EAGAIN": 11, "ENOMEM": 12, "EACCES": 13, "EBUSY": 16, "EINVAL": 22}
TYPE_NAMES = ("pid_t", "pn_t", "fd_t", "size_t", "off_t", "uint64_t")


@dataclass(frozen=True)
class Constant:
    name: str
    value: int
    # enum members are word-typed; plain scalars behave like unsized ints
    typed: bool


class ConstantTable:
    """Named constants under the ``dt`` namespace.

    Keys are dotted paths relative to ``dt`` (``NPROC``,
    ``proc_state.PROC_RUNNING``).
    """

    def __init__(self, config: KernelConfig):
        self.config = config
        entries: dict[str, Constant] = {}

        def add(name, value, typed=False):
            entries[name] = Constant(name, value, typed)

        for name in ("NPROC", "NPAGE", "NOFILE", "PAGE_WORDS", "PAGE_SIZE", "PTE_ADDR_SHIFT"):
            add(name, getattr(config, name))
        add("DMAR_PTE_ADDR_SHIFT", config.PTE_ADDR_SHIFT)
        add("PTE_P", 1)
        add("PTE_W", 2)
        for t in TYPE_NAMES:
            add(t, config.word_width)
        for k, v in PROC_STATES.items():
            add(f"proc_state.{k}", v, typed=True)
        for k, v in PAGE_TYPES.items():
            add(f"page_type.{k}", v, typed=True)
        for k, v in ERRNO.items():
            add(f"errno.{k}", v)
        self.entries = entries

    def __contains__(self, name: str) -> bool:
        return _strip_dt(name) in self.entries

    def get(self, name: str) -> Constant:
        try:
            return self.entries[_strip_dt(name)]
        except KeyError:
            raise UnknownConstant(f"unknown constant dt.{_strip_dt(name)}") from None

    def families(self) -> set[str]:
        return {k.split(".")[0] for k in self.entries if "." in k}

    def flat(self) -> dict[str, int]:
        """Bare C-style names (``PROC_EMBRYO``, ``ESRCH``, ``NPROC``)."""
        return {k.rsplit(".", 1)[-1]: c.value for k, c in self.entries.items()}


def _strip_dt(name: str) -> str:
    return name[3:] if name.startswith("dt.") else name


@lru_cache(maxsize=None)
def constant_table(config: KernelConfig) -> ConstantTable:
    return ConstantTable(config)


def lookup_constant(table: ConstantTable, name: str) -> int:
    return table.get(name).value


# --------------------------------------------------------------------------
# schema

# name -> (signed in C, ) ; maps: name -> domain attribute on config
SCALARS = {"current": True, "pages_ptr_to_int": False}
TABLES = {
    "procs": ("NPROC", {"state": False, "ppid": True, "ipc_from": True, "nr_pages": False}, {"offs": ("NOFILE", True)}),
    "pages": ("NPAGE", {"type": False, "owner": True, "refcnt": False}, {"data": ("PAGE_WORDS", False)}),
}


@dataclass(frozen=True)
class FieldPath:
    """Names a family of cells: ``current``, ``procs[].state``, ``pages[].data[]``.

    ``table`` and ``sub`` are None for global scalars; ``sub`` is set for inner
    maps.  The number of indices a path needs is :attr:`arity`.
    """

    field: str
    table: str | None = None
    is_map: bool = False

    @classmethod
    def parse(cls, text: str) -> "FieldPath":
        parts = text.replace("[]", "").split(".")
        if len(parts) == 1:
            fp = cls(parts[0])
        elif len(parts) == 2:
            table, name = parts
            maps = TABLES.get(table, (None, {}, {}))[2]
            fp = cls(name, table, name in maps)
        else:
            raise DomainError(f"bad field path {text!r}")
        fp.check()
        return fp

    @property
    def arity(self) -> int:
        return (self.table is not None) + self.is_map

    def check(self) -> None:
        if self.table is None:
            if self.field not in SCALARS:
                raise DomainError(f"unknown state field {self.field!r}")
            return
        if self.table not in TABLES:
            raise DomainError(f"unknown state table {self.table!r}")
        _, scalars, maps = TABLES[self.table]
        if self.is_map and self.field not in maps or not self.is_map and self.field not in scalars:
            raise DomainError(f"unknown field {self.table}[].{self.field}{'[]' if self.is_map else ''}")

    def signed(self) -> bool:
        if self.table is None:
            return SCALARS[self.field]
        _, scalars, maps = TABLES[self.table]
        return maps[self.field][1] if self.is_map else scalars[self.field]

    def __str__(self) -> str:
        if self.table is None:
            return self.field
        return f"{self.table}[].{self.field}" + ("[]" if self.is_map else "")


def field_paths() -> list[FieldPath]:
    out = [FieldPath(s) for s in SCALARS]
    for table, (_, scalars, maps) in TABLES.items():
        out += [FieldPath(f, table) for f in scalars]
        out += [FieldPath(f, table, True) for f in maps]
    return out


class Layout:
    """Cell offsets for one configuration."""

    def __init__(self, config: KernelConfig):
        self.config = config
        self.offsets: dict[FieldPath, tuple[int, tuple[int, ...], tuple[int, ...]]] = {}
        names: list[str] = []
        off = 0
        for s in SCALARS:
            self.offsets[FieldPath(s)] = (off, (), ())
            names.append(s)
            off += 1
        for table, (dom_attr, scalars, maps) in TABLES.items():
            n = getattr(config, dom_attr)
            rec = len(scalars) + sum(getattr(config, d) for d, _ in maps.values())
            base = off
            inner = 0
            for f in scalars:
                self.offsets[FieldPath(f, table)] = (base + inner, (n,), (rec,))
                inner += 1
            for f, (d, _) in maps.items():
                m = getattr(config, d)
                self.offsets[FieldPath(f, table, True)] = (base + inner, (n, m), (rec, 1))
                inner += m
            for i in range(n):
                for f in scalars:
                    names.append(f"{table}_{i}_{f}")
                for f, (d, _) in maps.items():
                    names += [f"{table}_{i}_{f}_{j}" for j in range(getattr(config, d))]
            off += n * rec
        self.size = off
        self.names = tuple(names)

    def domains(self, path: FieldPath) -> tuple[int, ...]:
        return self.offsets[path][1]

    def offset(self, path: FieldPath, indices: Sequence[int]) -> int | None:
        """Cell offset, or None when an index is out of domain."""
        base, doms, strides = self.offsets[path]
        if len(indices) != len(doms):
            raise DomainError(f"{path} needs {len(doms)} indices, got {len(indices)}")
        for i, d, s in zip(indices, doms, strides):
            if not 0 <= i < d:
                return None
            base += i * s
        return base

    def cells(self, path: FieldPath) -> Iterator[tuple[tuple[int, ...], int]]:
        """All (indices, offset) pairs of a field path."""
        base, doms, strides = self.offsets[path]
        if not doms:
            yield (), base
        elif len(doms) == 1:
            for i in range(doms[0]):
                yield (i,), base + i * strides[0]
        else:
            for i in range(doms[0]):
                for j in range(doms[1]):
                    yield (i, j), base + i * strides[0] + j * strides[1]


@lru_cache(maxsize=None)
def layout(config: KernelConfig) -> Layout:
    return Layout(config)


# --------------------------------------------------------------------------
# state


@dataclass(frozen=True)
class KernelState:
    config: KernelConfig
    cells: tuple[int, ...] = field(repr=False)

    @cached_property
    def layout(self) -> Layout:
        return layout(self.config)

    def read(self, path: str | FieldPath, *indices: int) -> int:
        return read_field(self, path, list(indices))

    def to_dict(self) -> dict:
        lay = self.layout
        c = self.cells
        out: dict = {}
        for s in SCALARS:
            out[s] = c[lay.offset(FieldPath(s), ())]
        for table, (dom_attr, scalars, maps) in TABLES.items():
            rows = []
            for i in range(getattr(self.config, dom_attr)):
                row = {f: c[lay.offset(FieldPath(f, table), (i,))] for f in scalars}
                for f, (d, _) in maps.items():
                    fp = FieldPath(f, table, True)
                    row[f] = [c[lay.offset(fp, (i, j))] for j in range(getattr(self.config, d))]
                rows.append(row)
            out[table] = rows
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, config: KernelConfig, data: dict) -> "KernelState":
        lay = layout(config)
        cells = [0] * lay.size
        for s in SCALARS:
            cells[lay.offset(FieldPath(s), ())] = data[s]
        for table, (_, scalars, maps) in TABLES.items():
            for i, row in enumerate(data[table]):
                for f in scalars:
                    cells[lay.offset(FieldPath(f, table), (i,))] = row[f]
                for f in maps:
                    for j, v in enumerate(row[f]):
                        cells[lay.offset(FieldPath(f, table, True), (i, j))] = v
        return cls(config, tuple(v & config.mask for v in cells))

    def diff(self, other: "KernelState") -> list[str]:
        """Names of the cells where two states differ."""
        return [n for n, a, b in zip(self.layout.names, self.cells, other.cells) if a != b]


def zero_state(config: KernelConfig) -> KernelState:
    return KernelState(config, (0,) * layout(config).size)


def canonical_state(config: KernelConfig | None = None) -> KernelState:
    """The fixture S0: current=1, procs[2] is an embryo child of pid 1."""
    config = config or KernelConfig()
    lay = layout(config)
    cells = [0] * lay.size
    cells[lay.offset(FieldPath("current"), ())] = 1
    cells[lay.offset(FieldPath("pages_ptr_to_int"), ())] = 0x1000
    cells[lay.offset(FieldPath("state", "procs"), (2,))] = PROC_STATES["PROC_EMBRYO"]
    cells[lay.offset(FieldPath("ppid", "procs"), (2,))] = 1
    return KernelState(config, tuple(cells))


def copy_state(s: KernelState) -> KernelState:
    return KernelState(s.config, tuple(s.cells))


def _resolve(s: KernelState, path: str | FieldPath, indices: Sequence[int]) -> int:
    fp = FieldPath.parse(path) if isinstance(path, str) else path
    off = s.layout.offset(fp, list(indices))
    if off is None:
        raise DomainError(f"index {list(indices)} out of domain for {fp}")
    return off


def read_field(s: KernelState, path: str | FieldPath, indices: Sequence[int] = ()) -> int:
    return s.cells[_resolve(s, path, indices)]


def write_field(s: KernelState, path: str | FieldPath, indices: Sequence[int], v: int) -> KernelState:
    if not 0 <= v <= s.config.mask:
        raise DomainError(f"value {v:#x} does not fit in {s.config.word_width} bits")
    off = _resolve(s, path, indices)
    cells = list(s.cells)
    cells[off] = v
    return KernelState(s.config, tuple(cells))
