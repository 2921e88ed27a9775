"""Syscall corpus loading, seeded bug injection and benchmark generation."""

from __future__ import annotations

import hashlib
import json
import random
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .cfront import default_helper_lib, frontend
from .errors import ConfigError, NotApplicable
from .kernel import KernelConfig
from .speclang import lint_spec, parse_spec
from .symex import ImplBehavior, execute
from .verifier import COUNTEREXAMPLE, VERIFIED, check_equiv
from .verifier.smt import SolverConfig

BUG_CLASSES = ("IncorrectPointerOp", "IncorrectPrivilegeCheck", "MemoryLeak", "BufferOverflow",
               "MissingBoundsCheck")
CORRECT = "Correct"
CATEGORIES = ("IPC", "IOMMU", "page-mapping", "page-reclaim", "file", "process")


class GenerationError(Exception):
    """A generated variant failed validation against the oracle spec."""


@dataclass(frozen=True)
class Site:
    action: str  # "delete" | "replace"
    anchor: str
    replacement: str = ""

    def apply(self, text: str) -> str:
        if self.action == "replace":
            if text.count(self.anchor) != 1:
                raise ConfigError(f"replace anchor {self.anchor!r} must occur exactly once")
            return text.replace(self.anchor, self.replacement)
        return _delete_check(text, self.anchor)


def _delete_check(text: str, anchor: str) -> str:
    """Remove the ``if (...) return -E;`` statement whose condition contains ``anchor``."""
    lines = text.splitlines(keepends=True)
    hits = [i for i, ln in enumerate(lines) if anchor in ln]
    if len(hits) != 1:
        raise ConfigError(f"delete anchor {anchor!r} must occur on exactly one line")
    i = hits[0]
    line = lines[i].strip()
    if line.startswith("if") and "return" not in line:
        # body on the next line
        if i + 1 >= len(lines) or not lines[i + 1].strip().startswith("return"):
            raise ConfigError(f"delete anchor {anchor!r} is not a single-statement check")
        del lines[i:i + 2]
    else:
        del lines[i]
    return "".join(lines)


@dataclass(frozen=True)
class SyscallDef:
    name: str
    category: str
    params: tuple[tuple[str, str], ...]
    impl_c: str
    spec_py: str
    description: str
    sites: tuple[tuple[str, tuple[Site, ...]], ...] = ()

    def sites_for(self, cls: str) -> tuple[Site, ...]:
        return dict(self.sites).get(cls, ())


_SITE_RE = re.compile(r"(delete|replace):\s*(.*)$")


def parse_sites(text: str) -> tuple[str, dict[str, list[Site]]]:
    """Parse ``key = value`` lines; bug-class keys may repeat."""
    category = ""
    sites: dict[str, list[Site]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = (p.strip() for p in line.partition("="))
        if not sep:
            raise ConfigError(f"sites line {lineno}: expected key = value")
        if key == "category":
            if value not in CATEGORIES:
                raise ConfigError(f"sites line {lineno}: unknown category {value!r}")
            category = value
            continue
        if key not in BUG_CLASSES:
            raise ConfigError(f"sites line {lineno}: unknown bug class {key!r}")
        m = _SITE_RE.match(value)
        if not m:
            raise ConfigError(f"sites line {lineno}: expected 'delete: ...' or 'replace: old => new'")
        action, rest = m.groups()
        if action == "replace":
            old, arrow, new = rest.partition(" => ")
            if not arrow:
                raise ConfigError(f"sites line {lineno}: replace needs 'old => new'")
            site = Site("replace", old, new)
        else:
            site = Site("delete", rest)
        sites.setdefault(key, []).append(site)
    if not category:
        raise ConfigError("sites file has no category")
    return category, sites


def load_syscall(path: str | Path | resources.abc.Traversable) -> SyscallDef:
    d = Path(str(path)) if not hasattr(path, "joinpath") else path
    impl_c = d.joinpath("impl.c").read_text(encoding="utf-8")
    spec_py = d.joinpath("spec.py").read_text(encoding="utf-8")
    desc = d.joinpath("desc.txt").read_text(encoding="utf-8").strip()
    category, sites = parse_sites(d.joinpath("sites.kv").read_text(encoding="utf-8"))
    ir = frontend(impl_c)
    return SyscallDef(ir.name, category, ir.params, impl_c, spec_py, desc,
                      tuple((c, tuple(sites[c])) for c in BUG_CLASSES if c in sites))


CORPUS_ORDER = ("sys_set_runnable", "sys_alloc_page", "sys_reclaim_page", "sys_map_page",
                "sys_alloc_iommu_pt", "call_proc", "send_proc", "sys_lseek", "sys_dup", "sys_set_ipc_from")


def load_corpus(root: str | Path | None = None) -> list[SyscallDef]:
    """Load every syscall directory; the shipped corpus keeps its fixed order."""
    base = resources.files("specforge.data").joinpath("corpus") if root is None else Path(root)
    names = sorted(p.name for p in base.iterdir() if p.is_dir() and p.joinpath("impl.c").is_file())
    ranked = [n for n in CORPUS_ORDER if n in names] + [n for n in names if n not in CORPUS_ORDER]
    return [load_syscall(base.joinpath(n)) for n in ranked]


def inject_bug(d: SyscallDef, cls: str, seed: int = 1) -> str:
    """Variant C text for ``cls``; raises NotApplicable when there is no site."""
    if cls not in BUG_CLASSES:
        raise ValueError(f"unknown bug class {cls!r}")
    sites = d.sites_for(cls)
    if not sites:
        raise NotApplicable(f"{d.name} has no {cls} site")
    site = sites[0] if len(sites) == 1 else random.Random(f"{seed}/{d.name}/{cls}").choice(sites)
    return site.apply(d.impl_c)


@dataclass(frozen=True)
class Task:
    id: str
    syscall: str
    category: str
    variant: str
    impl_c: str
    description: str

    def record(self, impl_path: str) -> dict:
        return {"id": self.id, "syscall": self.syscall, "category": self.category, "variant": self.variant,
                "impl_path": impl_path, "description": self.description}


@dataclass
class Benchmark:
    tasks: list[Task]
    corpus: list[SyscallDef]
    config: KernelConfig = field(default_factory=KernelConfig)

    def syscall(self, name: str) -> SyscallDef:
        return next(d for d in self.corpus if d.name == name)

    def variants(self, name: str) -> list[Task]:
        return [t for t in self.tasks if t.syscall == name]


def behavior_of(c_text: str, config: KernelConfig) -> ImplBehavior:
    return execute(frontend(c_text, config, default_helper_lib()), config)


def build_benchmark(corpus: Sequence[SyscallDef], config: KernelConfig | None = None, seed: int = 1,
                    solver: SolverConfig = SolverConfig(), validate: bool = True) -> Benchmark:
    """One Correct task per syscall plus one per applicable bug class.

    With ``validate`` each task is checked against its oracle spec: the
    Correct task must verify and every injected variant must diverge.
    """
    config = config or KernelConfig()
    tasks: list[Task] = []
    for d in corpus:
        variants = [(CORRECT, d.impl_c)]
        for cls in BUG_CLASSES:
            try:
                variants.append((cls, inject_bug(d, cls, seed)))
            except NotApplicable:
                pass
        oracle = parse_spec(d.spec_py) if validate else None
        if oracle is not None and lint_spec(oracle):
            raise GenerationError(f"{d.name}: oracle spec does not lint clean")
        for variant, text in variants:
            if oracle is not None:
                want = VERIFIED if variant == CORRECT else COUNTEREXAMPLE
                got = check_equiv(behavior_of(text, config), oracle, solver=solver).verdict
                if got != want:
                    raise GenerationError(f"{d.name}/{variant}: expected {want} against the oracle, got {got}")
            tasks.append(Task(f"{d.name}.{variant}", d.name, d.category, variant, text, d.description))
    return Benchmark(tasks, list(corpus), config)


def write_tasks(bench: Benchmark, outdir: str | Path) -> Path:
    """Write ``tasks.jsonl`` plus one C file per task; returns the JSONL path."""
    out = Path(outdir)
    (out / "impls").mkdir(parents=True, exist_ok=True)
    lines = []
    for t in bench.tasks:
        rel = f"impls/{t.id}.c"
        (out / rel).write_text(t.impl_c, encoding="utf-8")
        lines.append(json.dumps(t.record(rel), sort_keys=True))
    path = out / "tasks.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_tasks(path: str | Path) -> list[Task]:
    path = Path(path)
    tasks = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            r = json.loads(line)
            impl = (path.parent / r["impl_path"]).read_text(encoding="utf-8")
            tasks.append(Task(r["id"], r["syscall"], r["category"], r["variant"], impl, r["description"]))
    return tasks


def task_counts(tasks: Iterable[Task]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for t in tasks:
        counts[t.variant] = counts.get(t.variant, 0) + 1
    return counts


def taskset_hash(tasks: Iterable[Task]) -> str:
    """Content hash of a task set (records and implementation texts)."""
    h = hashlib.sha256()
    for t in tasks:
        h.update(json.dumps([t.id, t.syscall, t.category, t.variant, t.description, t.impl_c]).encode())
        h.update(b"\n")
    return h.hexdigest()
