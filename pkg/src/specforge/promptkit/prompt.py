"""Prompt components and bundle assembly."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from ..errors import ConfigError
from .guide import Guide, default_guide, load_guide, render_guide

SEGMENTS = ("system", "programming_model", "few_shot", "guide", "target")
HEADERS = {
    "system": "System Prompt",
    "programming_model": "Programming Model",
    "few_shot": "Few-shot Examples",
    "guide": "Translation Guide",
    "target": "Target Task",
}
CHARS_PER_TOKEN = 4


@dataclass(frozen=True)
class Example:
    syscall: str
    description: str
    impl_c: str
    spec_py: str


@dataclass(frozen=True)
class PromptComponents:
    system: str
    programming_model: str
    examples: tuple[Example, ...]
    guide: Guide


@dataclass(frozen=True)
class TargetTask:
    id: str
    syscall: str
    description: str
    impl_c: str


@dataclass(frozen=True)
class PromptBundle:
    segments: tuple[tuple[str, str], ...]  # (segment name, rendered text) in fixed order

    @property
    def text(self) -> str:
        return "".join(t for _, t in self.segments)

    def segment(self, name: str) -> str | None:
        return dict(self.segments).get(name)

    def sizes(self) -> dict[str, dict[str, int]]:
        """Per-segment character counts and approximate token counts (chars/4)."""
        return {n: {"chars": len(t), "approx_tokens": -(-len(t) // CHARS_PER_TOKEN)} for n, t in self.segments}


def _read(base, name: str) -> str:
    try:
        return base.joinpath(name).read_text(encoding="utf-8")
    except (OSError, FileNotFoundError) as exc:
        raise ConfigError(f"missing prompt component {name}: {exc}") from None


def load_components(examples: Sequence[Example], prompt_dir: str | Path | None = None) -> PromptComponents:
    """Read system text, programming model and guide from ``prompt_dir`` (default: shipped)."""
    if prompt_dir is None:
        base = resources.files("specforge.data").joinpath("prompt")
        guide = default_guide()
    else:
        base = Path(prompt_dir)
        if not base.is_dir():
            raise ConfigError(f"prompt directory {base} does not exist")
        guide = load_guide(base / "guide.json")
    return PromptComponents(_read(base, "system.txt").strip(), _read(base, "programming_model.md").rstrip(),
                            tuple(examples), guide)


def select_examples(pool: Sequence[Example], target: str, k: int = 2) -> tuple[Example, ...]:
    """The first ``k`` pool entries other than the target syscall."""
    return tuple(e for e in pool if e.syscall != target)[:k]


def _segment(name: str, body: str) -> str:
    return f"# {HEADERS[name]}:\n{body}\n\n"


def strip_header(c_text: str) -> str:
    """Drop leading ``//`` comment lines (corpus bookkeeping, not part of the task)."""
    lines = c_text.splitlines()
    while lines and (lines[0].lstrip().startswith("//") or not lines[0].strip()):
        lines.pop(0)
    return "\n".join(lines)


def render_example(i: int, e: Example) -> str:
    return (f"Example {i}: {e.syscall}\n[Description]: {e.description}\n"
            f"[C Code]:\n```c\n{strip_header(e.impl_c).rstrip()}\n```\n"
            f"[Specification]:\n```python\n{e.spec_py.rstrip()}\n```\n")


def render_target(t: TargetTask) -> str:
    return (f"Given system call {t.syscall}.\n[Description]: {t.description}\n"
            f"[C Code]:\n```c\n{strip_header(t.impl_c).rstrip()}\n```\n[Specification]:")


def assemble_prompt(task: TargetTask, components: PromptComponents, include_guide: bool,
                    k_shot: int = 2) -> PromptBundle:
    """Segments in the fixed order; the guide sits between the examples and the target."""
    shots = select_examples(components.examples, task.syscall, k_shot)
    bodies = {
        "system": components.system,
        "programming_model": components.programming_model,
        "few_shot": "\n".join(render_example(i, e) for i, e in enumerate(shots, 1)).rstrip("\n"),
        "guide": render_guide(components.guide).rstrip("\n") if include_guide else None,
        "target": render_target(task),
    }
    return PromptBundle(tuple((n, _segment(n, bodies[n])) for n in SEGMENTS if bodies[n] is not None))
