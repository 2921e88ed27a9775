"""End-to-end evaluation: tasks to prompts, completions, verdicts and records."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from ..errors import FormatError, InfrastructureError, ProviderError, SpecFault
from ..promptkit import (Example, ModelConfig, PromptComponents, Provider, TargetTask, assemble_prompt,
                         extract_spec_block, load_components, make_provider, render_guide)
from ..speclang import lint_spec, parse_spec
from ..symex import ImplBehavior
from ..taskgen import BUG_CLASSES, CORRECT, Benchmark, Task, behavior_of, taskset_hash
from ..verifier import TaskVerdict, Verifier, judge_task, oracle_pattern
from .classify import INFRA, SEMANTIC, SUBCLASSES, SYNTAX, FailureClass, classify_failure
from .metrics import pass_at_1, percent

METHODS = ("baseline", "bodhi")


@dataclass(frozen=True)
class TaskRecord:
    task_id: str
    syscall: str
    category: str
    variant: str
    method: str
    model: str
    spec_text: str | None
    passed: bool
    outcomes: tuple[tuple[str, str], ...] = ()
    failure: FailureClass | None = None
    detail: str = ""
    lint: tuple[int, ...] = ()
    artifacts: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.passed == (self.failure is not None):
            raise ValueError(f"{self.task_id}: pass xor failure class")

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id, "syscall": self.syscall, "category": self.category, "variant": self.variant,
            "method": self.method, "model": self.model, "spec_text": self.spec_text, "pass": self.passed,
            "outcomes": [list(o) for o in self.outcomes],
            "failure": self.failure.to_dict() if self.failure else None, "detail": self.detail,
            "lint": list(self.lint), "artifacts": dict(self.artifacts),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TaskRecord":
        return cls(d["task_id"], d["syscall"], d["category"], d["variant"], d["method"], d["model"], d["spec_text"],
                   d["pass"], tuple(tuple(o) for o in d["outcomes"]),
                   FailureClass.from_dict(d["failure"]) if d["failure"] else None, d["detail"], tuple(d["lint"]),
                   tuple(sorted(d["artifacts"].items())))


def _tally(records: Sequence[TaskRecord]) -> dict:
    counted = [r for r in records if not (r.failure and r.failure.top == INFRA)]
    passes = sum(r.passed for r in counted)
    p = pass_at_1(passes, len(counted))
    return {"passes": passes, "total": len(counted), "pass_at_1": str(p), "percent": percent(p)}


def aggregate(records: Sequence[TaskRecord]) -> dict:
    """Overall, per-variant and per-syscall Pass@1 plus the failure distribution."""
    variants = [v for v in BUG_CLASSES + (CORRECT,) if any(r.variant == v for r in records)]
    syscalls = list(dict.fromkeys(r.syscall for r in records))
    failures: dict = {}
    for top, subs in SUBCLASSES.items():
        failures[top] = {s: 0 for s in subs} if subs else 0
    buckets = {"pass": 0, "syntax": 0, "semantic": 0, "infrastructure": 0}
    for r in records:
        if r.passed:
            buckets["pass"] += 1
            continue
        f = r.failure
        if f.sub:
            failures[f.top][f.sub] += 1
        else:
            failures[f.top] += 1
        buckets[{SYNTAX: "syntax", SEMANTIC: "semantic", INFRA: "infrastructure"}[f.bucket]] += 1
    return {
        "overall": _tally(records),
        "by_variant": {v: _tally([r for r in records if r.variant == v]) for v in variants},
        "by_syscall": {s: _tally([r for r in records if r.syscall == s]) for s in syscalls},
        "failures": failures,
        "buckets": buckets,
    }


@dataclass(frozen=True)
class EvalReport:
    manifest: dict
    records: tuple[TaskRecord, ...]

    @property
    def aggregates(self) -> dict:
        return aggregate(self.records)

    @property
    def pass_at_1(self) -> Fraction:
        a = self.aggregates["overall"]
        return pass_at_1(a["passes"], a["total"])

    def to_dict(self) -> dict:
        return {"manifest": self.manifest, "aggregates": self.aggregates,
                "records": [r.to_dict() for r in self.records]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        rep = cls(d["manifest"], tuple(TaskRecord.from_dict(r) for r in d["records"]))
        if "aggregates" in d and d["aggregates"] != rep.aggregates:
            raise ValueError("stored aggregates do not match the records")
        return rep

    @classmethod
    def load(cls, path: str | Path) -> "EvalReport":
        p = Path(path)
        if p.is_dir():
            p = p / "report.json"
        return cls.from_dict(json.loads(p.read_text(encoding="utf-8")))


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


# --------------------------------------------------------------------------
# runner


@dataclass
class EvalContext:
    """Everything a run needs that is shared across tasks."""

    bench: Benchmark
    components: PromptComponents
    behaviors: dict[str, dict[str, ImplBehavior]] = field(default_factory=dict)

    @classmethod
    def build(cls, bench: Benchmark, prompt_dir: str | Path | None = None) -> "EvalContext":
        examples = [Example(d.name, d.description, d.impl_c, d.spec_py) for d in bench.corpus]
        ctx = cls(bench, load_components(examples, prompt_dir))
        for t in bench.tasks:
            ctx.behaviors.setdefault(t.syscall, {})[t.variant] = behavior_of(t.impl_c, bench.config)
        return ctx

    def oracle_spec(self, task_id: str) -> str:
        t = next(t for t in self.bench.tasks if t.id == task_id)
        return self.bench.syscall(t.syscall).spec_py


def run_digest(manifest: dict) -> str:
    return hashlib.sha256(json.dumps(manifest, sort_keys=True).encode()).hexdigest()[:12]


def run_eval(ctx: EvalContext, model: ModelConfig, method: str, *, model_id: str | None = None,
             provider: Provider | None = None, verifier: Verifier | None = None, jobs: int = 1,
             seed: int = 42, run_root: str | Path | None = None, partial: bool = False,
             single_variant: bool = False, k_shot: int = 2, tasks: Sequence[Task] | None = None) -> EvalReport:
    """Evaluate every task once.

    A provider or solver failure aborts the run unless ``partial`` is set, in
    which case the task is recorded as an infrastructure failure and left out
    of the Pass@1 denominator. With ``run_root`` all prompts, completions,
    verdicts (with witnesses) and SMT scripts are written under a
    content-addressed run directory.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    tasks = list(ctx.bench.tasks if tasks is None else tasks)
    model_id = model_id or model.model
    verifier = verifier or Verifier(seed=seed)
    manifest = {
        "model_id": model_id, "model": model.manifest(), "method": method, "seed": seed,
        "taskset": taskset_hash(tasks), "tasks": len(tasks), "backend": verifier.backend,
        "criterion": "single-variant" if single_variant else "all-variants", "k_shot": k_shot,
        "guide": hashlib.sha256(render_guide(ctx.components.guide).encode()).hexdigest()[:16],
        "partial": partial,
    }
    run_dir = None
    if run_root is not None:
        run_dir = Path(run_root) / f"{method}-{model_id}-{run_digest(manifest)}"
        run_dir.mkdir(parents=True, exist_ok=True)
        verifier = dataclasses.replace(verifier, solver=dataclasses.replace(verifier.solver, workdir=run_dir / "smt"))
    provider = provider or make_provider(model, ctx.oracle_spec)
    patterns = {s: oracle_pattern([t.variant for t in ctx.bench.variants(s)]) for s in ctx.behaviors}

    def one(task: Task) -> tuple[TaskRecord, float]:
        start = time.perf_counter()
        rec = _evaluate(task, ctx, method, model_id, provider, verifier, patterns[task.syscall],
                        single_variant, k_shot, partial, run_dir)
        return rec, time.perf_counter() - start

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, tasks))
    else:
        results = [one(t) for t in tasks]
    report = EvalReport(manifest, tuple(r for r, _ in results))
    if run_dir is not None:
        atomic_write(run_dir / "report.json", report.to_json())
        timings = {r.task_id: round(dt, 6) for r, dt in results}
        atomic_write(run_dir / "timings.json", json.dumps(timings, indent=2, sort_keys=True) + "\n")
    return report


def _evaluate(task: Task, ctx: EvalContext, method: str, model_id: str, provider: Provider, verifier: Verifier,
              pattern, single_variant: bool, k_shot: int, partial: bool, run_dir: Path | None) -> TaskRecord:
    base = dict(task_id=task.id, syscall=task.syscall, category=task.category, variant=task.variant,
                method=method, model=model_id)
    arts: dict[str, str] = {}

    def save(kind: str, ext: str, text: str) -> None:
        if run_dir is not None:
            rel = f"{kind}/{task.id}.{ext}"
            atomic_write(run_dir / rel, text)
            arts[kind] = rel

    def infra(msg: str, spec_text=None) -> TaskRecord:
        return TaskRecord(**base, spec_text=spec_text, passed=False, failure=classify_failure(infrastructure=True),
                          detail=msg, artifacts=tuple(sorted(arts.items())))

    target = TargetTask(task.id, task.syscall, task.description, task.impl_c)
    bundle = assemble_prompt(target, ctx.components, method == "bodhi", k_shot)
    save("prompts", "txt", bundle.text)
    try:
        completion = provider.complete(bundle, task.id)
    except ProviderError as exc:
        if not partial:
            raise
        return infra(f"provider: {exc}")
    save("completions", "txt", completion.text)
    try:
        spec_text = extract_spec_block(completion.text)
    except FormatError as exc:
        return TaskRecord(**base, spec_text=None, passed=False, failure=classify_failure(format_failed=True),
                          detail=str(exc), artifacts=tuple(sorted(arts.items())))
    lint: tuple[int, ...] = ()
    try:
        lint = tuple(sorted({f.category for f in lint_spec(parse_spec(spec_text))}))
    except SpecFault:
        pass
    try:
        verdict: TaskVerdict = judge_task(task.id, spec_text, ctx.behaviors[task.syscall], pattern, verifier,
                                          only=task.variant if single_variant else None)
    except InfrastructureError as exc:
        if not partial:
            raise
        return infra(f"solver: {exc}", spec_text)
    save("verdicts", "json", json.dumps(verdict.to_dict(details=True), indent=2, sort_keys=True) + "\n")
    failure = None
    detail = ""
    if not verdict.passed:
        if verdict.fault is not None:
            failure = classify_failure(fault_kind=verdict.fault.kind)
            detail = str(verdict.fault)
        else:
            failure = classify_failure(category=task.category)
            detail = ", ".join(f"{v}: {got}" for v, got in verdict.outcomes)
    return TaskRecord(**base, spec_text=spec_text, passed=verdict.passed, outcomes=verdict.outcomes,
                      failure=failure, detail=detail, lint=lint, artifacts=tuple(sorted(arts.items())))


__all__ = ["EvalContext", "EvalReport", "METHODS", "TaskRecord", "aggregate", "atomic_write", "run_eval"]
