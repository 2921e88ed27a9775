"""Report rendering (json, csv, md) and run-to-run comparison."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

from ..taskgen import BUG_CLASSES, CORRECT
from .metrics import pass_at_1, percent, signed_percent
from .run import EvalReport

FORMATS = ("json", "csv", "md")
COLUMNS = BUG_CLASSES + (CORRECT,)
CSV_FIELDS = ("task_id", "syscall", "category", "variant", "method", "model", "pass", "failure", "outcomes", "lint",
              "detail")


def _frac(tally: dict) -> Fraction:
    return pass_at_1(tally["passes"], tally["total"])


def _cells(report: EvalReport) -> dict[str, Fraction | None]:
    agg = report.aggregates
    out: dict[str, Fraction | None] = {c: (_frac(agg["by_variant"][c]) if c in agg["by_variant"] else None)
                                       for c in COLUMNS}
    out["Total"] = _frac(agg["overall"])
    return out


def _label(report: EvalReport) -> str:
    m = report.manifest
    return f"{m.get('model_id', '?')} ({m.get('method', '?')})"


def _row(cells) -> str:
    return "| " + " | ".join(cells) + " |"


def render_md(report: EvalReport, other: EvalReport | None = None) -> str:
    """Markdown tables; with ``other`` (the baseline) a delta row is added."""
    heads = list(COLUMNS) + ["Total"]
    reports = [other, report] if other is not None else [report]
    lines = ["# Pass@1 (%)", "", _row(["Run"] + heads), _row(["---"] * (len(heads) + 1))]
    table = [_cells(r) for r in reports]
    for r, cells in zip(reports, table):
        lines.append(_row([_label(r)] + ["-" if cells[h] is None else percent(cells[h]) for h in heads]))
    if other is not None:
        a, b = table
        lines.append(_row(["Delta"] + ["-" if a[h] is None or b[h] is None else signed_percent(b[h] - a[h])
                                       for h in heads]))
    lines += ["", "## Per syscall", ""]
    if other is None:
        lines += [_row(["Syscall", "Passed", "Pass@1"]), _row(["---"] * 3)]
        for s, t in report.aggregates["by_syscall"].items():
            lines.append(_row([s, f"{t['passes']}/{t['total']}", percent(_frac(t))]))
    else:
        lines += [_row(["Syscall", "Before", "After", "Delta"]), _row(["---"] * 4)]
        for d in diff_runs(other, report).syscalls:
            lines.append(_row([d.syscall, f"{d.before}/{d.total}", f"{d.after}/{d.total}", f"{d.after - d.before:+d}"]))
    lines += ["", "## Failure classes", ""]
    for r in reports:
        lines.append(f"- {_label(r)}: " + _failure_line(r.aggregates))
    return "\n".join(lines) + "\n"


def _failure_line(agg: dict) -> str:
    parts = []
    for top, v in agg["failures"].items():
        if isinstance(v, dict):
            parts.append(f"{top} " + ", ".join(f"{k} {n}" for k, n in v.items()))
        else:
            parts.append(f"{top} {v}")
    b = agg["buckets"]
    return "; ".join(parts) + f" (pass {b['pass']}, syntax {b['syntax']}, semantic {b['semantic']})"


def render_csv(report: EvalReport) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in report.records:
        w.writerow({
            "task_id": r.task_id, "syscall": r.syscall, "category": r.category, "variant": r.variant,
            "method": r.method, "model": r.model, "pass": int(r.passed), "failure": str(r.failure or ""),
            "outcomes": ";".join(f"{v}={got}" for v, got in r.outcomes), "lint": " ".join(map(str, r.lint)),
            "detail": r.detail,
        })
    return buf.getvalue()


def render_report(report: EvalReport, fmt: str = "md", other: EvalReport | None = None) -> str:
    if fmt == "json":
        return report.to_json()
    if fmt == "csv":
        return render_csv(report)
    if fmt == "md":
        return render_md(report, other)
    raise ValueError(f"format must be one of {FORMATS}")


# --------------------------------------------------------------------------
# diffs


@dataclass(frozen=True)
class SyscallDiff:
    syscall: str
    total: int
    before: int
    after: int
    fixed: tuple[str, ...]
    regressed: tuple[str, ...]


@dataclass(frozen=True)
class RunDiff:
    syscalls: tuple[SyscallDiff, ...]

    @property
    def flips(self) -> list[tuple[str, str]]:
        out = []
        for d in self.syscalls:
            out += [(t, "fixed") for t in d.fixed] + [(t, "regressed") for t in d.regressed]
        return out

    def render(self) -> str:
        lines = [_row(["Syscall", "Before", "After", "Delta", "Fixed", "Regressed"]), _row(["---"] * 6)]
        for d in self.syscalls:
            lines.append(_row([d.syscall, f"{d.before}/{d.total}", f"{d.after}/{d.total}", f"{d.after - d.before:+d}",
                               " ".join(d.fixed) or "-", " ".join(d.regressed) or "-"]))
        return "\n".join(lines) + "\n"


def diff_runs(a: EvalReport, b: EvalReport) -> RunDiff:
    """Per-syscall pass counts of ``a`` (before) and ``b`` (after) with flipped tasks."""
    if a.manifest.get("taskset") != b.manifest.get("taskset"):
        raise ValueError("runs were made on different task sets")
    before = {r.task_id: r for r in a.records}
    after = {r.task_id: r for r in b.records}
    if before.keys() != after.keys():
        raise ValueError("runs cover different tasks")
    out = []
    for s in dict.fromkeys(r.syscall for r in a.records):
        ids = [r.task_id for r in a.records if r.syscall == s]
        out.append(SyscallDiff(
            s, len(ids), sum(before[i].passed for i in ids), sum(after[i].passed for i in ids),
            tuple(i for i in ids if after[i].passed and not before[i].passed),
            tuple(i for i in ids if before[i].passed and not after[i].passed)))
    return RunDiff(tuple(out))
