"""Scripted completion schedules with a known fault mix."""

from __future__ import annotations

import json
import re
from pathlib import Path

from ..promptkit import fenced
from ..taskgen import Benchmark
from .classify import API_REFERENCE, DOMAIN_CATEGORIES, DOMAIN_PATTERN, TRANSLATION_LOGIC, TYPE_SORT

# one kind per task, cycling in task order
CYCLE = ("pass", "pass", "format", TYPE_SORT, API_REFERENCE, "semantic")
PROSE = "The specification follows from the error checks and the field updates described above.\n"


def _noop_spec(spec: str) -> str:
    """Keep the signature; accept everything and change nothing."""
    header = spec.splitlines()[0]
    return f"{header}\n    cond = True\n    new = old.copy()\n    return cond, util.If(cond, new, old)\n"


def _inject_guard(spec: str, conjunct: str) -> str:
    spec, n = re.subn(r"cond = z3\.And\(", f"cond = z3.And({conjunct}, ", spec, count=1)
    if not n:
        spec = re.sub(r"cond = (.*)", rf"cond = z3.And({conjunct}, \1)", spec, count=1)
    return spec


def response_for(kind: str, oracle: str) -> str:
    if kind == "pass":
        return "Translating each error check into the guard.\n\n" + fenced(oracle)
    if kind == "format":
        return PROSE
    if kind == TYPE_SORT:
        return fenced(_inject_guard(oracle, "z3.BitVecVal(1, 8) == old.current"))
    if kind == API_REFERENCE:
        return fenced(_inject_guard(oracle, "z3.SLT(0, old.current)"))
    if kind == "semantic":
        return fenced(_noop_spec(oracle))
    raise ValueError(kind)


def fault_mix(bench: Benchmark) -> tuple[list[dict], dict]:
    """Schedule rows and the expected outcome counts."""
    rows = []
    expected = {"pass": 0, "FormatError": 0, TYPE_SORT: 0, API_REFERENCE: 0, DOMAIN_PATTERN: 0, TRANSLATION_LOGIC: 0}
    for i, t in enumerate(bench.tasks):
        kind = CYCLE[i % len(CYCLE)]
        rows.append({"task_id": t.id, "response_text": response_for(kind, bench.syscall(t.syscall).spec_py)})
        if kind == "format":
            expected["FormatError"] += 1
        elif kind == "semantic":
            expected[DOMAIN_PATTERN if t.category in DOMAIN_CATEGORIES else TRANSLATION_LOGIC] += 1
        else:
            expected[kind] += 1
    return rows, expected


def write_schedule(rows: list[dict], path: str | Path) -> None:
    Path(path).write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows), encoding="utf-8")
