"""SMT-LIB 2 emission, the external solver driver, and model parsing."""

from __future__ import annotations

import hashlib
import re
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .. import term as T
from ..errors import InfrastructureError
from ..kernel import KernelConfig, layout
from ..speclang.check import CheckedSpec
from ..speclang.evaluate import encode_checked
from ..symbolic import SymState
from ..symex import ImplBehavior, encode_behavior

ARG_PREFIX = "arg_"


@dataclass(frozen=True)
class EquivQuery:
    config: KernelConfig
    title: str
    cell_vars: tuple[T.Term, ...]
    arg_names: tuple[str, ...]
    arg_vars: tuple[T.Term, ...]
    mismatch: T.Term


def build_query(b: ImplBehavior, spec: CheckedSpec) -> EquivQuery:
    """Mismatch = (impl_ok xor phi) or (impl_ok and phi and some cell differs).

    Arguments are matched by position; the implementation's names are used
    for the solver symbols.
    """
    config = b.config
    pre = SymState.fresh(config)
    w = config.word_width
    arg_vars = tuple(T.var(ARG_PREFIX + n, w) for n in b.arg_names)
    impl = encode_behavior(b, pre, dict(zip(b.arg_names, arg_vars)))
    sp = encode_checked(spec, pre, dict(zip(spec.args, arg_vars)))
    differs = T.or_(*(T.not_(T.eq(x, y)) for x, y in zip(impl.cells, sp.cells)))
    mismatch = T.or_(T.xor(impl.ok, sp.guard), T.and_(impl.ok, sp.guard, differs))
    return EquivQuery(config, f"{b.name} vs {spec.name}", tuple(pre.cells), b.arg_names, arg_vars, mismatch)


def emit_smtlib(q: EquivQuery) -> str:
    defs, (root,) = T.to_smtlib([("mismatch", q.mismatch)])
    lines = [f"; equivalence query: {q.title}", "(set-option :produce-models true)", "(set-logic QF_BV)"]
    for v in q.cell_vars + q.arg_vars:
        lines.append(f"(declare-const {v.val} {T.sort(v.width)})")
    lines += defs
    lines += [f"(assert {root})", "(check-sat)", "(get-model)"]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# solver driver


@dataclass(frozen=True)
class SolverConfig:
    command: tuple[str, ...] = ("z3",)
    timeout: float = 30.0
    workdir: Path | None = None

    @classmethod
    def from_string(cls, command: str, **kw) -> "SolverConfig":
        return cls(tuple(shlex.split(command)), **kw)


@dataclass(frozen=True)
class SolverResult:
    status: str  # "sat" | "unsat"
    model: dict[str, int] = field(default_factory=dict)
    script_path: str = ""


_MODEL_RE = re.compile(
    r"\(define-fun\s+(\|[^|]*\||[^\s()]+)\s+\(\)\s+(?:\(_\s+BitVec\s+\d+\)|Bool)\s+"
    r"(#x[0-9a-fA-F]+|#b[01]+|\(_\s+bv\d+\s+\d+\)|true|false)\s*\)")


def parse_model(text: str) -> dict[str, int]:
    model: dict[str, int] = {}
    for name, value in _MODEL_RE.findall(text):
        name = name.strip("|")
        if value.startswith("#x"):
            v = int(value[2:], 16)
        elif value.startswith("#b"):
            v = int(value[2:], 2)
        elif value in ("true", "false"):
            v = int(value == "true")
        else:
            v = int(value.split()[1][2:])
        model[name] = v
    return model


def run_solver(script: str, solver: SolverConfig = SolverConfig()) -> SolverResult:
    digest = hashlib.sha256(script.encode()).hexdigest()[:16]
    if solver.workdir is not None:
        workdir = Path(solver.workdir)
        workdir.mkdir(parents=True, exist_ok=True)
        return _run(script, workdir / f"query-{digest}.smt2", solver)
    with tempfile.TemporaryDirectory(prefix="specforge-") as tmp:
        return _run(script, Path(tmp) / f"query-{digest}.smt2", solver)


def _run(script: str, path: Path, solver: SolverConfig) -> SolverResult:
    path.write_text(script)
    try:
        proc = subprocess.run([*solver.command, str(path)], capture_output=True, text=True,
                              timeout=solver.timeout)
    except subprocess.TimeoutExpired:
        raise InfrastructureError(f"solver timed out after {solver.timeout:g}s on {path.name}") from None
    except OSError as exc:
        raise InfrastructureError(f"cannot run solver {solver.command[0]!r}: {exc}") from None
    out = proc.stdout.strip()
    first = out.split(None, 1)[0] if out else ""
    if first == "unsat":
        return SolverResult("unsat", {}, str(path))
    if first == "sat":
        return SolverResult("sat", parse_model(out), str(path))
    detail = (proc.stderr or proc.stdout).strip().splitlines()[:3]
    raise InfrastructureError(f"solver answered {first or 'nothing'!r} (exit {proc.returncode}): {detail}")


def model_cells(model: dict[str, int], config: KernelConfig) -> tuple[int, ...]:
    """Pre-state cells from a model; unassigned symbols default to 0."""
    m = config.mask
    return tuple(model.get(n, 0) & m for n in layout(config).names)


def model_args(model: dict[str, int], names: Sequence[str], config: KernelConfig) -> tuple[int, ...]:
    return tuple(model.get(ARG_PREFIX + n, 0) & config.mask for n in names)
