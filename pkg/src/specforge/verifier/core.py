"""Equivalence checking between implementation behaviors and specifications."""

from __future__ import annotations

import dataclasses
import random
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from ..errors import EncodingBug, SpecFault
from ..expr import Arg, Compiler, Read
from ..kernel import KernelConfig, KernelState, layout
from ..speclang.check import CheckedSpec, check_spec
from ..speclang.evaluate import compile_checked
from ..speclang.inventory import Inventory
from ..speclang.syntax import FunctionDef
from ..symex import ConcreteOutcome, ImplBehavior, compiled_behavior
from .smt import SolverConfig, build_query, emit_smtlib, model_args, model_cells, run_solver

VERIFIED = "Verified"
COUNTEREXAMPLE = "Counterexample"
SPEC_FAULTED = "SpecFaulted"

# argument C types whose values index a table, with the bounding config field
INDEX_TYPES = {"pid_t": "NPROC", "pn_t": "NPAGE", "fd_t": "NOFILE", "size_t": "PAGE_WORDS"}
SMALL_POOL = 5  # cells are drawn from 0..SMALL_POOL-1 half of the time


@dataclass(frozen=True)
class Witness:
    arg_names: tuple[str, ...]
    args: tuple[int, ...]
    state: KernelState
    impl: ConcreteOutcome
    spec_ok: bool
    spec_post: KernelState

    def to_dict(self) -> dict:
        return {
            "args": dict(zip(self.arg_names, self.args)),
            "state": self.state.to_dict(),
            "impl": {"status": self.impl.status, "changed": self.state.diff(self.impl.post)},
            "spec": {"ok": self.spec_ok, "changed": self.state.diff(self.spec_post)},
            "differing_cells": self.impl.post.diff(self.spec_post),
        }


@dataclass(frozen=True)
class VerifyOutcome:
    verdict: str
    witness: Witness | None = None
    fault: SpecFault | None = None
    backend: str = ""
    smt_script: str | None = None

    def __post_init__(self):
        if (self.verdict == COUNTEREXAMPLE) != (self.witness is not None):
            raise ValueError("witness present iff Counterexample")
        if (self.verdict == SPEC_FAULTED) != (self.fault is not None):
            raise ValueError("fault present iff SpecFaulted")

    def to_dict(self) -> dict:
        d: dict = {"verdict": self.verdict, "backend": self.backend}
        if self.witness is not None:
            d["witness"] = self.witness.to_dict()
        if self.fault is not None:
            d["fault"] = self.fault.to_dict()
        return d


def _disagree(impl_status: int, impl_cells, spec_ok: bool, spec_cells) -> bool:
    impl_ok = impl_status == 0
    if impl_ok != spec_ok:
        return True
    return impl_ok and tuple(impl_cells) != tuple(spec_cells)


def replay(b: ImplBehavior, spec: CheckedSpec, cells: Sequence[int], args: Sequence[int]) -> Witness | None:
    """Concrete replay at one point; a Witness when the two sides disagree."""
    cb = compiled_behavior(b)
    cs = compile_checked(spec)
    status, icells = cb.run(cells, args)
    ok, scells = cs.run(cells, args, strict=False)
    if not _disagree(status, icells, ok, scells):
        return None
    cfg = b.config
    s = KernelState(cfg, tuple(cells))
    return Witness(b.arg_names, tuple(args), s, ConcreteOutcome(status, KernelState(cfg, tuple(icells))), ok,
                   KernelState(cfg, tuple(scells)))


def resolve_spec(spec: FunctionDef | CheckedSpec, b: ImplBehavior,
                 inventory: Inventory | None = None) -> CheckedSpec:
    """Typecheck and match arity against the implementation; raises SpecFault."""
    if isinstance(spec, CheckedSpec):
        checked = spec
    else:
        checked = check_spec(spec, b.config, inventory)
    if len(checked.args) != len(b.params):
        raise SpecFault("TypeSortError",
                        f"{checked.name}() takes {len(checked.args)} argument(s) after the state; "
                        f"{b.name} takes {len(b.params)}")
    return checked


def check_equiv(b: ImplBehavior, spec: FunctionDef | CheckedSpec, config: KernelConfig | None = None,
                solver: SolverConfig = SolverConfig(), inventory: Inventory | None = None,
                keep_script: bool = False) -> VerifyOutcome:
    """Decide equivalence with the external solver.

    Every solver witness is replayed concretely; a witness that does not
    reproduce the divergence raises :class:`EncodingBug`.
    """
    if config is not None and config != b.config:
        raise ValueError("behavior was built under a different config")
    try:
        checked = resolve_spec(spec, b, inventory)
    except SpecFault as fault:
        return VerifyOutcome(SPEC_FAULTED, fault=fault, backend="smt")
    script = emit_smtlib(build_query(b, checked))
    result = run_solver(script, solver)
    kept = script if keep_script else None
    if result.status == "unsat":
        return VerifyOutcome(VERIFIED, backend="smt", smt_script=kept)
    cells = model_cells(result.model, b.config)
    args = model_args(result.model, b.arg_names, b.config)
    w = replay(b, checked, cells, args)
    if w is None:
        raise EncodingBug(f"solver witness for {b.name} does not replay: args={args} "
                          f"script={result.script_path or '(temporary)'}")
    return VerifyOutcome(COUNTEREXAMPLE, witness=w, backend="smt", smt_script=kept)


# --------------------------------------------------------------------------
# differential oracle


STEER_SHARE = 0.25  # fraction of samples steered toward the success path


def iter_points(b: ImplBehavior, samples: int, seed: int) -> Iterator[tuple[list[int], list[int]]]:
    """Seeded (cells, args) samples, generated lazily.

    Each cell is a uniform word or, half of the time, a small value; index
    arguments land in range half of the time. A quarter of the samples are
    then steered toward the success path (see :class:`_Steer`), which
    uniform draws almost never reach when a syscall has many checks.
    """
    cfg = b.config
    ncells = len(layout(cfg).names)
    rng = np.random.default_rng(seed)
    cells = _mix(rng, (samples, ncells), cfg)
    cols = []
    for _, ctype in b.params:
        col = _mix(rng, (samples,), cfg)
        bound = INDEX_TYPES.get(ctype)
        if bound is not None:
            n = getattr(cfg, bound)
            inr = rng.integers(0, n, size=samples).astype(object)
            col = np.where(rng.random(samples) < 0.5, inr, col)
        cols.append(col)
    cell_rows = cells.tolist()
    arg_rows = np.stack(cols, axis=1).tolist() if cols else [[] for _ in range(samples)]
    steer = (rng.random(samples) < STEER_SHARE).tolist()
    s = _Steer(b, random.Random(int(rng.integers(1 << 62)))) if len(b.paths) > 1 else None
    for c, a, go in zip(cell_rows, arg_rows, steer):
        if go and s is not None:
            s.repair(c, a)
        yield c, a


def sample_points(b: ImplBehavior, samples: int, seed: int) -> tuple[list[list[int]], list[list[int]]]:
    """All of :func:`iter_points` as (cells rows, args rows)."""
    pts = list(iter_points(b, samples, seed))
    return [c for c, _ in pts], [a for _, a in pts]


def _positions(e, c: Compiler, out: list) -> None:
    """Closures locating every cell and argument ``e`` reads."""
    if isinstance(e, Read):
        where = c.cell_index(e.ref)
        out.append(lambda st, a, where=where: ("c", where(st, a)))
    elif isinstance(e, Arg):
        k = c.argpos[e.name]
        out.append(lambda st, a, k=k: ("a", k))
    if dataclasses.is_dataclass(e):
        for f in dataclasses.fields(e):
            v = getattr(e, f.name)
            for x in (v if isinstance(v, tuple) else (v,)):
                if dataclasses.is_dataclass(x):
                    _positions(x, c, out)


class _Steer:
    """Path-directed repair.

    When a sample exits through an error check, the positions that check
    reads first (cells and arguments no earlier check looked at) are
    re-drawn, mostly from small values, and the sample is run again. A check
    with nothing new to re-draw gets one of its positions re-drawn at random.
    """

    ROUNDS_PER_CHECK = 4

    def __init__(self, b: ImplBehavior, rnd: random.Random):
        c = Compiler(b.config, b.arg_names)
        self.guards = [c.compile(p.guard) for p in b.paths]
        self.probes = []
        for p in b.paths:
            out: list = []
            _positions(p.guard, c, out)
            self.probes.append(out)
        self.rnd = rnd
        self.mask = b.config.mask
        self.bounds = [getattr(b.config, INDEX_TYPES[t]) if t in INDEX_TYPES else 0 for _, t in b.params]
        self.rounds = self.ROUNDS_PER_CHECK * (len(b.paths) - 1)

    def _draw(self, bound: int = 0) -> int:
        r = self.rnd
        if bound and r.random() < 0.9:
            return r.randrange(bound)
        return r.randrange(SMALL_POOL) if r.random() < 0.85 else r.randrange(self.mask + 1)

    def repair(self, cells: list[int], args: list[int]) -> None:
        st = [cells]
        last = len(self.guards) - 1
        for _ in range(self.rounds):
            i = next((j for j, g in enumerate(self.guards) if g(st, args)), last)
            if i == last:
                return
            # path guards are cumulative, so path i-1 reads everything earlier checks read
            seen = {f(st, args) for f in self.probes[i - 1]} if i else set()
            mine = [q for q in (f(st, args) for f in self.probes[i]) if q[1] is not None]
            if not mine:
                return
            fresh = [q for q in mine if q not in seen] or [self.rnd.choice(mine)]
            for kind, k in fresh:
                if kind == "c":
                    cells[k] = self._draw()
                else:
                    args[k] = self._draw(self.bounds[k])


def _mix(rng: np.random.Generator, shape, cfg: KernelConfig) -> np.ndarray:
    w = cfg.word_width
    words = np.zeros(shape, dtype=object)
    for shift in range(0, w, 32):
        part = rng.integers(0, 1 << 32, size=shape, dtype=np.uint64).astype(object)
        words = words + (part << shift)
    words = words & cfg.mask
    small = rng.integers(0, SMALL_POOL, size=shape).astype(object)
    return np.where(rng.random(shape) < 0.5, small, words)


def differential_check(b: ImplBehavior, spec: FunctionDef | CheckedSpec, samples: int = 10000, seed: int = 42,
                       inventory: Inventory | None = None) -> VerifyOutcome:
    """Verified-so-far, or the first disagreement among ``samples`` random points."""
    try:
        checked = resolve_spec(spec, b, inventory)
    except SpecFault as fault:
        return VerifyOutcome(SPEC_FAULTED, fault=fault, backend="diff")
    if samples <= 0:
        return VerifyOutcome(VERIFIED, backend="diff")
    run_impl = compiled_behavior(b).run
    run_spec = compile_checked(checked).run
    for c, a in iter_points(b, samples, seed):
        status, icells = run_impl(c, a)
        ok, scells = run_spec(c, a)
        if _disagree(status, icells, ok, scells):
            return VerifyOutcome(COUNTEREXAMPLE, witness=replay(b, checked, c, a), backend="diff")
    return VerifyOutcome(VERIFIED, backend="diff")


__all__ = ["COUNTEREXAMPLE", "SPEC_FAULTED", "VERIFIED", "VerifyOutcome", "Witness", "check_equiv",
           "differential_check", "iter_points", "replay", "resolve_spec", "sample_points"]
