"""Task judging: a spec's verdict pattern across a syscall's variants."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..errors import SpecFault
from ..speclang.syntax import FunctionDef, parse_function
from ..speclang.inventory import Inventory
from ..symex import ImplBehavior
from .core import COUNTEREXAMPLE, SPEC_FAULTED, VERIFIED, VerifyOutcome, check_equiv, differential_check
from .smt import SolverConfig

BACKENDS = ("smt", "diff", "both")


@dataclass(frozen=True)
class TaskVerdict:
    task_id: str
    passed: bool
    outcomes: tuple[tuple[str, str], ...]  # (variant, verdict) in variant order
    fault: SpecFault | None = None
    details: tuple[VerifyOutcome, ...] = field(default=(), compare=False)

    def to_dict(self, details: bool = False) -> dict:
        d = {"task_id": self.task_id, "pass": self.passed, "outcomes": dict(self.outcomes)}
        if self.fault is not None:
            d["fault"] = self.fault.to_dict()
        if details:
            d["details"] = {v: o.to_dict() for (v, _), o in zip(self.outcomes, self.details)}
        return d


class BackendDisagreement(AssertionError):
    pass


@dataclass
class Verifier:
    """Runs equivalence checks with a configurable backend and a verdict cache.

    With the ``smt`` backend a short differential pre-pass runs first: any
    disagreement it finds is a concretely replayed counterexample, so the
    solver is consulted only when sampling finds nothing.
    """

    solver: SolverConfig = field(default_factory=SolverConfig)
    backend: str = "smt"
    samples: int = 10000
    prefilter: int = 256
    seed: int = 42
    inventory: Inventory | None = None

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        self._cache: dict[tuple, VerifyOutcome] = {}
        self._inflight: dict[tuple, threading.Lock] = {}
        self._lock = threading.Lock()

    def check(self, b: ImplBehavior, spec: FunctionDef) -> VerifyOutcome:
        key = (b, spec)
        with self._lock:
            hit = self._cache.get(key)
            if hit is not None:
                return hit
            gate = self._inflight.setdefault(key, threading.Lock())
        # one computation per key; concurrent callers wait for it
        with gate:
            with self._lock:
                hit = self._cache.get(key)
            if hit is not None:
                return hit
            out = self._check(b, spec)
            if out.verdict != SPEC_FAULTED:
                # faults carry source locations, which the AST key ignores
                with self._lock:
                    self._cache[key] = out
            return out

    def _check(self, b: ImplBehavior, spec: FunctionDef) -> VerifyOutcome:
        if self.backend == "diff":
            return differential_check(b, spec, self.samples, self.seed, self.inventory)
        if self.backend == "both":
            smt = check_equiv(b, spec, solver=self.solver, inventory=self.inventory)
            diff = differential_check(b, spec, self.samples, self.seed, self.inventory)
            if smt.verdict == VERIFIED and diff.verdict == COUNTEREXAMPLE:
                raise BackendDisagreement(f"{b.name}: solver verified but sampling found a divergence")
            return smt
        pre = differential_check(b, spec, self.prefilter, self.seed, self.inventory)
        if pre.verdict != VERIFIED:
            return pre
        return check_equiv(b, spec, solver=self.solver, inventory=self.inventory)


def oracle_pattern(variants: Sequence[str]) -> tuple[tuple[str, str], ...]:
    """The oracle spec verifies the correct variant and refutes every bug."""
    return tuple((v, VERIFIED if v == "Correct" else COUNTEREXAMPLE) for v in variants)


def judge_task(task_id: str, gen_spec: str | FunctionDef, variants: Mapping[str, ImplBehavior],
               pattern: Sequence[tuple[str, str]], verifier: Verifier | None = None,
               only: str | None = None) -> TaskVerdict:
    """Pass iff the spec's verdicts over ``variants`` equal ``pattern``.

    ``only`` restricts judging to a single variant (the task's own).
    """
    verifier = verifier or Verifier()
    try:
        fn = parse_function(gen_spec) if isinstance(gen_spec, str) else gen_spec
    except SpecFault as fault:
        return TaskVerdict(task_id, False, (), fault)
    expected = [(v, want) for v, want in pattern if only is None or v == only]
    got: list[tuple[str, str]] = []
    outs: list[VerifyOutcome] = []
    for v, _ in expected:
        out = verifier.check(variants[v], fn)
        got.append((v, out.verdict))
        outs.append(out)
        if out.verdict == SPEC_FAULTED:
            return TaskVerdict(task_id, False, tuple(got), out.fault, tuple(outs))
    return TaskVerdict(task_id, got == list(expected), tuple(got), None, tuple(outs))
