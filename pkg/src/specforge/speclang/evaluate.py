"""Concrete evaluation and symbolic encoding of checked specifications."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

from .. import term as T
from ..errors import DomainError
from ..expr import Compiler
from ..kernel import KernelConfig, KernelState
from ..symbolic import Encoder, SymState
from .check import CheckedSpec, check_spec
from .inventory import Inventory
from .syntax import FunctionDef


class CompiledSpec:
    """Closures for one checked spec under one config."""

    def __init__(self, spec: CheckedSpec):
        self.spec = spec
        c = Compiler(spec.config, spec.args)
        self.guard = c.compile(spec.guard)
        self.commit = c.compile(spec.commit)
        self.writes = [(c.cell_index(w.ref), c.compile(w.value), str(w.ref)) for w in spec.writes]

    def run(self, cells: Sequence[int], args: Sequence[int], strict: bool = False) -> tuple[bool, Sequence[int]]:
        states = [cells]
        if not self.guard(states, args):
            return False, cells
        cur = cells
        for where, value, label in self.writes:
            off = where(states, args)
            v = value(states, args)
            if off is None:
                if strict:
                    raise DomainError(f"write to {label} is out of domain")
            else:
                cur = list(cur)
                cur[off] = v
            states.append(cur)
        if not self.commit(states, args):
            return True, cells
        return True, cur


@lru_cache(maxsize=4096)
def compile_checked(spec: CheckedSpec) -> CompiledSpec:
    return CompiledSpec(spec)


def compiled(fn: FunctionDef, config: KernelConfig, inventory: Inventory | None = None) -> CompiledSpec:
    return compile_checked(check_spec(fn, config, inventory))


def _check_arity(spec: CheckedSpec, n: int) -> None:
    if n != len(spec.args):
        raise ValueError(f"{spec.name} takes {len(spec.args)} argument(s), got {n}")


def eval_spec(fn: FunctionDef, s: KernelState, args: Sequence[int], strict: bool = True,
              inventory: Inventory | None = None) -> tuple[bool, KernelState]:
    """Return ``(phi, post)``; ``post`` is ``s`` itself whenever ``phi`` is false.

    With ``strict`` an out-of-domain write under a true guard raises
    :class:`DomainError`; otherwise such writes are dropped.
    """
    cs = compiled(fn, s.config, inventory)
    _check_arity(cs.spec, len(args))
    m = s.config.mask
    ok, cells = cs.run(s.cells, [a & m for a in args], strict)
    if cells is s.cells:
        return ok, s
    return ok, KernelState(s.config, tuple(cells))


@dataclass(frozen=True)
class SpecEncoding:
    guard: T.Term
    cells: tuple[T.Term, ...]  # post-state, equal to the pre-state cell when guard fails


def encode_checked(spec: CheckedSpec, pre: SymState, args: Mapping[str, T.Term]) -> SpecEncoding:
    states = [pre]
    enc = Encoder(spec.config, states, args)
    guard = enc(spec.guard)
    cur = pre.copy()
    for w in spec.writes:
        idx = enc.index_terms(w.ref)
        value = enc(w.value)
        cur = cur.copy()
        cur.write(w.ref.path, idx, value)
        states.append(cur)
    take = T.and_(guard, enc(spec.commit))
    cells = tuple(T.ite(take, n, o) for n, o in zip(cur.cells, pre.cells))
    return SpecEncoding(guard, cells)


def encode_spec(fn: FunctionDef, pre: SymState, args: Mapping[str, T.Term] | Sequence[T.Term],
                inventory: Inventory | None = None) -> SpecEncoding:
    spec = check_spec(fn, pre.config, inventory)
    if not isinstance(args, Mapping):
        _check_arity(spec, len(args))
        args = dict(zip(spec.args, args))
    return encode_checked(spec, pre, args)
