"""Symbolic execution of check/update IR into guarded paths.

Every path guard and update is expressed over the pre-state and the
arguments: reads that follow earlier updates are rewritten into ``Ite``
selections over those updates, and locals are substituted by the values
they held when bound.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

from . import term as T
from .cfront.lower import Check, IRFunction, Let, Update
from .expr import (TRUE, Arg, BinOp, BoolLit, BoolOp, CellRef, Cmp, Compiler, Expr, Implies, Ite,
                   Lit, Local, Not, Read, conj, negate, show)
from .kernel import ERRNO, KernelConfig, KernelState, layout
from .symbolic import Encoder, SymState


@dataclass(frozen=True)
class Path:
    guard: Expr
    status: int  # 0 on success, else the errno value
    errname: str | None
    updates: tuple[tuple[CellRef, Expr], ...]

    def to_dict(self) -> dict:
        return {"guard": show(self.guard), "status": self.status, "errname": self.errname,
                "updates": [[str(r), show(v)] for r, v in self.updates]}


@dataclass(frozen=True)
class ImplBehavior:
    name: str
    params: tuple[tuple[str, str], ...]  # (name, ctype)
    paths: tuple[Path, ...]
    config: KernelConfig

    @property
    def arg_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.params)

    @property
    def success(self) -> Path:
        return next(p for p in self.paths if p.status == 0)

    def to_dict(self) -> dict:
        return {"name": self.name, "params": [list(p) for p in self.params],
                "paths": [p.to_dict() for p in self.paths]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@dataclass(frozen=True)
class ConcreteOutcome:
    status: int
    post: KernelState

    @property
    def ok(self) -> bool:
        return self.status == 0


def _errno(name: str) -> int:
    return int(name) if name.isdigit() else ERRNO[name]


class _Executor:
    def __init__(self, ir: IRFunction, config: KernelConfig):
        self.ir = ir
        self.config = config
        self.w = config.word_width
        self.lay = layout(config)
        self.env: dict[str, Expr] = {}
        self.writes: list[tuple[CellRef, Expr]] = []

    def in_domain(self, ref: CellRef) -> Expr:
        doms = self.lay.offsets[ref.path][1]
        return conj(*(Cmp("ult", i, Lit(n, self.w), self.w) for i, n in zip(ref.indices, doms)))

    def read(self, ref: CellRef) -> Expr:
        """A read of ``ref`` (indices already substituted) after the recorded writes."""
        result: Expr = Read(ref)
        for wref, value in self.writes:
            if wref.path != ref.path:
                continue
            if wref.indices == ref.indices:
                hit = self.in_domain(ref) if ref.indices else TRUE
            else:
                eqs = [Cmp("eq", a, b, self.w) for a, b in zip(ref.indices, wref.indices)]
                hit = conj(*eqs, self.in_domain(wref))
            result = value if hit == TRUE else Ite(hit, value, result)
        return result

    def ref(self, r: CellRef) -> CellRef:
        return CellRef(r.path, tuple(self.sub(i) for i in r.indices))

    def sub(self, e: Expr) -> Expr:
        if isinstance(e, (Lit, BoolLit, Arg)):
            return e
        if isinstance(e, Local):
            return self.env[e.name]
        if isinstance(e, Read):
            return self.read(self.ref(e.ref))
        if isinstance(e, BinOp):
            return BinOp(e.op, self.sub(e.left), self.sub(e.right), e.width)
        if isinstance(e, Cmp):
            return Cmp(e.op, self.sub(e.left), self.sub(e.right), e.width)
        if isinstance(e, Not):
            return Not(self.sub(e.arg))
        if isinstance(e, BoolOp):
            return BoolOp(e.op, tuple(self.sub(a) for a in e.args))
        if isinstance(e, Implies):
            return Implies(self.sub(e.left), self.sub(e.right))
        if isinstance(e, Ite):
            return Ite(self.sub(e.cond), self.sub(e.then), self.sub(e.other))
        raise TypeError(e)

    def run(self) -> ImplBehavior:
        paths: list[Path] = []
        passed: list[Expr] = []  # negations of the checks so far
        for item in self.ir.items:
            if isinstance(item, Check):
                c = self.sub(item.guard)
                paths.append(Path(conj(*passed, c), _errno(item.errcode), item.errcode, ()))
                passed.append(negate(c))
            elif isinstance(item, Let):
                self.env[item.name] = self.sub(item.value)
            elif isinstance(item, Update):
                ref = self.ref(item.ref)
                value = self.sub(item.value)
                self.writes.append((ref, value))
        paths.append(Path(conj(*passed), 0, None, tuple(self.writes)))
        return ImplBehavior(self.ir.name, self.ir.params, tuple(paths), self.config)


def execute(ir: IRFunction, config: KernelConfig | None = None) -> ImplBehavior:
    return _Executor(ir, config or KernelConfig()).run()


# --------------------------------------------------------------------------
# concrete replay


class CompiledBehavior:
    def __init__(self, b: ImplBehavior):
        self.behavior = b
        c = Compiler(b.config, b.arg_names)
        self.guards = [(c.compile(p.guard), p.status) for p in b.paths]
        self.updates = [(c.cell_index(r), c.compile(v)) for r, v in b.success.updates]

    def true_paths(self, cells: Sequence[int], args: Sequence[int]) -> list[int]:
        st = [cells]
        return [i for i, (g, _) in enumerate(self.guards) if g(st, args)]

    def run(self, cells: Sequence[int], args: Sequence[int]) -> tuple[int, Sequence[int]]:
        st = [cells]
        for g, status in self.guards:
            if g(st, args):
                break
        else:
            raise AssertionError(f"{self.behavior.name}: no path guard holds; behavior is not exhaustive")
        if status != 0:
            return status, cells
        computed = [(where(st, args), value(st, args)) for where, value in self.updates]
        out = list(cells)
        for off, v in computed:
            if off is not None:
                out[off] = v
        return 0, out


@lru_cache(maxsize=1024)
def compiled_behavior(b: ImplBehavior) -> CompiledBehavior:
    return CompiledBehavior(b)


def concretize(b: ImplBehavior, s: KernelState, args: Sequence[int]) -> ConcreteOutcome:
    if len(args) != len(b.params):
        raise ValueError(f"{b.name} takes {len(b.params)} argument(s), got {len(args)}")
    m = s.config.mask
    status, cells = compiled_behavior(b).run(s.cells, [a & m for a in args])
    post = s if cells is s.cells else KernelState(s.config, tuple(cells))
    return ConcreteOutcome(status, post)


# --------------------------------------------------------------------------
# symbolic encoding


@dataclass(frozen=True)
class BehaviorEncoding:
    ok: T.Term
    cells: tuple[T.Term, ...]


def encode_behavior(b: ImplBehavior, pre: SymState, args: Mapping[str, T.Term]) -> BehaviorEncoding:
    enc = Encoder(b.config, [pre], args)
    succ = b.success
    ok = enc(succ.guard)
    post = pre.copy()
    computed = [(r.path, enc.index_terms(r), enc(v)) for r, v in succ.updates]
    for path, idx, value in computed:
        post.write(path, idx, value)
    cells = tuple(T.ite(ok, n, o) for n, o in zip(post.cells, pre.cells))
    return BehaviorEncoding(ok, cells)


__all__ = ["ConcreteOutcome", "ImplBehavior", "Path", "BehaviorEncoding", "compiled_behavior",
           "concretize", "encode_behavior", "execute"]
