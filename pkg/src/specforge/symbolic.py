"""Symbolic kernel states: one term per cell, maps unrolled."""

from __future__ import annotations

from typing import Mapping, Sequence

from . import term as T
from .expr import Arg, BinOp, BoolLit, BoolOp, CellRef, Cmp, Expr, Implies, Ite, Lit, Local, Not, Read
from .kernel import FieldPath, KernelConfig, KernelState, layout


class SymState:
    def __init__(self, config: KernelConfig, cells: Sequence[T.Term]):
        self.config = config
        self.layout = layout(config)
        self.cells = list(cells)

    @classmethod
    def fresh(cls, config: KernelConfig) -> "SymState":
        lay = layout(config)
        return cls(config, [T.var(n, config.word_width) for n in lay.names])

    @classmethod
    def concrete(cls, s: KernelState) -> "SymState":
        return cls(s.config, [T.const(v, s.config.word_width) for v in s.cells])

    def copy(self) -> "SymState":
        return SymState(self.config, self.cells)

    def _candidates(self, path: FieldPath, idx: Sequence[T.Term]):
        for ind, off in self.layout.cells(path):
            cond = T.and_(*(T.eq(i, T.const(v, i.width)) for i, v in zip(idx, ind)))
            if cond is not T.FALSE:
                yield cond, off

    def read(self, path: FieldPath, idx: Sequence[T.Term]) -> T.Term:
        """Ite chain over candidate cells; out-of-domain reads yield 0."""
        result = T.const(0, self.config.word_width)
        for cond, off in reversed(list(self._candidates(path, idx))):
            result = T.ite(cond, self.cells[off], result)
        return result

    def write(self, path: FieldPath, idx: Sequence[T.Term], value: T.Term) -> None:
        """Out-of-domain writes are dropped."""
        for cond, off in list(self._candidates(path, idx)):
            self.cells[off] = T.ite(cond, value, self.cells[off])


class Encoder:
    """Translates core expressions into terms.

    ``states[k]`` backs read version ``k``; ``args`` maps argument names to
    terms; ``locals_`` maps bound local names to terms.
    """

    def __init__(self, config: KernelConfig, states: Sequence[SymState],
                 args: Mapping[str, T.Term], locals_: Mapping[str, T.Term] | None = None):
        self.config = config
        self.states = states
        self.args = args
        self.locals = dict(locals_ or {})
        self.memo: dict[Expr, T.Term] = {}

    def __call__(self, e: Expr) -> T.Term:
        t = self.memo.get(e)
        if t is None:
            t = self._enc(e)
            self.memo[e] = t
        return t

    def index_terms(self, ref: CellRef) -> list[T.Term]:
        return [self(i) for i in ref.indices]

    def _enc(self, e: Expr) -> T.Term:
        if isinstance(e, Lit):
            return T.const(e.value, e.width or self.config.word_width)
        if isinstance(e, BoolLit):
            return T.boolean(e.value)
        if isinstance(e, Arg):
            return self.args[e.name]
        if isinstance(e, Local):
            return self.locals[e.name]
        if isinstance(e, Read):
            return self.states[e.version].read(e.ref.path, self.index_terms(e.ref))
        if isinstance(e, BinOp):
            return T.bvop(e.op, self(e.left), self(e.right))
        if isinstance(e, Cmp):
            return T.cmp(e.op, self(e.left), self(e.right))
        if isinstance(e, Not):
            return T.not_(self(e.arg))
        if isinstance(e, BoolOp):
            parts = [self(a) for a in e.args]
            return T.and_(*parts) if e.op == "and" else T.or_(*parts)
        if isinstance(e, Implies):
            return T.implies(self(e.left), self(e.right))
        if isinstance(e, Ite):
            return T.ite(self(e.cond), self(e.then), self(e.other))
        raise TypeError(f"cannot encode {e!r}")
