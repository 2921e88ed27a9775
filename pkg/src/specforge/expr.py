"""Core expression IR shared by specifications and implementation behaviors.

Both front ends lower into these nodes.  Reads carry a ``version``: 0 is the
pre-state, ``k`` is the specification's copied state after its first ``k``
writes.  Implementation behaviors only ever read version 0.

Out-of-domain reads evaluate to 0 everywhere (concrete and symbolic), which
keeps every expression total.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

from . import bv
from .kernel import FieldPath, KernelConfig, layout


@dataclass(frozen=True)
class Lit:
    value: int
    width: int | None = None  # None: unsized integer literal


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Arg:
    name: str


@dataclass(frozen=True)
class Local:
    name: str


@dataclass(frozen=True)
class CellRef:
    path: FieldPath
    indices: tuple["Expr", ...] = ()

    def __str__(self) -> str:
        p = self.path
        if p.table is None:
            return p.field
        s = f"{p.table}[{show(self.indices[0])}].{p.field}"
        if p.is_map:
            s += f"[{show(self.indices[1])}]"
        return s


@dataclass(frozen=True)
class Read:
    ref: CellRef
    version: int = 0


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    width: int


@dataclass(frozen=True)
class Cmp:
    op: str
    left: "Expr"
    right: "Expr"
    width: int


@dataclass(frozen=True)
class Not:
    arg: "Expr"


@dataclass(frozen=True)
class BoolOp:
    op: str  # "and" | "or"
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Implies:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Ite:
    cond: "Expr"
    then: "Expr"
    other: "Expr"


Expr = Union[Lit, BoolLit, Arg, Local, Read, BinOp, Cmp, Not, BoolOp, Implies, Ite]

TRUE = BoolLit(True)
FALSE = BoolLit(False)


def conj(*args: Expr) -> Expr:
    flat: list[Expr] = []
    for a in args:
        if a == TRUE:
            continue
        if a == FALSE:
            return FALSE
        if isinstance(a, BoolOp) and a.op == "and":
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else BoolOp("and", tuple(flat))


def negate(e: Expr) -> Expr:
    if isinstance(e, BoolLit):
        return BoolLit(not e.value)
    if isinstance(e, Not):
        return e.arg
    return Not(e)


_SYM = {"add": "+", "sub": "-", "mul": "*", "shl": "<<", "or": "|", "and": "&", "xor": "^",
        "eq": "==", "ne": "!=", "slt": "<", "sle": "<=", "sgt": ">", "sge": ">="}
_FUN = {"udiv": "UDiv", "sdiv": "SDiv", "lshr": "LShR", "ashr": "AShR",
        "ult": "ULT", "ule": "ULE", "ugt": "UGT", "uge": "UGE"}


def show(e: Expr) -> str:
    """Compact human-readable rendering (for dumps and counterexamples)."""
    if isinstance(e, Lit):
        return str(e.value) if e.value < 4096 else hex(e.value)
    if isinstance(e, BoolLit):
        return str(e.value)
    if isinstance(e, (Arg, Local)):
        return e.name
    if isinstance(e, Read):
        prefix = "old" if e.version == 0 else f"new{e.version}"
        return f"{prefix}.{e.ref}"
    if isinstance(e, (BinOp, Cmp)):
        if e.op in _SYM:
            return f"({show(e.left)} {_SYM[e.op]} {show(e.right)})"
        return f"{_FUN[e.op]}({show(e.left)}, {show(e.right)})"
    if isinstance(e, Not):
        return f"Not({show(e.arg)})"
    if isinstance(e, BoolOp):
        return f"{e.op.capitalize()}({', '.join(show(a) for a in e.args)})"
    if isinstance(e, Implies):
        return f"Implies({show(e.left)}, {show(e.right)})"
    if isinstance(e, Ite):
        return f"If({show(e.cond)}, {show(e.then)}, {show(e.other)})"
    raise TypeError(e)


# --------------------------------------------------------------------------
# concrete evaluation

Compiled = Callable[[Sequence[Sequence[int]], Sequence[int]], int]


class Compiler:
    """Compiles expressions into closures ``f(states, args)``.

    ``states[k]`` is the cell list for read version ``k``; ``args`` are
    positional argument values in ``argnames`` order.
    """

    def __init__(self, config: KernelConfig, argnames: Sequence[str]):
        self.config = config
        self.layout = layout(config)
        self.argpos = {n: i for i, n in enumerate(argnames)}

    def cell_index(self, ref: CellRef) -> Callable[[Sequence[Sequence[int]], Sequence[int]], int | None]:
        """Closure computing the cell offset of ``ref`` (None when out of domain)."""
        base, doms, strides = self.layout.offsets[ref.path]
        if not doms:
            return lambda st, a: base
        fi = self.compile(ref.indices[0])
        n0, s0 = doms[0], strides[0]
        if len(doms) == 1:
            def idx1(st, a):
                i = fi(st, a)
                return base + i * s0 if i < n0 else None
            return idx1
        fj = self.compile(ref.indices[1])
        n1, s1 = doms[1], strides[1]

        def idx2(st, a):
            i = fi(st, a)
            j = fj(st, a)
            return base + i * s0 + j * s1 if i < n0 and j < n1 else None
        return idx2

    def compile(self, e: Expr) -> Compiled:
        if isinstance(e, Lit):
            v = e.value
            return lambda st, a: v
        if isinstance(e, BoolLit):
            v = e.value
            return lambda st, a: v
        if isinstance(e, Arg):
            p = self.argpos[e.name]
            return lambda st, a: a[p]
        if isinstance(e, Local):
            raise ValueError(f"unresolved local {e.name!r}")
        if isinstance(e, Read):
            ver = e.version
            if not e.ref.indices:
                off = self.layout.offsets[e.ref.path][0]
                return lambda st, a: st[ver][off]
            fidx = self.cell_index(e.ref)

            def read(st, a):
                off = fidx(st, a)
                return 0 if off is None else st[ver][off]
            return read
        if isinstance(e, BinOp):
            return self._binop(e)
        if isinstance(e, Cmp):
            return self._cmp(e)
        if isinstance(e, Not):
            f = self.compile(e.arg)
            return lambda st, a: not f(st, a)
        if isinstance(e, BoolOp):
            fs = [self.compile(x) for x in e.args]
            if e.op == "and":
                return lambda st, a: all(f(st, a) for f in fs)
            return lambda st, a: any(f(st, a) for f in fs)
        if isinstance(e, Implies):
            fl, fr = self.compile(e.left), self.compile(e.right)
            return lambda st, a: (not fl(st, a)) or fr(st, a)
        if isinstance(e, Ite):
            fc, ft, fo = self.compile(e.cond), self.compile(e.then), self.compile(e.other)
            return lambda st, a: ft(st, a) if fc(st, a) else fo(st, a)
        raise TypeError(f"cannot compile {e!r}")

    def _binop(self, e: BinOp) -> Compiled:
        fl, fr = self.compile(e.left), self.compile(e.right)
        w = e.width
        m = bv.mask(w)
        op = e.op
        if op == "add":
            return lambda st, a: (fl(st, a) + fr(st, a)) & m
        if op == "sub":
            return lambda st, a: (fl(st, a) - fr(st, a)) & m
        if op == "mul":
            return lambda st, a: (fl(st, a) * fr(st, a)) & m
        if op == "or":
            return lambda st, a: fl(st, a) | fr(st, a)
        if op == "and":
            return lambda st, a: fl(st, a) & fr(st, a)
        if op == "xor":
            return lambda st, a: fl(st, a) ^ fr(st, a)
        return lambda st, a: bv.binop(op, fl(st, a), fr(st, a), w)

    def _cmp(self, e: Cmp) -> Compiled:
        fl, fr = self.compile(e.left), self.compile(e.right)
        op = e.op
        if op == "eq":
            return lambda st, a: fl(st, a) == fr(st, a)
        if op == "ne":
            return lambda st, a: fl(st, a) != fr(st, a)
        if op == "ult":
            return lambda st, a: fl(st, a) < fr(st, a)
        w = e.width
        return lambda st, a: bv.compare(op, fl(st, a), fr(st, a), w)


def free_args(e: Expr) -> set[str]:
    out: set[str] = set()

    def walk(x):
        if isinstance(x, Arg):
            out.add(x.name)
        elif isinstance(x, Read):
            for i in x.ref.indices:
                walk(i)
        elif isinstance(x, (BinOp, Cmp, Implies)):
            walk(x.left)
            walk(x.right)
        elif isinstance(x, Not):
            walk(x.arg)
        elif isinstance(x, BoolOp):
            for y in x.args:
                walk(y)
        elif isinstance(x, Ite):
            walk(x.cond)
            walk(x.then)
            walk(x.other)

    walk(e)
    return out
