"""Lowering of inlined C ASTs to the check/update IR.

C typing follows the usual arithmetic conversions at one word width: an
operation is unsigned as soon as either operand is unsigned.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

from ..errors import DomainError, UnsupportedConstruct
from ..expr import Arg, BinOp, BoolOp, CellRef, Cmp, Expr, Ite, Lit, Local, Not, Read, show
from ..kernel import ERRNO, SCALARS, TABLES, FieldPath, KernelConfig, constant_table
from .syntax import (STRUCTS, SCALAR_TYPES, Assign, Bind, CBinary, CCall, CExpr, CIndex, CMember, CName,
                     CNum, CRef, CUnary, ErrorCheck, HelperCall, ImplAST, ReturnZero)


@dataclass(frozen=True)
class Check:
    guard: Expr  # the error condition as written
    errcode: str
    line: int = 0


@dataclass(frozen=True)
class Update:
    ref: CellRef
    value: Expr
    line: int = 0


@dataclass(frozen=True)
class Let:
    """Binds a local: a table index when ``table`` is set, else a scalar."""

    name: str
    value: Expr
    table: str | None = None
    line: int = 0


IRItem = Union[Check, Update, Let]


@dataclass(frozen=True)
class IRFunction:
    name: str
    params: tuple[tuple[str, str], ...]  # (name, ctype)
    items: tuple[IRItem, ...]
    annotations: tuple[str, ...] = ()

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.params)

    def count(self, kind: type) -> int:
        return sum(isinstance(i, kind) for i in self.items)

    def to_dict(self) -> dict:
        def item(i):
            if isinstance(i, Check):
                return {"check": show(i.guard), "errcode": i.errcode}
            if isinstance(i, Update):
                return {"update": str(i.ref), "value": show(i.value)}
            return {"let": i.name, "value": show(i.value), "table": i.table}
        return {"name": self.name, "params": [list(p) for p in self.params],
                "items": [item(i) for i in self.items], "annotations": list(self.annotations)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


BOOL = "bool"


class _Lowerer:
    def __init__(self, ast: ImplAST, config: KernelConfig):
        self.ast = ast
        self.w = config.word_width
        self.mask = config.mask
        self.consts = constant_table(config).flat()
        self.params = {n: t for t, n in ast.params}
        self.decls = {d.name: d.ctype for d in ast.decls}
        self.bound: set[str] = set()

    def fail(self, msg: str, node) -> UnsupportedConstruct:
        return UnsupportedConstruct(msg, *getattr(node, "loc", (0, 0)))

    # -------------------------------------------------------------- statements
    def run(self) -> IRFunction:
        items: list[IRItem] = []
        for s in self.ast.body:
            line = s.loc[0]
            if isinstance(s, ErrorCheck):
                if s.errcode not in ERRNO and not s.errcode.isdigit():
                    raise self.fail(f"unknown errno {s.errcode!r}", s)
                items.append(Check(self.cond(s.cond), s.errcode, line))
            elif isinstance(s, Assign):
                ref = self.lvalue(s.lvalue)
                value = self.int_value(s.value)
                if s.op != "=":
                    value = BinOp("add" if s.op == "+=" else "sub", Read(ref), value, self.w)
                items.append(Update(ref, value, line))
            elif isinstance(s, Bind):
                items.append(self.bind(s))
            elif isinstance(s, HelperCall):
                raise self.fail(f"helper call {s.name} was not inlined", s)
            elif isinstance(s, ReturnZero):
                pass
        params = tuple((n, t) for t, n in self.ast.params)
        return IRFunction(self.ast.name, params, tuple(items), self.ast.annotations)

    def bind(self, s: Bind) -> Let:
        ctype = self.decls.get(s.name)
        if ctype is None:
            if s.name in self.params:
                raise self.fail(f"assignment to parameter {s.name!r} is not supported", s)
            raise DomainError(f"{s.loc[0]}:{s.loc[1]}: {s.name!r} has no schema mapping")
        e, kind = self.lower(s.value)
        if ctype.endswith("*"):
            table = STRUCTS[ctype.split()[1]]
            if kind != ("ptr", table):
                raise self.fail(f"{s.name} must be bound to a {table} entry", s)
            self.bound.add(s.name)
            return Let(s.name, e, table, s.loc[0])
        self.bound.add(s.name)
        return Let(s.name, self.to_int(e, kind), None, s.loc[0])

    # -------------------------------------------------------------- lvalues
    def lvalue(self, node: CExpr) -> CellRef:
        if isinstance(node, CName):
            if node.id in SCALARS:
                return CellRef(FieldPath(node.id))
            raise DomainError(f"{node.loc[0]}:{node.loc[1]}: {node.id!r} has no schema mapping")
        if isinstance(node, CMember):
            table, idx = self.pointer(node.base)
            _, scalars, maps = TABLES[table]
            if node.field in scalars:
                return CellRef(FieldPath(node.field, table), (idx,))
            if node.field in maps:
                raise self.fail(f"map field {node.field} needs an index", node)
            raise DomainError(f"{node.loc[0]}:{node.loc[1]}: {table} entries have no field {node.field!r}")
        if isinstance(node, CIndex) and isinstance(node.base, CMember):
            m = node.base
            table, idx = self.pointer(m.base)
            _, scalars, maps = TABLES[table]
            if m.field not in maps:
                raise DomainError(f"{m.loc[0]}:{m.loc[1]}: {table} entries have no map field {m.field!r}")
            key = self.int_value(node.index)
            return CellRef(FieldPath(m.field, table, True), (idx, key))
        raise self.fail("unsupported lvalue", node)

    def pointer(self, node: CExpr) -> tuple[str, Expr]:
        e, kind = self.lower(node)
        if not (isinstance(kind, tuple) and kind[0] == "ptr"):
            raise self.fail("'->' applied to a non-pointer", node)
        return kind[1], e

    # -------------------------------------------------------------- expressions
    def cond(self, node: CExpr) -> Expr:
        e, kind = self.lower(node)
        return self.to_bool(e, kind, node)

    def int_value(self, node: CExpr) -> Expr:
        e, kind = self.lower(node)
        return self.to_int(e, kind, node)

    def to_bool(self, e: Expr, kind, node=None) -> Expr:
        if kind == BOOL:
            return e
        if isinstance(kind, tuple) and kind[0] == "ptr":
            raise self.fail("pointers cannot be used as conditions", node)
        return Cmp("ne", e, Lit(0, self.w), self.w)

    def to_int(self, e: Expr, kind, node=None) -> Expr:
        if kind == BOOL:
            return Ite(e, Lit(1, self.w), Lit(0, self.w))
        if isinstance(kind, tuple) and kind[0] == "ptr":
            raise self.fail("pointer values cannot be stored or computed with", node)
        return e

    def signed(self, kind) -> bool:
        return kind == BOOL or kind is True

    def lower(self, node: CExpr) -> tuple[Expr, object]:
        """Returns ``(expr, kind)``; kind is "bool", a signedness flag, or ("ptr", table)."""
        w = self.w
        if isinstance(node, CNum):
            return Lit(node.value & self.mask, w), not node.unsigned
        if isinstance(node, CName):
            n = node.id
            if n in self.params:
                return Arg(n), SCALAR_TYPES[self.params[n]]
            if n in self.decls:
                if n not in self.bound:
                    raise self.fail(f"{n!r} is used before it is assigned", node)
                t = self.decls[n]
                if t.endswith("*"):
                    return Local(n), ("ptr", STRUCTS[t.split()[1]])
                return Local(n), SCALAR_TYPES[t]
            if n in SCALARS:
                return Read(CellRef(FieldPath(n))), SCALARS[n]
            if n in self.consts:
                return Lit(self.consts[n] & self.mask, w), True
            raise self.fail(f"undeclared identifier {n!r}", node)
        if isinstance(node, CRef):
            idx = self.int_value(node.index)
            return idx, ("ptr", node.table)
        if isinstance(node, CMember):
            table, idx = self.pointer(node.base)
            _, scalars, maps = TABLES[table]
            if node.field in maps:
                raise self.fail(f"map field {node.field} needs an index", node)
            if node.field not in scalars:
                raise DomainError(f"{node.loc[0]}:{node.loc[1]}: {table} entries have no field {node.field!r}")
            return Read(CellRef(FieldPath(node.field, table), (idx,))), scalars[node.field]
        if isinstance(node, CIndex):
            if not isinstance(node.base, CMember):
                raise self.fail("indexing is only supported on map fields", node)
            ref = self.lvalue(node)
            return Read(ref), ref.path.signed()
        if isinstance(node, CUnary):
            e, kind = self.lower(node.operand)
            if node.op == "!":
                return Not(self.to_bool(e, kind, node.operand)), BOOL
            e = self.to_int(e, kind, node.operand)
            if node.op == "-":
                return BinOp("sub", Lit(0, w), e, w), self.signed(kind)
            return BinOp("xor", e, Lit(self.mask, w), w), self.signed(kind)
        if isinstance(node, CBinary):
            return self.binary(node)
        if isinstance(node, CCall):
            raise self.fail(f"call to {node.name} was not inlined", node)
        raise self.fail("unsupported expression", node)

    def binary(self, node: CBinary) -> tuple[Expr, object]:
        w = self.w
        op = node.op
        a, ka = self.lower(node.left)
        b, kb = self.lower(node.right)
        if op in ("&&", "||"):
            parts = (self.to_bool(a, ka, node.left), self.to_bool(b, kb, node.right))
            return BoolOp("and" if op == "&&" else "or", parts), BOOL
        for k, n in ((ka, node.left), (kb, node.right)):
            if isinstance(k, tuple):
                raise self.fail("pointer arithmetic and pointer comparison are not supported", n)
        a = self.to_int(a, ka)
        b = self.to_int(b, kb)
        signed = self.signed(ka) and self.signed(kb)
        if op in ("==", "!="):
            return Cmp("eq" if op == "==" else "ne", a, b, w), BOOL
        if op in ("<", "<=", ">", ">="):
            base = {"<": "lt", "<=": "le", ">": "gt", ">=": "ge"}[op]
            return Cmp(("s" if signed else "u") + base, a, b, w), BOOL
        if op == "%":
            raise self.fail("'%' is not supported", node)
        if op == "/":
            return BinOp("sdiv" if signed else "udiv", a, b, w), signed
        if op == "<<":
            return BinOp("shl", a, b, w), self.signed(ka)
        if op == ">>":
            return BinOp("ashr" if self.signed(ka) else "lshr", a, b, w), self.signed(ka)
        names = {"+": "add", "-": "sub", "*": "mul", "&": "and", "|": "or", "^": "xor"}
        return BinOp(names[op], a, b, w), signed


def lower_to_ir(ast: ImplAST, config: KernelConfig | None = None) -> IRFunction:
    """Lower an inlined AST; raises :class:`DomainError` for unmapped lvalues."""
    return _Lowerer(ast, config or KernelConfig()).run()


def frontend(text: str, config: KernelConfig | None = None, lib=None) -> IRFunction:
    """parse -> inline -> lower."""
    from .helpers import inline_helpers
    from .syntax import parse_impl
    return lower_to_ir(inline_helpers(parse_impl(text), lib), config)


__all__ = ["Check", "Update", "Let", "IRFunction", "lower_to_ir", "frontend"]
