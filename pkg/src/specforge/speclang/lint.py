"""Static convention checks over the surface AST.

Findings carry the guide category they correspond to.  Lints never raise.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass

from ..kernel import SCALARS, TABLES
from . import syntax as S
from .inventory import Inventory, default_inventory

LINT_CATEGORIES = (3, 4, 5, 6, 11, 14)
_CAPS = re.compile(r"^[A-Z][A-Z0-9_]+$")


@dataclass(frozen=True, order=True)
class LintFinding:
    line: int
    col: int
    category: int
    severity: str
    message: str

    def to_dict(self) -> dict:
        return asdict(self)


def findings_to_json(findings: list[LintFinding]) -> str:
    return json.dumps([f.to_dict() for f in findings], indent=2, sort_keys=True)


class _Linter:
    def __init__(self, fn: S.FunctionDef, inventory: Inventory):
        self.fn = fn
        self.inv = inventory
        self.old = fn.params[0]
        self.states = {self.old}
        self.locals: set[str] = set(fn.params)
        self.out: list[LintFinding] = []

    def add(self, cat: int, node, msg: str, severity: str = "error"):
        line, col = getattr(node, "loc", (0, 0))
        self.out.append(LintFinding(line, col, cat, severity, msg))

    def run(self) -> list[LintFinding]:
        for stmt in self.fn.body:
            if isinstance(stmt, S.Assign):
                self.stmt_assign(stmt)
            elif isinstance(stmt, S.Return):
                for v in stmt.values:
                    self.expr(v)
                if len(stmt.values) == 2:
                    post = stmt.values[1]
                    if not (isinstance(post, S.Call) and S.dotted(post.func) == "util.If"):
                        self.add(3, post, "return the post-state as util.If(cond, new, old)")
            else:
                self.expr(stmt.value)
        return sorted(set(self.out))

    def stmt_assign(self, stmt: S.Assign):
        t = stmt.target
        v = stmt.value
        if isinstance(t, S.Name):
            if isinstance(v, S.Call) and isinstance(v.func, S.Attr) and v.func.attr == "copy":
                self.states.add(t.id)
            else:
                self.expr(v)
            self.locals.add(t.id)
            return
        root = _root(t)
        if root == self.old:
            self.add(3, t, "writes go to the copied state (new.*), never to old")
        self.target(t)
        self.expr(v)

    def target(self, t: S.Node):
        # the key and table index of a write target are reads
        if isinstance(t, S.Subscript):
            self.expr(t.index)
            self.target(t.value)
        elif isinstance(t, S.Attr):
            if isinstance(t.value, S.Subscript):
                self.target_table(t.value)
            self.ptr_name(t)

    def target_table(self, sub: S.Subscript):
        self.expr(sub.index)

    def ptr_name(self, node: S.Attr):
        if isinstance(node.value, S.Name) and node.value.id in self.states:
            if "_ptr" in node.attr and node.attr not in SCALARS:
                self.add(11, node, f"unknown state pointer {node.attr!r}; the page array base is pages_ptr_to_int")

    def expr(self, node: S.Node, called: bool = False):
        if isinstance(node, S.Name):
            if _CAPS.match(node.id) and node.id not in self.locals:
                self.add(6, node, f"constant {node.id} must be written dt.{node.id}")
        elif isinstance(node, S.Attr):
            self.ptr_name(node)
            if isinstance(node.value, S.Subscript) and not called:
                table = _table_name(node.value)
                if table and node.attr in TABLES[table][2]:
                    self.add(4, node, f"map field {node.attr} needs a key: read with {node.attr}(key)")
            if not _is_module_chain(node):
                self.expr(node.value)
        elif isinstance(node, S.Subscript):
            inner = node.value
            if isinstance(inner, S.Attr) and isinstance(inner.value, S.Subscript):
                table = _table_name(inner.value)
                if table and inner.attr in TABLES[table][2]:
                    self.add(4, node, f"map field {inner.attr} is read with parentheses: {inner.attr}(key)")
                self.expr(inner.value)
            else:
                self.expr(inner)
            self.expr(node.index)
        elif isinstance(node, S.Call):
            self.call(node)
        elif isinstance(node, S.Unary):
            self.expr(node.operand)
        elif isinstance(node, S.BinOp):
            if node.op in ("/", ">>"):
                self.add(5, node, f"'{node.op}' is signed on bitvectors; use z3.UDiv for unsigned division",
                         "warning")
            self.expr(node.left)
            self.expr(node.right)
        elif isinstance(node, S.Compare):
            self.expr(node.left)
            self.expr(node.right)

    def call(self, node: S.Call):
        name = S.dotted(node.func)
        for a in node.args:
            self.expr(a)
        func = node.func
        if name is None:
            if isinstance(func, S.Attr) and isinstance(func.value, S.Subscript):
                table = _table_name(func.value)
                if table and func.attr in TABLES[table][1]:
                    self.add(4, node, f"scalar field {func.attr} is not callable")
            self.expr(func, called=True)
            return
        if name.split(".")[0] in self.states:
            return
        if name not in self.inv:
            self.add(14, node, f"{name} is not in the API inventory")


def _root(node: S.Node) -> str | None:
    while isinstance(node, (S.Attr, S.Subscript, S.Call)):
        node = node.func if isinstance(node, S.Call) else node.value
    return node.id if isinstance(node, S.Name) else None


def _table_name(sub: S.Subscript) -> str | None:
    t = sub.value
    if isinstance(t, S.Attr) and t.attr in TABLES:
        return t.attr
    return None


def _is_module_chain(node: S.Attr) -> bool:
    d = S.dotted(node)
    return d is not None and d.split(".")[0] in ("dt", "z3", "util")


def lint_spec(fn: S.FunctionDef, inventory: Inventory | None = None) -> list[LintFinding]:
    return _Linter(fn, inventory or default_inventory()).run()
