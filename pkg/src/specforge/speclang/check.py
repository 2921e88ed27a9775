"""Name resolution and type checking: surface AST -> core expressions.

Every read is tagged with the number of writes that preceded it, so locals
capture the state version current at their definition.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .. import bv
from ..errors import SpecFault, UnknownConstant
from ..expr import (FALSE, TRUE, Arg, BinOp, BoolLit, BoolOp, CellRef, Cmp, Expr, Implies, Ite, Lit,
                    Not, Read)
from ..kernel import SCALARS, TABLES, FieldPath, KernelConfig, constant_table
from . import syntax as S
from .inventory import Inventory, default_inventory

BOOL = "bool"
INT = "int"  # unsized Python integer, always a folded Lit
STATE = "state"

_ARITH = {"+": "add", "-": "sub", "*": "mul", "/": "sdiv", "<<": "shl", ">>": "ashr",
          "|": "or", "&": "and", "^": "xor"}
_ORDER = {"<": "slt", "<=": "sle", ">": "sgt", ">=": "sge"}
_PYFOLD = {"+": lambda a, b: a + b, "-": lambda a, b: a - b, "*": lambda a, b: a * b,
           "<<": lambda a, b: a << b, ">>": lambda a, b: a >> b, "|": lambda a, b: a | b,
           "&": lambda a, b: a & b, "^": lambda a, b: a ^ b}
_PYCMP = {"==": lambda a, b: a == b, "!=": lambda a, b: a != b, "<": lambda a, b: a < b,
          "<=": lambda a, b: a <= b, ">": lambda a, b: a > b, ">=": lambda a, b: a >= b}


@dataclass(frozen=True)
class Write:
    ref: CellRef
    value: Expr
    line: int = 0


@dataclass(frozen=True)
class CheckedSpec:
    """A resolved specification.

    ``guard`` reads only the pre-state.  ``commit`` selects the copied state
    (true) or the old state (false) as the returned post-state.
    """

    name: str
    args: tuple[str, ...]
    guard: Expr
    writes: tuple[Write, ...]
    commit: Expr
    config: KernelConfig


def _fault(kind: str, msg: str, node) -> SpecFault:
    line, col = getattr(node, "loc", (0, 0))
    return SpecFault(kind, msg, line, col)


def _desc(sort) -> str:
    if sort == BOOL:
        return "Bool"
    if sort == INT:
        return "int"
    if sort == STATE:
        return "kernel state"
    return f"BitVec({sort})"


def _versions(e: Expr) -> set[int]:
    out: set[int] = set()

    def walk(x):
        if isinstance(x, Read):
            out.add(x.version)
            for i in x.ref.indices:
                walk(i)
        elif isinstance(x, (BinOp, Cmp, Implies)):
            walk(x.left)
            walk(x.right)
        elif isinstance(x, Not):
            walk(x.arg)
        elif isinstance(x, BoolOp):
            for a in x.args:
                walk(a)
        elif isinstance(x, Ite):
            walk(x.cond)
            walk(x.then)
            walk(x.other)

    walk(e)
    return out


@lru_cache(maxsize=None)
def _macro_body(text: str) -> S.Node:
    p = S.Parser(text)
    return p.parse_expr()


def _substitute(node: S.Node, env: dict[str, S.Node]) -> S.Node:
    if isinstance(node, S.Name):
        return env.get(node.id, node)
    if isinstance(node, S.Attr):
        return S.Attr(_substitute(node.value, env), node.attr, node.loc)
    if isinstance(node, S.Subscript):
        return S.Subscript(_substitute(node.value, env), _substitute(node.index, env), node.loc)
    if isinstance(node, S.Call):
        return S.Call(_substitute(node.func, env), tuple(_substitute(a, env) for a in node.args), node.loc)
    if isinstance(node, S.Unary):
        return S.Unary(node.op, _substitute(node.operand, env), node.loc)
    if isinstance(node, S.BinOp):
        return S.BinOp(node.op, _substitute(node.left, env), _substitute(node.right, env), node.loc)
    if isinstance(node, S.Compare):
        return S.Compare(node.op, _substitute(node.left, env), _substitute(node.right, env), node.loc)
    return node


class _Resolver:
    def __init__(self, fn: S.FunctionDef, config: KernelConfig, inventory: Inventory):
        self.fn = fn
        self.config = config
        self.w = config.word_width
        self.inv = inventory
        self.consts = constant_table(config)
        self.old = fn.params[0]
        self.args = fn.params[1:]
        self.copy: str | None = None
        self.version = 0
        self.locals: dict[str, tuple[Expr, object]] = {}

    # ---------------------------------------------------------------- coercion
    def to_bv(self, e: Expr, sort, width: int, node) -> Expr:
        if sort == INT:
            return Lit(e.value & bv.mask(width), width)
        if sort == width:
            return e
        raise _fault("TypeSortError", f"Sort mismatch: expected BitVec({width}), got {_desc(sort)}", node)

    def to_bool(self, e: Expr, sort, node) -> Expr:
        if sort != BOOL:
            raise _fault("TypeSortError", f"Sort mismatch: expected Bool, got {_desc(sort)}", node)
        return e

    def unify(self, a, b, node) -> tuple[Expr, Expr, int]:
        (ea, sa), (eb, sb) = a, b
        for s in (sa, sb):
            if s in (BOOL, STATE):
                raise _fault("TypeSortError", f"bitvector operation applied to {_desc(s)}", node)
        if sa == INT and sb == INT:
            w = self.w
        elif sa == INT:
            w = sb
        elif sb == INT or sa == sb:
            w = sa
        else:
            raise _fault("TypeSortError", f"Sort mismatch: expected BitVec({sa}), got BitVec({sb})", node)
        return self.to_bv(ea, sa, w, node), self.to_bv(eb, sb, w, node), w

    # ---------------------------------------------------------------- statements
    def run(self) -> CheckedSpec:
        fn = self.fn
        writes: list[Write] = []
        ret: S.Return | None = None
        for stmt in fn.body:
            if ret is not None:
                raise _fault("ParseError", "statement after return", stmt)
            if isinstance(stmt, S.Return):
                ret = stmt
            elif isinstance(stmt, S.ExprStmt):
                self.expr(stmt.value)
            elif isinstance(stmt.target, S.Name):
                self.assign_local(stmt)
            else:
                writes.append(self.assign_field(stmt))
        if ret is None:
            raise _fault("ParseError", "missing return statement", fn)
        if len(ret.values) != 2:
            raise _fault("TypeSortError",
                         f"return must be (condition, state); got {len(ret.values)} value(s)", ret)
        guard_node, state_node = ret.values
        guard, gsort = self.expr(guard_node)
        guard = self.to_bool(guard, gsort, guard_node)
        if any(v > 0 for v in _versions(guard)):
            raise _fault("TypeSortError", "pre-condition reads the updated state", guard_node)
        commit = self.post_state(state_node)
        return CheckedSpec(fn.name, tuple(self.args), guard, tuple(writes), commit, self.config)

    def assign_local(self, stmt: S.Assign):
        name = stmt.target.id
        if stmt.op != "=":
            base = self.expr(stmt.target)
            rhs = self.expr(stmt.value)
            op = "+" if stmt.op == "+=" else "-"
            self.locals[name] = self.arith(op, base, rhs, stmt)
            return
        v = stmt.value
        if (isinstance(v, S.Call) and isinstance(v.func, S.Attr) and v.func.attr == "copy"
                and not v.args):
            root = v.func.value
            if not (isinstance(root, S.Name) and root.id == self.old):
                raise _fault("TypeSortError", "only the old state can be copied", v)
            if self.copy is not None:
                raise _fault("ParseError", "the old state may be copied only once", stmt)
            self.copy = name
            self.locals.pop(name, None)
            return
        if name in (self.old, self.copy):
            raise _fault("TypeSortError", f"cannot rebind state name {name!r}", stmt)
        self.locals[name] = self.expr(v)

    def assign_field(self, stmt: S.Assign) -> Write:
        root, ref = self.field_ref(stmt.target, write=True)
        if root != self.copy:
            raise _fault("TypeSortError", "writes must target the copied state", stmt.target)
        value, vsort = self.expr(stmt.value)
        value = self.to_bv(value, vsort, self.w, stmt.value)
        if stmt.op != "=":
            op = "add" if stmt.op == "+=" else "sub"
            value = BinOp(op, Read(ref, self.version), value, self.w)
        self.version += 1
        return Write(ref, value, stmt.loc[0])

    def post_state(self, node: S.Node) -> Expr:
        if isinstance(node, S.Name) and node.id in (self.old, self.copy):
            return TRUE if node.id == self.copy else FALSE
        if isinstance(node, S.Call) and S.dotted(node.func) == "util.If" and "util.If" in self.inv:
            if len(node.args) != 3:
                raise _fault("TypeSortError", f"util.If takes 3 arguments, got {len(node.args)}", node)
            c, a, b = node.args
            cond = self.to_bool(*self.expr(c), c)
            pa, pb = self.post_state(a), self.post_state(b)
            if pa == pb:
                return pa
            return cond if pa == TRUE else Not(cond)
        e, sort = self.expr(node)
        raise _fault("TypeSortError", f"returned post-state must be a kernel state, got {_desc(sort)}", node)

    # ---------------------------------------------------------------- expressions
    def expr(self, node: S.Node) -> tuple[Expr, object]:
        if isinstance(node, S.Num):
            return Lit(node.value), INT
        if isinstance(node, S.Bool):
            return BoolLit(node.value), BOOL
        if isinstance(node, S.Name):
            return self.name(node)
        if isinstance(node, S.Unary):
            e, s = self.expr(node.operand)
            if s == INT:
                return Lit(-e.value if node.op == "-" else ~e.value), INT
            if s in (BOOL, STATE):
                raise _fault("TypeSortError", f"unary {node.op} applied to {_desc(s)}", node)
            if node.op == "-":
                return BinOp("sub", Lit(0, s), e, s), s
            return BinOp("xor", e, Lit(bv.mask(s), s), s), s
        if isinstance(node, S.BinOp):
            return self.arith(node.op, self.expr(node.left), self.expr(node.right), node)
        if isinstance(node, S.Compare):
            return self.compare(node)
        if isinstance(node, S.Call):
            return self.call(node)
        if isinstance(node, (S.Attr, S.Subscript)):
            d = S.dotted(node)
            if d is not None and d.split(".")[0] == "dt" and "dt" not in self.locals:
                return self.constant(d, node)
            root, ref = self.field_ref(node, write=False)
            return self.read(root, ref, node)
        raise _fault("ParseError", "unsupported expression", node)

    def name(self, node: S.Name):
        n = node.id
        if n in self.locals:
            return self.locals[n]
        if n in (self.old, self.copy):
            return Lit(0), STATE
        if n in self.args:
            return Arg(n), self.w
        raise _fault("ApiReferenceError", f"name {n!r} is not defined", node)

    def constant(self, dotted: str, node):
        try:
            c = self.consts.get(dotted)
        except UnknownConstant as exc:
            if any(k.startswith(dotted[3:] + ".") for k in self.consts.entries):
                raise _fault("TypeSortError", f"{dotted} is a namespace, not a value", node) from None
            raise _fault("ApiReferenceError", str(exc), node) from None
        if c.typed:
            return Lit(c.value & self.config.mask, self.w), self.w
        return Lit(c.value), INT

    def arith(self, op: str, a, b, node):
        (ea, sa), (eb, sb) = a, b
        if sa == INT and sb == INT:
            if op == "/":
                raise _fault("TypeSortError", "integer true division yields a float, not a bitvector", node)
            return Lit(_PYFOLD[op](ea.value, eb.value)), INT
        la, lb, w = self.unify(a, b, node)
        return BinOp(_ARITH[op], la, lb, w), w

    def compare(self, node: S.Compare):
        a = self.expr(node.left)
        b = self.expr(node.right)
        (ea, sa), (eb, sb) = a, b
        op = node.op
        if sa == INT and sb == INT:
            return BoolLit(_PYCMP[op](ea.value, eb.value)), BOOL
        if op in ("==", "!=") and (sa == BOOL or sb == BOOL):
            if sa != sb:
                raise _fault("TypeSortError", f"Sort mismatch: cannot compare {_desc(sa)} with {_desc(sb)}", node)
            return Cmp("eq" if op == "==" else "ne", ea, eb, 0), BOOL
        la, lb, w = self.unify(a, b, node)
        cop = {"==": "eq", "!=": "ne"}.get(op) or _ORDER[op]
        return Cmp(cop, la, lb, w), BOOL

    # ---------------------------------------------------------------- state access
    def field_ref(self, node: S.Node, write: bool) -> tuple[str, CellRef]:
        """Resolve a field access chain to ``(root name, CellRef)``."""
        if isinstance(node, S.Attr) and isinstance(node.value, S.Name):
            root = self.state_root(node.value)
            f = node.attr
            if f in SCALARS:
                return root, CellRef(FieldPath(f))
            if f in TABLES:
                raise _fault("TypeSortError", f"table {f!r} must be indexed", node)
            raise _fault("DomainError", f"kernel state has no field {f!r}", node)
        if isinstance(node, S.Attr) and isinstance(node.value, S.Subscript):
            root, table, idx = self.table_entry(node.value)
            f = node.attr
            _, scalars, maps = TABLES[table]
            if f in scalars:
                return root, CellRef(FieldPath(f, table), (idx,))
            if f in maps:
                raise _fault("TypeSortError",
                             f"map field {table}[].{f} needs a key: read with {f}(key), write with {f}[key]",
                             node)
            raise _fault("DomainError", f"{table} entries have no field {f!r}", node)
        if isinstance(node, (S.Call, S.Subscript)):
            inner = node.func if isinstance(node, S.Call) else node.value
            if isinstance(inner, S.Attr) and isinstance(inner.value, S.Subscript):
                root, table, idx = self.table_entry(inner.value)
                f = inner.attr
                _, scalars, maps = TABLES[table]
                if f in scalars:
                    what = "called" if isinstance(node, S.Call) else "subscripted"
                    raise _fault("TypeSortError", f"scalar field {table}[].{f} cannot be {what}", node)
                if f not in maps:
                    raise _fault("DomainError", f"{table} entries have no field {f!r}", inner)
                if isinstance(node, S.Call):
                    if write:
                        raise _fault("ParseError", S.DUAL_ACCESS_MSG, node)
                    if len(node.args) != 1:
                        raise _fault("TypeSortError", f"map read takes one key, got {len(node.args)}", node)
                    key_node = node.args[0]
                else:
                    if not write:
                        raise _fault("TypeSortError",
                                     f"map field {table}[].{f} is read with parentheses: {f}(key)", node)
                    key_node = node.index
                key = self.to_bv(*self.expr(key_node), self.w, key_node)
                return root, CellRef(FieldPath(f, table, True), (idx, key))
        raise _fault("TypeSortError", "not a kernel state field", node)

    def table_entry(self, node: S.Subscript) -> tuple[str, str, Expr]:
        tab = node.value
        if not (isinstance(tab, S.Attr) and isinstance(tab.value, S.Name)):
            raise _fault("TypeSortError", "not a kernel state table", node)
        root = self.state_root(tab.value)
        if tab.attr not in TABLES:
            if tab.attr in SCALARS:
                raise _fault("TypeSortError", f"scalar field {tab.attr!r} cannot be indexed", node)
            raise _fault("DomainError", f"kernel state has no table {tab.attr!r}", tab)
        idx = self.to_bv(*self.expr(node.index), self.w, node.index)
        return root, tab.attr, idx

    def state_root(self, node: S.Name) -> str:
        if node.id in (self.old, self.copy):
            return node.id
        if node.id in self.locals or node.id in self.args:
            raise _fault("TypeSortError", f"{node.id!r} is not a kernel state", node)
        raise _fault("ApiReferenceError", f"name {node.id!r} is not defined", node)

    def read(self, root: str, ref: CellRef, node):
        version = 0 if root == self.old else self.version
        return Read(ref, version), self.w

    # ---------------------------------------------------------------- calls
    def call(self, node: S.Call):
        fname = S.dotted(node.func)
        if fname is None or fname.split(".")[0] in (self.old, self.copy) or fname.split(".")[0] in self.args:
            if fname is not None and fname.split(".")[0] in (self.old, self.copy):
                if fname.endswith(".copy"):
                    raise _fault("TypeSortError", "state copies must be bound with 'new = old.copy()'", node)
                raise _fault("ApiReferenceError", f"kernel state has no method {fname.split('.', 1)[1]!r}", node)
            root, ref = self.field_ref(node, write=False)
            return self.read(root, ref, node)
        if fname not in self.inv:
            module = fname.split(".")[0] if "." in fname else None
            if module in ("z3", "util"):
                raise _fault("ApiReferenceError",
                             f"module {module!r} has no attribute {fname.split('.', 1)[1]!r} (not in API inventory)",
                             node)
            raise _fault("ApiReferenceError", f"function {fname!r} is not in the API inventory", node)
        entry = self.inv[fname]
        arity = entry.get("arity", len(entry.get("params", ())) if entry["kind"] == "macro" else None)
        if arity is not None and len(node.args) != arity:
            raise _fault("TypeSortError", f"{fname}() takes {arity} arguments, got {len(node.args)}", node)
        kind = entry["kind"]
        if kind == "macro":
            body = _macro_body(entry["body"])
            env = dict(zip(entry["params"], node.args))
            try:
                return self.expr(_substitute(body, env))
            except SpecFault as exc:
                raise SpecFault(exc.kind, f"in {fname}(): {exc.message}", *node.loc) from None
        if kind == "if":
            c, a, b = node.args
            cond = self.to_bool(*self.expr(c), c)
            ra, rb = self.expr(a), self.expr(b)
            if ra[1] == BOOL or rb[1] == BOOL:
                return Ite(cond, self.to_bool(*ra, a), self.to_bool(*rb, b)), BOOL
            la, lb, w = self.unify(ra, rb, node)
            return Ite(cond, la, lb), w
        if kind == "bitvecval":
            vnode, wnode = node.args
            (ve, vs), (we, ws) = self.expr(vnode), self.expr(wnode)
            if ws != INT or we.value <= 0:
                raise _fault("TypeSortError", "BitVecVal width must be a positive integer", wnode)
            if vs != INT:
                raise _fault("TypeSortError", f"BitVecVal value must be an integer, got {_desc(vs)}", vnode)
            return Lit(ve.value & bv.mask(we.value), we.value), we.value
        args = [self.expr(a) for a in node.args]
        if kind in ("and", "or"):
            parts = tuple(self.to_bool(e, s, a) for (e, s), a in zip(args, node.args))
            return BoolOp(kind, parts), BOOL
        if kind == "not":
            return Not(self.to_bool(*args[0], node.args[0])), BOOL
        if kind == "implies":
            return Implies(self.to_bool(*args[0], node.args[0]), self.to_bool(*args[1], node.args[1])), BOOL
        if args[0][1] == INT and args[1][1] == INT:
            raise _fault("TypeSortError", f"{fname}() needs at least one bitvector operand", node)
        la, lb, w = self.unify(args[0], args[1], node)
        if kind == "cmp":
            return Cmp(entry["op"], la, lb, w), BOOL
        return BinOp(entry["op"], la, lb, w), w


@lru_cache(maxsize=4096)
def check_spec(fn: S.FunctionDef, config: KernelConfig, inventory: Inventory | None = None) -> CheckedSpec:
    """Resolve and type check; raises :class:`SpecFault`."""
    return _Resolver(fn, config, inventory or default_inventory()).run()
