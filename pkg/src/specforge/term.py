"""Hash-consed QF_BV terms.

Terms are interned, so structurally equal terms are the same object and
``is`` comparison is exact.  Builders fold constants eagerly; a query whose
mismatch formula folds to ``false`` is still emitted and sent to the solver.
"""

from __future__ import annotations

import weakref
from typing import Iterable, Sequence

from . import bv

BOOL = 0  # width 0 denotes the Bool sort


class Term:
    __slots__ = ("op", "args", "val", "width", "__weakref__")

    def __init__(self, op: str, args: tuple["Term", ...], val, width: int):
        self.op = op
        self.args = args
        self.val = val
        self.width = width

    @property
    def is_const(self) -> bool:
        return self.op == "const"

    def __repr__(self) -> str:
        if self.op == "const":
            return f"<{self.val}:{self.width}>"
        if self.op == "var":
            return f"<{self.val}>"
        return f"<{self.op}/{len(self.args)}>"


_table: "weakref.WeakValueDictionary[tuple, Term]" = weakref.WeakValueDictionary()


def _mk(op: str, args: tuple[Term, ...], val, width: int) -> Term:
    key = (op, tuple(id(a) for a in args), val, width)
    t = _table.get(key)
    if t is None:
        t = Term(op, args, val, width)
        _table[key] = t
    return t


def const(v: int, width: int) -> Term:
    return _mk("const", (), v & bv.mask(width), width)


def boolean(b: bool) -> Term:
    return _mk("const", (), bool(b), BOOL)


TRUE = boolean(True)
FALSE = boolean(False)


def var(name: str, width: int) -> Term:
    return _mk("var", (), name, width)


_BVOPS = {"add": "bvadd", "sub": "bvsub", "mul": "bvmul", "udiv": "bvudiv", "sdiv": "bvsdiv",
          "shl": "bvshl", "lshr": "bvlshr", "ashr": "bvashr", "or": "bvor", "and": "bvand", "xor": "bvxor"}
_CMPOPS = {"ult": "bvult", "ule": "bvule", "ugt": "bvugt", "uge": "bvuge",
           "slt": "bvslt", "sle": "bvsle", "sgt": "bvsgt", "sge": "bvsge"}
_INV = {v: k for k, v in {**_BVOPS, **_CMPOPS}.items()}


def bvop(op: str, a: Term, b: Term) -> Term:
    w = a.width
    if a.is_const and b.is_const:
        return const(bv.binop(op, a.val, b.val, w), w)
    if op in ("add", "or", "xor", "shl", "lshr") and b.is_const and b.val == 0:
        return a
    if op in ("add", "or", "xor") and a.is_const and a.val == 0:
        return b
    return _mk(_BVOPS[op], (a, b), None, w)


def eq(a: Term, b: Term) -> Term:
    if a is b:
        return TRUE
    if a.is_const and b.is_const:
        return boolean(a.val == b.val)
    return _mk("=", (a, b), None, BOOL)


def cmp(op: str, a: Term, b: Term) -> Term:
    if op == "eq":
        return eq(a, b)
    if op == "ne":
        return not_(eq(a, b))
    if a.is_const and b.is_const:
        return boolean(bv.compare(op, a.val, b.val, a.width))
    return _mk(_CMPOPS[op], (a, b), None, BOOL)


def not_(a: Term) -> Term:
    if a.is_const:
        return boolean(not a.val)
    if a.op == "not":
        return a.args[0]
    return _mk("not", (a,), None, BOOL)


def _nary(op: str, xs: Iterable[Term]) -> Term:
    unit, zero = (TRUE, FALSE) if op == "and" else (FALSE, TRUE)
    out: list[Term] = []
    seen: set[int] = set()
    for x in xs:
        parts = x.args if x.op == op else (x,)
        for p in parts:
            if p is zero:
                return zero
            if p is unit or id(p) in seen:
                continue
            seen.add(id(p))
            out.append(p)
    if not out:
        return unit
    if len(out) == 1:
        return out[0]
    return _mk(op, tuple(out), None, BOOL)


def and_(*xs: Term) -> Term:
    return _nary("and", xs)


def or_(*xs: Term) -> Term:
    return _nary("or", xs)


def implies(a: Term, b: Term) -> Term:
    return or_(not_(a), b)


def xor(a: Term, b: Term) -> Term:
    if a.is_const and b.is_const:
        return boolean(a.val != b.val)
    if a is b:
        return FALSE
    return _mk("xor", (a, b), None, BOOL)


def ite(c: Term, t: Term, e: Term) -> Term:
    if c.is_const:
        return t if c.val else e
    if t is e:
        return t
    if t.width == BOOL:
        if t is TRUE and e is FALSE:
            return c
        if t is FALSE and e is TRUE:
            return not_(c)
    return _mk("ite", (c, t, e), None, t.width)


# --------------------------------------------------------------------------
# traversal


def topo(roots: Sequence[Term]) -> list[Term]:
    """Post-order list of all distinct subterms (children before parents)."""
    order: list[Term] = []
    seen: set[int] = set()
    for root in roots:
        stack: list[tuple[Term, bool]] = [(root, False)]
        while stack:
            t, expanded = stack.pop()
            if expanded:
                order.append(t)
                continue
            if id(t) in seen:
                continue
            seen.add(id(t))
            stack.append((t, True))
            for a in reversed(t.args):
                if id(a) not in seen:
                    stack.append((a, False))
    return order


def variables(roots: Sequence[Term]) -> list[Term]:
    return [t for t in topo(roots) if t.op == "var"]


# --------------------------------------------------------------------------
# SMT-LIB printing


def sort(width: int) -> str:
    return "Bool" if width == BOOL else f"(_ BitVec {width})"


def literal(t: Term) -> str:
    if t.width == BOOL:
        return "true" if t.val else "false"
    if t.width % 4 == 0:
        return "#x" + format(t.val, f"0{t.width // 4}x")
    return "#b" + format(t.val, f"0{t.width}b")


def to_smtlib(named: Sequence[tuple[str, Term]], prefix: str = "_t") -> tuple[list[str], list[str]]:
    """Render named roots.

    Returns ``(definitions, root_texts)``: ``define-fun`` lines for every
    shared compound subterm, and the inline text of each root.
    """
    roots = [t for _, t in named]
    order = topo(roots)
    uses: dict[int, int] = {}
    for t in order:
        for a in t.args:
            uses[id(a)] = uses.get(id(a), 0) + 1
    text: dict[int, str] = {}
    defs: list[str] = []
    n = 0
    for t in order:
        if t.op == "const":
            s = literal(t)
        elif t.op == "var":
            s = t.val
        else:
            s = f"({t.op} {' '.join(text[id(a)] for a in t.args)})"
            if uses.get(id(t), 0) > 1:
                name = f"{prefix}{n}"
                n += 1
                defs.append(f"(define-fun {name} () {sort(t.width)} {s})")
                s = name
        text[id(t)] = s
    return defs, [text[id(t)] for t in roots]


# --------------------------------------------------------------------------
# concrete evaluation by code generation


def compile_terms(roots: Sequence[Term]):
    """Build ``f(env) -> list`` evaluating ``roots`` under ``env: name -> int``.

    Unassigned variables default to 0.
    """
    order = topo(roots)
    idx = {id(t): i for i, t in enumerate(order)}
    lines = ["def _f(env):"]
    for i, t in enumerate(order):
        a = [f"t{idx[id(x)]}" for x in t.args]
        op, w = t.op, t.width
        if op == "const":
            rhs = repr(t.val)
        elif op == "var":
            rhs = f"env.get({t.val!r}, 0)"
        elif op in ("bvadd", "bvsub", "bvmul"):
            sym = {"bvadd": "+", "bvsub": "-", "bvmul": "*"}[op]
            rhs = f"({a[0]} {sym} {a[1]}) & {bv.mask(w)}"
        elif op in ("bvor", "bvand", "bvxor"):
            sym = {"bvor": "|", "bvand": "&", "bvxor": "^"}[op]
            rhs = f"{a[0]} {sym} {a[1]}"
        elif op in _INV and op.startswith("bv") and w != BOOL:
            rhs = f"_binop({_INV[op]!r}, {a[0]}, {a[1]}, {w})"
        elif op in _INV:
            rhs = f"_compare({_INV[op]!r}, {a[0]}, {a[1]}, {t.args[0].width})"
        elif op == "=":
            rhs = f"{a[0]} == {a[1]}"
        elif op == "not":
            rhs = f"not {a[0]}"
        elif op == "and":
            rhs = " and ".join(a)
        elif op == "or":
            rhs = " or ".join(a)
        elif op == "xor":
            rhs = f"{a[0]} != {a[1]}"
        elif op == "ite":
            rhs = f"{a[1]} if {a[0]} else {a[2]}"
        else:
            raise ValueError(f"cannot compile term op {op}")
        lines.append(f"    t{i} = {rhs}")
    lines.append("    return [" + ", ".join(f"t{idx[id(r)]}" for r in roots) + "]")
    ns = {"_binop": bv.binop, "_compare": bv.compare}
    exec(compile("\n".join(lines), "<terms>", "exec"), ns)
    return ns["_f"]
