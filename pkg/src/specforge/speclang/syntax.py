"""Lexer, parser and printer for the specification surface language.

The grammar is a closed, Python-shaped fragment: one ``def``, straight-line
assignments, one ``return``.  Text is never executed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

from ..errors import SpecFault

# --------------------------------------------------------------------------
# tokens


@dataclass(frozen=True)
class Token:
    kind: str  # NAME NUMBER OP NEWLINE EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\f]+|\\\r?\n)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\r?\n)
  | (?P<number>0[xX][0-9a-fA-F_]+|0[bB][01_]+|\d[\d_]*)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><<|>>|==|!=|<=|>=|\+=|-=|[()\[\],:.=<>+\-*/|&^~])
    """,
    re.VERBOSE,
)

_CONTINUES = {"=", "+=", "-=", ",", "(", "[", ".", "+", "-", "*", "/", "|", "&", "^", "<<", ">>",
              "==", "!=", "<", ">", "<=", ">=", "~"}
_PY_KEYWORDS = {"and": "z3.And", "or": "z3.Or", "not": "z3.Not"}
_FORBIDDEN = {"if", "else", "elif", "for", "while", "lambda", "class", "with", "try", "except",
              "yield", "global", "nonlocal", "del", "assert", "pass", "in", "is", "None"}


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    depth = 0
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise SpecFault("ParseError", f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        pos = m.end()
        if kind == "ws":
            if s.startswith("\\"):
                line += 1
                line_start = pos
            continue
        if kind == "comment":
            continue
        if kind == "newline":
            prev = tokens[-1] if tokens else None
            if depth == 0 and prev is not None and prev.kind != "NEWLINE" and not (
                    prev.kind == "OP" and prev.text in _CONTINUES):
                tokens.append(Token("NEWLINE", "\n", line, col))
            line += 1
            line_start = pos
            continue
        if kind == "op":
            if s in "([":
                depth += 1
            elif s in ")]":
                depth = max(0, depth - 1)
            tokens.append(Token("OP", s, line, col))
        else:
            tokens.append(Token(kind.upper(), s, line, col))
    if tokens and tokens[-1].kind != "NEWLINE":
        tokens.append(Token("NEWLINE", "\n", line, 1))
    tokens.append(Token("EOF", "", line + 1, 1))
    return tokens


# --------------------------------------------------------------------------
# surface AST


def _loc():
    return field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Name:
    id: str
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class Num:
    value: int
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class Bool:
    value: bool
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class Attr:
    value: "Node"
    attr: str
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class Subscript:
    value: "Node"
    index: "Node"
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class Call:
    func: "Node"
    args: tuple["Node", ...]
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class Unary:
    op: str  # "-" | "~"
    operand: "Node"
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class Compare:
    op: str
    left: "Node"
    right: "Node"
    loc: tuple[int, int] = _loc()


Node = Union[Name, Num, Bool, Attr, Subscript, Call, Unary, BinOp, Compare]


@dataclass(frozen=True)
class Assign:
    target: Node
    op: str  # "=" | "+=" | "-="
    value: Node
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class Return:
    values: tuple[Node, ...]
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class ExprStmt:
    value: Node
    loc: tuple[int, int] = _loc()


Stmt = Union[Assign, Return, ExprStmt]


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: tuple[str, ...]
    body: tuple[Stmt, ...]
    imports: tuple[str, ...] = ()
    loc: tuple[int, int] = _loc()


def dotted(node: Node) -> str | None:
    """``z3.And`` for Attr(Name(z3), And); None for anything not a dotted name."""
    if isinstance(node, Name):
        return node.id
    if isinstance(node, Attr):
        base = dotted(node.value)
        return None if base is None else f"{base}.{node.attr}"
    return None


def walk(node: Node):
    yield node
    if isinstance(node, (Attr,)):
        yield from walk(node.value)
    elif isinstance(node, Subscript):
        yield from walk(node.value)
        yield from walk(node.index)
    elif isinstance(node, Call):
        yield from walk(node.func)
        for a in node.args:
            yield from walk(a)
    elif isinstance(node, Unary):
        yield from walk(node.operand)
    elif isinstance(node, (BinOp, Compare)):
        yield from walk(node.left)
        yield from walk(node.right)


# --------------------------------------------------------------------------
# parser

_COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=")
_LEVELS = [("|",), ("^",), ("&",), ("<<", ">>"), ("+", "-"), ("*", "/")]

DUAL_ACCESS_MSG = ("map field writes must use brackets: write new.<map>[key] = value; "
                   "parentheses are for reads only")


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    # helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("OP", "NAME") and t.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}, found {self.tok.text or self.tok.kind!r}")
        return self.advance()

    def fail(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise SpecFault("ParseError", msg, tok.line, tok.col)

    def skip_newlines(self):
        while self.tok.kind == "NEWLINE":
            self.advance()

    def name(self) -> str:
        t = self.tok
        if t.kind != "NAME":
            self.fail(f"expected a name, found {t.text or t.kind!r}")
        self.check_keyword(t)
        return self.advance().text

    def check_keyword(self, t: Token):
        if t.text in _PY_KEYWORDS:
            self.fail(f"Python operator '{t.text}' is not allowed on Z3 terms; use {_PY_KEYWORDS[t.text]}", t)
        if t.text in _FORBIDDEN:
            self.fail(f"'{t.text}' is outside the specification grammar", t)

    # grammar
    def parse_file(self) -> FunctionDef:
        imports: list[str] = []
        self.skip_newlines()
        while self.at("import") or self.at("from"):
            start = self.advance()
            parts = [start.text]
            while self.tok.kind not in ("NEWLINE", "EOF"):
                parts.append(self.advance().text)
            imports.append(" ".join(parts))
            self.skip_newlines()
        if not self.at("def"):
            self.fail("expected a single 'def'")
        fn = self.parse_def()
        self.skip_newlines()
        if self.tok.kind != "EOF":
            self.fail("only one 'def' is allowed per specification")
        return fn

    def parse_def(self) -> FunctionDef:
        start = self.expect("def")
        name = self.name()
        self.expect("(")
        params: list[str] = []
        while not self.at(")"):
            params.append(self.name())
            if not self.at(")"):
                self.expect(",")
        self.expect(")")
        self.expect(":")
        if not params:
            self.fail("a specification takes the old state as first parameter")
        body: list[Stmt] = []
        self.skip_newlines()
        while self.tok.kind != "EOF" and not self.at("def"):
            body.append(self.parse_stmt())
            self.skip_newlines()
        if not body:
            self.fail("empty function body")
        return FunctionDef(name, tuple(params), tuple(body), (), (start.line, start.col))

    def parse_stmt(self) -> Stmt:
        start = self.tok
        loc = (start.line, start.col)
        if self.at("return"):
            self.advance()
            values = [self.parse_expr()]
            while self.at(","):
                self.advance()
                if self.tok.kind == "NEWLINE":
                    break
                values.append(self.parse_expr())
            self.end_stmt()
            return Return(tuple(values), loc)
        target = self.parse_expr()
        if self.tok.kind == "OP" and self.tok.text in ("=", "+=", "-="):
            op_tok = self.advance()
            self.check_target(target, op_tok)
            value = self.parse_expr()
            self.end_stmt()
            return Assign(target, op_tok.text, value, loc)
        self.end_stmt()
        return ExprStmt(target, loc)

    def check_target(self, target: Node, op_tok: Token):
        if isinstance(target, Call):
            if isinstance(target.func, Attr) and len(target.args) == 1:
                raise SpecFault("ParseError", DUAL_ACCESS_MSG, *target.loc)
            raise SpecFault("ParseError", "cannot assign to a function call", *target.loc)
        if not isinstance(target, (Name, Attr, Subscript)):
            raise SpecFault("ParseError", "invalid assignment target", op_tok.line, op_tok.col)

    def end_stmt(self):
        if self.tok.kind == "NEWLINE":
            self.advance()
        elif self.tok.kind != "EOF":
            self.fail(f"unexpected {self.tok.text!r} at end of statement")

    def parse_expr(self) -> Node:
        left = self.parse_level(0)
        if self.tok.kind == "OP" and self.tok.text in _COMPARE_OPS:
            op = self.advance()
            right = self.parse_level(0)
            if self.tok.kind == "OP" and self.tok.text in _COMPARE_OPS:
                self.fail("chained comparisons are not supported")
            return Compare(op.text, left, right, (op.line, op.col))
        return left

    def parse_level(self, level: int) -> Node:
        if level == len(_LEVELS):
            return self.parse_unary()
        left = self.parse_level(level + 1)
        while self.tok.kind == "OP" and self.tok.text in _LEVELS[level]:
            op = self.advance()
            right = self.parse_level(level + 1)
            left = BinOp(op.text, left, right, (op.line, op.col))
        return left

    def parse_unary(self) -> Node:
        if self.tok.kind == "OP" and self.tok.text in ("-", "~"):
            op = self.advance()
            return Unary(op.text, self.parse_unary(), (op.line, op.col))
        return self.parse_postfix()

    def parse_postfix(self) -> Node:
        node = self.parse_atom()
        while True:
            t = self.tok
            if self.at("."):
                self.advance()
                node = Attr(node, self.name(), (t.line, t.col))
            elif self.at("["):
                self.advance()
                idx = self.parse_expr()
                self.expect("]")
                node = Subscript(node, idx, (t.line, t.col))
            elif self.at("("):
                self.advance()
                args: list[Node] = []
                while not self.at(")"):
                    args.append(self.parse_expr())
                    if not self.at(")"):
                        self.expect(",")
                self.expect(")")
                node = Call(node, tuple(args), (t.line, t.col))
            else:
                return node

    def parse_atom(self) -> Node:
        t = self.tok
        loc = (t.line, t.col)
        if t.kind == "NUMBER":
            self.advance()
            return Num(int(t.text.replace("_", ""), 0), loc)
        if t.kind == "NAME":
            if t.text in ("True", "False"):
                self.advance()
                return Bool(t.text == "True", loc)
            return Name(self.name(), loc)
        if self.at("("):
            self.advance()
            e = self.parse_expr()
            if self.at(","):
                self.fail("tuples are only allowed in the return statement")
            self.expect(")")
            return e
        self.fail(f"unexpected {t.text or t.kind!r}")


def parse_function(text: str) -> FunctionDef:
    p = Parser(text)
    fn = p.parse_file()
    return fn


# --------------------------------------------------------------------------
# printer


def show(node: Node) -> str:
    if isinstance(node, Name):
        return node.id
    if isinstance(node, Num):
        return str(node.value) if node.value < 4096 else hex(node.value)
    if isinstance(node, Bool):
        return str(node.value)
    if isinstance(node, Attr):
        return f"{show(node.value)}.{node.attr}"
    if isinstance(node, Subscript):
        return f"{show(node.value)}[{show(node.index)}]"
    if isinstance(node, Call):
        return f"{show(node.func)}({', '.join(show(a) for a in node.args)})"
    if isinstance(node, Unary):
        return f"({node.op}{show(node.operand)})"
    if isinstance(node, (BinOp, Compare)):
        return f"({show(node.left)} {node.op} {show(node.right)})"
    raise TypeError(node)


def show_stmt(stmt: Stmt) -> str:
    if isinstance(stmt, Assign):
        return f"{show(stmt.target)} {stmt.op} {show(stmt.value)}"
    if isinstance(stmt, Return):
        return "return " + ", ".join(show(v) for v in stmt.values)
    return show(stmt.value)


def pretty(fn: FunctionDef) -> str:
    lines = list(fn.imports)
    lines.append(f"def {fn.name}({', '.join(fn.params)}):")
    lines += ["    " + show_stmt(s) for s in fn.body]
    return "\n".join(lines) + "\n"
