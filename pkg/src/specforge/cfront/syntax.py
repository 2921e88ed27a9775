"""Lexer and parser for the loop-free C subset used by syscall bodies."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

from ..errors import UnsupportedConstruct
from ..kernel import SCALARS as STATE_SCALARS

SCALAR_TYPES = {
    # name -> signed
    "int": True, "long": True, "pid_t": True, "off_t": True, "int64_t": True,
    "pn_t": False, "fd_t": False, "size_t": False, "uint64_t": False, "uintptr_t": False,
}
STRUCTS = {"proc": "procs", "page": "pages"}

_KEYWORDS_UNSUPPORTED = {"while", "for", "do", "switch", "case", "goto", "else", "break", "continue",
                         "sizeof", "static", "const", "unsigned", "signed", "char", "short", "void",
                         "union", "enum", "typedef", "volatile", "extern", "default"}


@dataclass(frozen=True)
class Tok:
    kind: str  # NAME NUMBER OP EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<newline>\n)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<number>0[xX][0-9a-fA-F]+[uUlL]*|\d+[uUlL]*)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>->|\+\+|--|&&|\|\||==|!=|<=|>=|<<|>>|\+=|-=|\*=|/=|\|=|&=|[{}()\[\];,=<>+\-*/%&|^!~?:.\#])
    """,
    re.VERBOSE | re.DOTALL,
)


def tokenize(text: str) -> list[Tok]:
    out: list[Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise UnsupportedConstruct(f"unexpected character {text[pos]!r}", line, col)
        kind, s = m.lastgroup, m.group()
        if kind in ("newline", "comment"):
            nl = s.count("\n")
            if nl:
                line += nl
                line_start = pos + s.rindex("\n") + 1
        elif kind != "ws":
            if kind == "op" and s == "#":
                raise UnsupportedConstruct("preprocessor directives are not supported", line, col)
            out.append(Tok(kind.upper(), s, line, col))
        pos = m.end()
    out.append(Tok("EOF", "", line + 1, 1))
    return out


def _loc():
    return field(default=(0, 0), compare=False, repr=False)


# expressions

@dataclass(frozen=True)
class CName:
    id: str
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class CNum:
    value: int
    unsigned: bool = False
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class CUnary:
    op: str  # ! - ~
    operand: "CExpr"
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class CBinary:
    op: str
    left: "CExpr"
    right: "CExpr"
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class CMember:
    base: "CExpr"
    field: str
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class CIndex:
    base: "CExpr"
    index: "CExpr"
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class CCall:
    name: str
    args: tuple["CExpr", ...]
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class CRef:
    """A table entry produced by an inlined accessor helper (``get_proc``)."""

    table: str
    index: "CExpr"
    loc: tuple[int, int] = _loc()


CExpr = Union[CName, CNum, CUnary, CBinary, CMember, CIndex, CCall, CRef]


# statements

@dataclass(frozen=True)
class Decl:
    ctype: str  # scalar type name or "struct proc *"
    name: str
    loc: tuple[int, int] = _loc()

    @property
    def is_pointer(self) -> bool:
        return self.ctype.endswith("*")


@dataclass(frozen=True)
class ErrorCheck:
    cond: CExpr
    errcode: str
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class Assign:
    lvalue: CExpr
    op: str  # = += -=
    value: CExpr
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class Bind:
    """``proc = get_proc(pid);`` or a local scalar initializer."""

    name: str
    value: CExpr
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class HelperCall:
    name: str
    args: tuple[CExpr, ...]
    loc: tuple[int, int] = _loc()


@dataclass(frozen=True)
class ReturnZero:
    loc: tuple[int, int] = _loc()


CStmt = Union[ErrorCheck, Assign, Bind, HelperCall, ReturnZero]


@dataclass(frozen=True)
class ImplAST:
    name: str
    params: tuple[tuple[str, str], ...]  # (ctype, name)
    decls: tuple[Decl, ...]
    body: tuple[CStmt, ...]
    annotations: tuple[str, ...] = ()

    def count(self, kind: type) -> int:
        return sum(isinstance(s, kind) for s in self.body)


# --------------------------------------------------------------------------

_BINARY_LEVELS = [("||",), ("&&",), ("|",), ("^",), ("&",), ("==", "!="), ("<", "<=", ">", ">="),
                  ("<<", ">>"), ("+", "-"), ("*", "/", "%")]


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.kind in ("OP", "NAME") and self.tok.text == text

    def advance(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg: str, tok: Tok | None = None):
        tok = tok or self.tok
        raise UnsupportedConstruct(msg, tok.line, tok.col)

    def expect(self, text: str) -> Tok:
        if not self.at(text):
            self.fail(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def name(self) -> str:
        t = self.tok
        if t.kind != "NAME":
            self.fail(f"expected a name, found {t.text or 'end of input'!r}")
        if t.text in _KEYWORDS_UNSUPPORTED:
            self.fail(f"'{t.text}' is outside the supported C subset")
        return self.advance().text

    def is_type_start(self) -> bool:
        return self.tok.kind == "NAME" and (self.tok.text in SCALAR_TYPES or self.tok.text == "struct")

    def ctype(self) -> str:
        if self.at("struct"):
            self.advance()
            s = self.name()
            if s not in STRUCTS:
                self.fail(f"unknown struct {s!r}")
            self.expect("*")
            if self.at("*"):
                self.fail("pointers to pointers are not supported")
            return f"struct {s} *"
        t = self.tok
        if t.kind == "NAME" and t.text in SCALAR_TYPES:
            self.advance()
            if self.at("*"):
                self.fail("pointers to scalars are not supported")
            return t.text
        if t.kind == "NAME" and t.text in _KEYWORDS_UNSUPPORTED:
            self.fail(f"'{t.text}' is outside the supported C subset")
        self.fail(f"unknown type {t.text!r}")

    # top level
    def function(self) -> ImplAST:
        ret = self.tok
        if not self.at("int"):
            self.fail("syscalls must return int")
        self.advance()
        name = self.name()
        self.expect("(")
        params: list[tuple[str, str]] = []
        if self.at("void"):
            self.advance()
        elif not self.at(")"):
            while True:
                ty = self.ctype()
                params.append((ty, self.name()))
                if self.at(")"):
                    break
                self.expect(",")
        self.expect(")")
        self.expect("{")
        decls: list[Decl] = []
        body: list[CStmt] = []
        known = {n for _, n in params}
        while not self.at("}"):
            if self.tok.kind == "EOF":
                self.fail("unterminated function body")
            if self.is_type_start():
                stmt = self.declaration(decls, known)
                if stmt is not None:
                    body.append(stmt)
                continue
            if body and isinstance(body[-1], ReturnZero):
                self.fail("statement after 'return 0'")
            body.append(self.statement())
        self.expect("}")
        if self.tok.kind != "EOF":
            self.fail("only one function per file")
        if not body or not isinstance(body[-1], ReturnZero):
            self.fail("function must end with 'return 0;'", ret)
        return ImplAST(name, tuple(params), tuple(decls), tuple(body))

    def declaration(self, decls: list[Decl], known: set[str]) -> CStmt | None:
        start = self.tok
        ty = self.ctype()
        while True:
            nt = self.tok
            n = self.name()
            if n in known:
                self.fail(f"redeclaration of {n!r}", nt)
            known.add(n)
            decls.append(Decl(ty, n, (nt.line, nt.col)))
            if self.at("="):
                self.advance()
                value = self.expr()
                self.expect(";")
                return Bind(n, value, (start.line, start.col))
            if self.at(";"):
                self.advance()
                return None
            self.expect(",")
            if ty.endswith("*"):
                self.expect("*")

    def statement(self) -> CStmt:
        t = self.tok
        loc = (t.line, t.col)
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            braced = self.at("{")
            if braced:
                self.advance()
            if not self.at("return"):
                self.fail("only 'if (cond) return -ERR;' is supported")
            self.advance()
            err = self.errcode()
            self.expect(";")
            if braced:
                self.expect("}")
            if self.at("else"):
                self.fail("'else' is outside the supported C subset")
            return ErrorCheck(cond, err, loc)
        if self.at("return"):
            self.advance()
            v = self.tok
            if not (v.kind == "NUMBER" and int(v.text.rstrip("uUlL"), 0) == 0):
                self.fail("only 'return 0;' may end the success path")
            self.advance()
            self.expect(";")
            return ReturnZero(loc)
        if self.tok.kind == "NAME" and self.tok.text in _KEYWORDS_UNSUPPORTED:
            self.fail(f"'{self.tok.text}' is outside the supported C subset")
        if self.at("{"):
            self.fail("nested blocks are not supported")
        lhs = self.expr()
        if isinstance(lhs, CCall) and self.at(";"):
            self.advance()
            return HelperCall(lhs.name, lhs.args, loc)
        op = self.tok
        if op.kind == "OP" and op.text in ("++", "--"):
            self.fail("increment operators are not supported; use += 1")
        if not (op.kind == "OP" and op.text in ("=", "+=", "-=")):
            self.fail(f"unsupported statement (found {op.text!r})")
        self.advance()
        rhs = self.expr()
        self.expect(";")
        if isinstance(lhs, CName) and op.text == "=" and lhs.id not in STATE_SCALARS:
            return Bind(lhs.id, rhs, loc)
        if not isinstance(lhs, (CName, CMember, CIndex)):
            self.fail("invalid assignment target", op)
        return Assign(lhs, op.text, rhs, loc)

    def errcode(self) -> str:
        if not self.at("-"):
            self.fail("error paths must return a negated errno, e.g. -EINVAL")
        self.advance()
        t = self.tok
        if t.kind == "NUMBER":
            self.advance()
            return str(int(t.text.rstrip("uUlL"), 0))
        return self.name()

    # expressions
    def expr(self) -> CExpr:
        e = self.binary(0)
        if self.at("?"):
            self.fail("the conditional operator is not supported")
        if self.tok.kind == "OP" and self.tok.text in ("*=", "/=", "|=", "&="):
            self.fail(f"'{self.tok.text}' is not supported")
        return e

    def binary(self, level: int) -> CExpr:
        if level == len(_BINARY_LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        while self.tok.kind == "OP" and self.tok.text in _BINARY_LEVELS[level]:
            op = self.advance()
            right = self.binary(level + 1)
            left = CBinary(op.text, left, right, (op.line, op.col))
        return left

    def unary(self) -> CExpr:
        t = self.tok
        if t.kind == "OP" and t.text in ("!", "-", "~"):
            self.advance()
            return CUnary(t.text, self.unary(), (t.line, t.col))
        if t.kind == "OP" and t.text in ("*", "&"):
            self.fail("pointer dereference and address-of are not supported")
        if t.kind == "OP" and t.text in ("++", "--"):
            self.fail("increment operators are not supported")
        return self.postfix()

    def postfix(self) -> CExpr:
        e = self.primary()
        while True:
            t = self.tok
            if self.at("->"):
                self.advance()
                e = CMember(e, self.name(), (t.line, t.col))
            elif self.at("["):
                self.advance()
                idx = self.expr()
                self.expect("]")
                e = CIndex(e, idx, (t.line, t.col))
            elif self.at("."):
                self.fail("struct values are not supported; use ->")
            elif self.at("("):
                if not isinstance(e, CName):
                    self.fail("only named functions can be called")
                self.advance()
                args: list[CExpr] = []
                while not self.at(")"):
                    args.append(self.expr())
                    if not self.at(")"):
                        self.expect(",")
                self.expect(")")
                e = CCall(e.id, tuple(args), e.loc)
            elif t.kind == "OP" and t.text in ("++", "--"):
                self.fail("increment operators are not supported")
            else:
                return e

    def primary(self) -> CExpr:
        t = self.tok
        loc = (t.line, t.col)
        if t.kind == "NUMBER":
            self.advance()
            body = t.text.rstrip("uUlL")
            return CNum(int(body, 0), "u" in t.text[len(body):].lower(), loc)
        if t.kind == "NAME":
            return CName(self.name(), loc)
        if self.at("("):
            self.advance()
            if self.is_type_start():
                self.fail("casts are not supported")
            e = self.expr()
            self.expect(")")
            return e
        self.fail(f"unexpected {t.text or 'end of input'!r}")


def parse_impl(text: str) -> ImplAST:
    """Parse one syscall; raises :class:`UnsupportedConstruct`."""
    return _Parser(text).function()


def parse_c_expr(text: str) -> CExpr:
    p = _Parser(text)
    e = p.expr()
    if p.tok.kind != "EOF":
        p.fail("trailing tokens in expression")
    return e
