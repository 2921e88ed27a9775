"""Helper library loading and inline expansion."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path

from ..errors import ConfigError, UnknownHelper, UnsupportedConstruct
from .syntax import (Assign, Bind, CBinary, CCall, CExpr, CIndex, CMember, CName, CRef, CUnary,
                     ErrorCheck, HelperCall, ImplAST, parse_c_expr)

_LINE = re.compile(r"^(\w+)\(([\w\s,]*)\)\s*=\s*(expr|ref|ghost)\s*(?::\s*(.+))?$")


@dataclass(frozen=True)
class Helper:
    name: str
    params: tuple[str, ...]
    kind: str  # expr | ref | ghost
    template: CExpr | None = None


class HelperLib:
    def __init__(self, helpers: dict[str, Helper]):
        self.helpers = dict(helpers)
        self._check_acyclic()

    def __contains__(self, name: str) -> bool:
        return name in self.helpers

    def __getitem__(self, name: str) -> Helper:
        try:
            return self.helpers[name]
        except KeyError:
            raise UnknownHelper(f"unknown helper {name!r}") from None

    def _check_acyclic(self) -> None:
        state: dict[str, int] = {}

        def visit(name: str, stack: tuple[str, ...]):
            if state.get(name) == 2:
                return
            if state.get(name) == 1:
                raise ConfigError(f"recursive helper: {' -> '.join(stack + (name,))}")
            state[name] = 1
            h = self.helpers[name]
            if h.template is not None:
                for callee in _calls(h.template):
                    if callee in self.helpers:
                        visit(callee, stack + (name,))
            state[name] = 2

        for n in self.helpers:
            visit(n, ())


def _calls(e: CExpr):
    if isinstance(e, CCall):
        yield e.name
        for a in e.args:
            yield from _calls(a)
    elif isinstance(e, CUnary):
        yield from _calls(e.operand)
    elif isinstance(e, CBinary):
        yield from _calls(e.left)
        yield from _calls(e.right)
    elif isinstance(e, CMember):
        yield from _calls(e.base)
    elif isinstance(e, (CIndex,)):
        yield from _calls(e.base)
        yield from _calls(e.index)
    elif isinstance(e, CRef):
        yield from _calls(e.index)


def parse_helper_lib(text: str) -> HelperLib:
    helpers: dict[str, Helper] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _LINE.match(line)
        if not m:
            raise ConfigError(f"helper library line {n}: cannot parse {raw!r}")
        name, params, kind, body = m.groups()
        ps = tuple(p.strip() for p in params.split(",") if p.strip())
        template = None
        if kind != "ghost":
            if not body:
                raise ConfigError(f"helper library line {n}: {kind} helper needs a template")
            try:
                template = parse_c_expr(body)
            except UnsupportedConstruct as exc:
                raise ConfigError(f"helper library line {n}: {exc}") from None
            if kind == "ref":
                if not (isinstance(template, CIndex) and isinstance(template.base, CName)):
                    raise ConfigError(f"helper library line {n}: ref template must be table[index]")
                template = CRef(template.base.id, template.index)
        helpers[name] = Helper(name, ps, kind, template)
    return HelperLib(helpers)


def load_helper_lib(path: str | Path | None = None) -> HelperLib:
    if path is None:
        return default_helper_lib()
    return parse_helper_lib(Path(path).read_text())


@lru_cache(maxsize=1)
def default_helper_lib() -> HelperLib:
    return parse_helper_lib(resources.files("specforge.data").joinpath("helpers.txt").read_text())


# --------------------------------------------------------------------------
# expansion


def _subst(e: CExpr, env: dict[str, CExpr]) -> CExpr:
    if isinstance(e, CName):
        return env.get(e.id, e)
    if isinstance(e, CUnary):
        return CUnary(e.op, _subst(e.operand, env), e.loc)
    if isinstance(e, CBinary):
        return CBinary(e.op, _subst(e.left, env), _subst(e.right, env), e.loc)
    if isinstance(e, CMember):
        return CMember(_subst(e.base, env), e.field, e.loc)
    if isinstance(e, CIndex):
        return CIndex(_subst(e.base, env), _subst(e.index, env), e.loc)
    if isinstance(e, CCall):
        return CCall(e.name, tuple(_subst(a, env) for a in e.args), e.loc)
    if isinstance(e, CRef):
        return CRef(e.table, _subst(e.index, env), e.loc)
    return e


def expand(e: CExpr, lib: HelperLib) -> CExpr:
    if isinstance(e, CCall):
        h = lib[e.name]
        if h.kind == "ghost":
            raise UnsupportedConstruct(f"ghost helper {e.name} has no value", *e.loc)
        if len(e.args) != len(h.params):
            raise UnsupportedConstruct(
                f"{e.name} takes {len(h.params)} argument(s), got {len(e.args)}", *e.loc)
        args = [expand(a, lib) for a in e.args]
        return expand(_subst(h.template, dict(zip(h.params, args))), lib)
    if isinstance(e, CUnary):
        return CUnary(e.op, expand(e.operand, lib), e.loc)
    if isinstance(e, CBinary):
        return CBinary(e.op, expand(e.left, lib), expand(e.right, lib), e.loc)
    if isinstance(e, CMember):
        return CMember(expand(e.base, lib), e.field, e.loc)
    if isinstance(e, CIndex):
        return CIndex(expand(e.base, lib), expand(e.index, lib), e.loc)
    if isinstance(e, CRef):
        return CRef(e.table, expand(e.index, lib), e.loc)
    return e


def inline_helpers(ast: ImplAST, lib: HelperLib | None = None) -> ImplAST:
    """Substitute expandable helpers; drop ghost calls, recording an annotation."""
    lib = lib or default_helper_lib()
    body = []
    notes = list(ast.annotations)
    for s in ast.body:
        if isinstance(s, HelperCall):
            h = lib[s.name]
            if h.kind != "ghost":
                raise UnsupportedConstruct(f"result of {s.name} is unused", *s.loc)
            notes.append(f"dropped ghost helper {s.name} at line {s.loc[0]}")
            continue
        if isinstance(s, ErrorCheck):
            s = replace(s, cond=expand(s.cond, lib))
        elif isinstance(s, Assign):
            s = replace(s, lvalue=expand(s.lvalue, lib), value=expand(s.value, lib))
        elif isinstance(s, Bind):
            s = replace(s, value=expand(s.value, lib))
        body.append(s)
    return replace(ast, body=tuple(body), annotations=tuple(notes))
