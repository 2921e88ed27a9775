"""The specification language: parse, check, lint, evaluate, encode."""

from ..errors import SpecFault
from .check import CheckedSpec, Write, check_spec
from .evaluate import SpecEncoding, compiled, encode_checked, encode_spec, eval_spec
from .inventory import Inventory, default_inventory, load_inventory
from .lint import LintFinding, findings_to_json, lint_spec
from .syntax import FunctionDef as SpecAST
from .syntax import parse_function, pretty


def parse_spec(text: str) -> SpecAST:
    """Parse spec text; raises :class:`SpecFault` of kind ParseError."""
    return parse_function(text)


def typecheck_spec(ast: SpecAST, config, inventory: Inventory | None = None) -> CheckedSpec:
    return check_spec(ast, config, inventory)


__all__ = [
    "CheckedSpec", "Inventory", "LintFinding", "SpecAST", "SpecEncoding", "SpecFault", "Write",
    "check_spec", "compiled", "default_inventory", "encode_checked", "encode_spec", "eval_spec",
    "findings_to_json", "lint_spec", "load_inventory", "parse_spec", "pretty", "typecheck_spec",
]
