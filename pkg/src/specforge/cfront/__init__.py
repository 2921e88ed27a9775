"""Front end for the C subset: parse, inline helpers, lower to IR."""

from .helpers import Helper, HelperLib, default_helper_lib, inline_helpers, load_helper_lib, parse_helper_lib
from .lower import Check, IRFunction, Let, Update, frontend, lower_to_ir
from .syntax import ImplAST, parse_impl

__all__ = [
    "Check", "Helper", "HelperLib", "IRFunction", "ImplAST", "Let", "Update", "default_helper_lib",
    "frontend", "inline_helpers", "load_helper_lib", "lower_to_ir", "parse_helper_lib", "parse_impl",
]
