"""Fixed-width bitvector arithmetic on Python ints (SMT-LIB QF_BV semantics)."""

from __future__ import annotations


def mask(width: int) -> int:
    return (1 << width) - 1


def to_signed(x: int, width: int) -> int:
    return x - (1 << width) if x >> (width - 1) else x


def udiv(a: int, b: int, width: int) -> int:
    # bvudiv by zero is all ones
    return mask(width) if b == 0 else a // b


def sdiv(a: int, b: int, width: int) -> int:
    sa, sb = to_signed(a, width), to_signed(b, width)
    if sb == 0:
        return 1 if sa < 0 else mask(width)
    q = abs(sa) // abs(sb)
    if (sa < 0) != (sb < 0):
        q = -q
    return q & mask(width)


def shl(a: int, b: int, width: int) -> int:
    return 0 if b >= width else (a << b) & mask(width)


def lshr(a: int, b: int, width: int) -> int:
    return 0 if b >= width else a >> b


def ashr(a: int, b: int, width: int) -> int:
    sa = to_signed(a, width)
    if b >= width:
        return mask(width) if sa < 0 else 0
    return (sa >> b) & mask(width)


def binop(op: str, a: int, b: int, width: int) -> int:
    m = mask(width)
    if op == "add":
        return (a + b) & m
    if op == "sub":
        return (a - b) & m
    if op == "mul":
        return (a * b) & m
    if op == "udiv":
        return udiv(a, b, width)
    if op == "sdiv":
        return sdiv(a, b, width)
    if op == "shl":
        return shl(a, b, width)
    if op == "lshr":
        return lshr(a, b, width)
    if op == "ashr":
        return ashr(a, b, width)
    if op == "or":
        return a | b
    if op == "and":
        return a & b
    if op == "xor":
        return a ^ b
    raise ValueError(f"unknown bitvector op {op!r}")


def compare(op: str, a: int, b: int, width: int) -> bool:
    if op == "eq":
        return a == b
    if op == "ne":
        return a != b
    if op in ("slt", "sle", "sgt", "sge"):
        a, b = to_signed(a, width), to_signed(b, width)
        op = "u" + op[1:]
    if op == "ult":
        return a < b
    if op == "ule":
        return a <= b
    if op == "ugt":
        return a > b
    if op == "uge":
        return a >= b
    raise ValueError(f"unknown comparison {op!r}")


BINOPS = ("add", "sub", "mul", "udiv", "sdiv", "shl", "lshr", "ashr", "or", "and", "xor")
CMPOPS = ("eq", "ne", "ult", "ule", "ugt", "uge", "slt", "sle", "sgt", "sge")
