"""Pass@1 arithmetic with exact rationals."""

from __future__ import annotations

from fractions import Fraction


def pass_at_1(passes: int, total: int) -> Fraction:
    if total < 0 or not 0 <= passes <= max(total, 0):
        raise ValueError(f"bad counts {passes}/{total}")
    return Fraction(passes, total) if total else Fraction(0)


def percent(p: Fraction) -> str:
    """Percentage rounded half-up to two decimals: 123/245 -> '50.20'."""
    sign = "-" if p < 0 else ""
    p = abs(p)
    hundredths = (2 * p.numerator * 10000 + p.denominator) // (2 * p.denominator)
    return f"{sign}{hundredths // 100}.{hundredths % 100:02d}"


def signed_percent(p: Fraction) -> str:
    s = percent(p)
    return s if s.startswith("-") or s == "0.00" else "+" + s
