"""Exact rational scalars shared by every module.

All scalars are elements of sympy's ``QQ`` domain (``gmpy2.mpq`` when gmpy2 is
installed), so they can be handed to ``DomainMatrix`` and polynomial rings
without conversion.
"""
from __future__ import annotations

from fractions import Fraction

from sympy.polys.domains import QQ
from sympy.polys.polyerrors import CoercionFailed

__all__ = ["QQ", "as_rational", "format_rational", "parse_rational"]

ZERO = QQ(0)
ONE = QQ(1)


def as_rational(value):
    """Coerce ints, Fractions, mpq and ``"p/q"`` strings to a ``QQ`` element."""
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return QQ(value)
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass a 'p/q' string or Fraction")
    try:
        return QQ.convert(value)
    except CoercionFailed:
        raise TypeError(f"cannot read {value!r} as a rational") from None


def parse_rational(text: str):
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        num, den = int(num), int(den)
        if den == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return QQ(num, den)
    return QQ(int(text))


def format_rational(value) -> str:
    value = as_rational(value)
    num, den = int(QQ.numer(value)), int(QQ.denom(value))
    return str(num) if den == 1 else f"{num}/{den}"
