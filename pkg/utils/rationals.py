"""Helpers for exact rational values and their text form"""
import math
import re
from fractions import Fraction
from typing import Iterable, Union

Scalar = Union[Fraction, float]

_RATIONAL = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


def parse_rational(value) -> Fraction:
    """Parse an int, a Fraction or a "p/q" / "p" string into a Fraction.

    Decimal strings such as "0.75" are rejected: exact inputs must be
    written as "3/4" so that files round-trip bit-exactly.
    """
    if isinstance(value, bool):
        raise ValueError(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        match = _RATIONAL.match(value)
        if not match:
            raise ValueError(f"not a rational 'p/q' string: {value!r}")
        num = int(match.group(1))
        den = int(match.group(2)) if match.group(2) else 1
        if den == 0:
            raise ValueError(f"zero denominator: {value!r}")
        return Fraction(num, den)
    raise ValueError(f"not a rational: {value!r}")


def parse_scalar(value, exact: bool) -> Scalar:
    if exact:
        return parse_rational(value)
    if isinstance(value, bool):
        raise ValueError(f"not a number: {value!r}")
    if isinstance(value, (int, float, Fraction)):
        result = float(value)
    elif isinstance(value, str):
        text = value.strip()
        result = float(parse_rational(text)) if "/" in text else float(text)
    else:
        raise ValueError(f"not a number: {value!r}")
    if not math.isfinite(result):
        raise ValueError(f"not finite: {value!r}")
    return result


def format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_value(value):
    """JSON form of a scalar: "p/q" strings for rationals, numbers for floats"""
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, int):
        return str(value)
    return float(value)


def common_denominator(values: Iterable[Fraction]) -> int:
    result = 1
    for value in values:
        result = math.lcm(result, Fraction(value).denominator)
    return result
