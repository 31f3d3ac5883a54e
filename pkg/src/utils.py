"""Parsing and formatting helpers for command-line values."""

import re
from fractions import Fraction
from typing import List, Union

from exceptions import ValidationError

_RATIONAL_RE = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+)\s*)?$")
_RANGE_RE = re.compile(r"^\s*(\d+)\s*-\s*(\d+)\s*$")


def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    """Parse ``"num/den"`` (or a bare integer) into a reduced Fraction.

    Decimal notation is rejected: every input must be exact.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    match = _RATIONAL_RE.match(str(text))
    if not match:
        raise ValidationError(f"expected a rational 'num/den', got {text!r}")
    numerator = int(match.group(1))
    denominator = int(match.group(2)) if match.group(2) is not None else 1
    if denominator == 0:
        raise ValidationError(f"zero denominator in {text!r}")
    return Fraction(numerator, denominator)


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_int_list(text: Union[str, List[int]], allow_ranges: bool = False) -> List[int]:
    """Parse ``"3,2,2"`` into ``[3, 2, 2]``; with ``allow_ranges`` also
    accept ``"2-5"`` items. Lists pass through after an integer check."""
    if isinstance(text, (list, tuple)):
        items = list(text)
        if not all(isinstance(item, int) and not isinstance(item, bool) for item in items):
            raise ValidationError(f"expected integers, got {text!r}")
        return items

    values: List[int] = []
    for part in str(text).split(','):
        if not part.strip():
            continue
        ranged = _RANGE_RE.match(part) if allow_ranges else None
        if ranged:
            start, stop = int(ranged.group(1)), int(ranged.group(2))
            if start > stop:
                raise ValidationError(f"empty range {part.strip()!r}")
            values.extend(range(start, stop + 1))
            continue
        try:
            values.append(int(part))
        except ValueError:
            raise ValidationError(f"expected an integer, got {part.strip()!r}")
    if not values:
        raise ValidationError(f"expected at least one integer in {text!r}")
    return values


def parse_digit_set(text: Union[str, List[int]]) -> List[int]:
    return sorted(set(parse_int_list(text, allow_ranges=True)))
