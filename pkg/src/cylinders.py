"""Cylinder geometry: exact bounds, child ratios, adjacency and order.

On the alternating side the rank-k cylinder of a base c_1..c_k is the
open interval between the partial sum S_k and S_k -/+ length (sup at odd
rank, inf at even rank). Children of an odd-rank cylinder run left to
right as the index grows; children of an even-rank cylinder run right to
left, and siblings share endpoints. On the positive side every level runs
right to left and cylinders are half-open (inf, sup].
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Tuple, Union

from exceptions import ChildOutOfRange, ConsistencyError, SideMismatch, ValidationError
from expansion import (
    DigitSeq, Interval, Side, alternating_span, as_digit_seq, positive_span,
)
from phi import PhiProgram
from utils import format_rational


class Ordering(str, Enum):
    LESS = 'less'
    GREATER = 'greater'
    PREFIX_EQUAL = 'prefix-equal'


@dataclass(frozen=True)
class CylinderBox:
    side: Side
    base: Tuple[int, ...]
    span: Interval
    length: Fraction

    @property
    def rank(self) -> int:
        return len(self.base)

    @property
    def inf(self) -> Fraction:
        return self.span.lo

    @property
    def sup(self) -> Fraction:
        return self.span.hi

    def to_dict(self) -> dict:
        return {
            'side': self.side.value,
            'base': list(self.base),
            'rank': self.rank,
            'inf': format_rational(self.inf),
            'sup': format_rational(self.sup),
            'length': format_rational(self.length),
        }


def cyl_bounds_pminus(program: PhiProgram, base) -> CylinderBox:
    """Exact open interval of the alternating-side cylinder with this base.

    Raises:
        ValidationError: base violates the chain constraint
    """
    seq = as_digit_seq(program, base, Side.ALTERNATING)
    lo, hi, length = alternating_span(program, seq)
    return CylinderBox(Side.ALTERNATING, seq.digits, Interval.open(lo, hi), length)


def cyl_bounds_p(program: PhiProgram, base) -> CylinderBox:
    """Exact half-open interval (inf, sup] of the positive-side cylinder."""
    seq = as_digit_seq(program, base, Side.POSITIVE)
    lo, hi, length = positive_span(program, seq)
    return CylinderBox(Side.POSITIVE, seq.digits, Interval.left_open(lo, hi), length)


def cyl_bounds(program: PhiProgram, base, side: Union[Side, str]) -> CylinderBox:
    if Side.parse(side) is Side.ALTERNATING:
        return cyl_bounds_pminus(program, base)
    return cyl_bounds_p(program, base)


def child_ratio(program: PhiProgram, base, i: int) -> Fraction:
    """
    |cylinder(base + [i])| / |cylinder(base)| = r_k / ((i-1) i).

    Summed over i = r_k+1 .. M this telescopes to 1 - r_k / M, so the
    children exhaust their parent.

    Raises:
        ChildOutOfRange: i <= r_k
    """
    seq = as_digit_seq(program, base, Side.ALTERNATING)
    r = seq.next_r()
    if isinstance(i, bool) or not isinstance(i, int) or i <= r:
        raise ChildOutOfRange(f"child index {i!r} must be an integer > r_{len(seq)} = {r}")
    return Fraction(r, (i - 1) * i)


def children(program: PhiProgram, base, side: Union[Side, str],
             max_digit: int) -> List[CylinderBox]:
    """Rank-(k+1) children of ``base`` with indices r_k+1 .. max_digit."""
    side = Side.parse(side)
    seq = as_digit_seq(program, base, side)
    first = seq.next_r() + 1
    if max_digit < first:
        raise ChildOutOfRange(f"max digit {max_digit} is below the first child index {first}")
    return [cyl_bounds(program, list(seq.digits) + [i], side) for i in range(first, max_digit + 1)]


def adjacent_boundary(program: PhiProgram, base) -> Fraction:
    """The endpoint shared by cylinder(base) and its next sibling.

    Odd rank: inf(base) = sup(sibling). Even rank: sup(base) = inf(sibling).

    Raises:
        ValidationError: empty base
        ConsistencyError: the two computed endpoints differ
    """
    seq = as_digit_seq(program, base, Side.ALTERNATING)
    if not seq.digits:
        raise ValidationError("rank-0 cylinder has no siblings")
    sibling = list(seq.digits[:-1]) + [seq.digits[-1] + 1]
    box = cyl_bounds_pminus(program, seq)
    other = cyl_bounds_pminus(program, sibling)
    if len(seq) % 2 == 1:
        mine, theirs = box.inf, other.sup
    else:
        mine, theirs = box.sup, other.inf
    if mine != theirs:
        raise ConsistencyError(
            f"siblings {list(seq.digits)} and {sibling} disagree: {mine} != {theirs}"
        )
    return mine


def first_divergence(a: DigitSeq, b: DigitSeq) -> Optional[int]:
    """1-based index of the first differing digit, None for a prefix pair."""
    for k, (left, right) in enumerate(zip(a.digits, b.digits), start=1):
        if left != right:
            return k
    return None


def compare_digitwise(a: DigitSeq, b: DigitSeq) -> Ordering:
    """
    Order two cylinders from their digits alone.

    On the alternating side a smaller digit at the first divergence k puts
    a to the left when k is even and to the right when k is odd. On the
    positive side a smaller digit always puts a to the right.

    Raises:
        SideMismatch: the sequences come from different sides or programs
    """
    if a.side is not b.side:
        raise SideMismatch(f"cannot compare a {a.side.value} sequence with a {b.side.value} one")
    if a.program != b.program:
        raise SideMismatch("cannot compare sequences of different programs")
    k = first_divergence(a, b)
    if k is None:
        return Ordering.PREFIX_EQUAL
    a_smaller = a.digits[k - 1] < b.digits[k - 1]
    left_to_right = a.side is Side.ALTERNATING and k % 2 == 0
    if a_smaller == left_to_right:
        return Ordering.LESS
    return Ordering.GREATER
