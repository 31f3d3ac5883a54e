"""Digit extraction and reconstruction for Perron series.

Given a program P (see ``phi``), a point x has a positive-side expansion

    x = sum_{n>=0} r_0...r_n / ((p_1-1)p_1 ... (p_n-1)p_n * p_{n+1}),   x in (0, 1]

and, unless it is one of the countably many cylinder endpoints, an
alternating-side expansion

    x = sum_{n>=0} (-1)^n r_0...r_n / ((q_1-1)q_1 ... (q_n-1)q_n * (q_{n+1}-1)),  x in (0, 1)

with r_0 = phi0, r_n = phi_n(digits 1..n) and every digit at least
r_{n-1} + 1. All arithmetic is exact (``fractions.Fraction``).

Extraction walks down the cylinders. Rank 0 is the whole interval (0, 1)
with length 1 and even parity; the children of a rank-k cylinder of length
L are indexed by i >= r_k + 1 and have length L * r_k / ((i-1) i).
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import config
from exceptions import DepthError, DomainError, PhiError, ValidationError
from logger import setup_logger
from phi import PhiProgram, eval_phi
from utils import format_rational

logger = setup_logger(__name__)


class Side(str, Enum):
    POSITIVE = 'positive'
    ALTERNATING = 'alternating'

    @classmethod
    def parse(cls, text) -> "Side":
        if isinstance(text, Side):
            return text
        key = str(text).strip().lower()
        if key in ('pos', 'positive', 'p'):
            return cls.POSITIVE
        if key in ('alt', 'alternating', 'p-', 'pminus'):
            return cls.ALTERNATING
        raise ValidationError(f"unknown side {text!r}; use 'pos' or 'alt'")


class EndpointKind(str, Enum):
    INF = 'inf'
    SUP = 'sup'


# ============================================================================
# INTERVALS
# ============================================================================
@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction
    lo_open: bool = True
    hi_open: bool = True

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValidationError(f"interval bounds out of order: {self.lo} > {self.hi}")

    @classmethod
    def open(cls, lo: Fraction, hi: Fraction) -> "Interval":
        return cls(Fraction(lo), Fraction(hi), True, True)

    @classmethod
    def left_open(cls, lo: Fraction, hi: Fraction) -> "Interval":
        return cls(Fraction(lo), Fraction(hi), True, False)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x: Fraction) -> bool:
        above = self.lo < x if self.lo_open else self.lo <= x
        below = x < self.hi if self.hi_open else x <= self.hi
        return above and below

    def __str__(self) -> str:
        left = '(' if self.lo_open else '['
        right = ')' if self.hi_open else ']'
        return f"{left}{format_rational(self.lo)}, {format_rational(self.hi)}{right}"

    def to_dict(self) -> dict:
        return {
            'inf': format_rational(self.lo),
            'sup': format_rational(self.hi),
            'lo_open': self.lo_open,
            'hi_open': self.hi_open,
            'width': format_rational(self.width),
        }


# ============================================================================
# DIGIT SEQUENCES
# ============================================================================
@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    digits: Tuple[int, ...]
    r_chain: Tuple[int, ...]
    violation_index: Optional[int] = None
    required_min: Optional[int] = None
    reason: str = ''

    def to_dict(self) -> dict:
        return {
            'valid': self.valid,
            'digits': list(self.digits),
            'r_chain': list(self.r_chain),
            'violation_index': self.violation_index,
            'required_min': self.required_min,
            'reason': self.reason,
        }


def validate_digits(program: PhiProgram, digits: Sequence[int],
                    side: Union[Side, str] = Side.ALTERNATING) -> ValidationReport:
    """
    Check the chain constraint digit_k >= r_{k-1} + 1 along ``digits``.

    Never raises: a phi evaluation failure is reported as a violation at
    the index where it happened.

    Returns:
        ValidationReport: r_chain holds r_0 .. r_j for the checked prefix,
            violation_index is 1-based
    """
    Side.parse(side)
    digits = tuple(digits)
    chain = [program.phi0]
    for index, digit in enumerate(digits, start=1):
        required = chain[-1] + 1
        if isinstance(digit, bool) or not isinstance(digit, int) or digit < required:
            return ValidationReport(
                False, digits, tuple(chain), index, required,
                f"digit {index} is {digit!r}, needs an integer >= {required}",
            )
        try:
            chain.append(eval_phi(program, index, digits))
        except PhiError as e:
            return ValidationReport(False, digits, tuple(chain), index, None, str(e))
    return ValidationReport(True, digits, tuple(chain))


@dataclass(frozen=True)
class DigitSeq:
    """A valid digit prefix together with r_0 .. r_{k-1}."""
    side: Side
    program: PhiProgram
    digits: Tuple[int, ...]
    r_values: Tuple[int, ...]

    @classmethod
    def build(cls, program: PhiProgram, digits: Sequence[int],
              side: Union[Side, str] = Side.ALTERNATING) -> "DigitSeq":
        report = validate_digits(program, digits, side)
        if not report.valid:
            raise ValidationError(report.reason)
        return cls(Side.parse(side), program, report.digits, report.r_chain[:-1])

    def __len__(self) -> int:
        return len(self.digits)

    def prefix(self, k: int) -> "DigitSeq":
        return DigitSeq(self.side, self.program, self.digits[:k], self.r_values[:k])

    def with_side(self, side: Union[Side, str]) -> "DigitSeq":
        return DigitSeq(Side.parse(side), self.program, self.digits, self.r_values)

    def next_r(self) -> int:
        """r_k for a sequence of length k."""
        return eval_phi(self.program, len(self.digits), self.digits)

    def to_dict(self) -> dict:
        return {
            'side': self.side.value,
            'digits': list(self.digits),
            'r_values': list(self.r_values),
        }


def as_digit_seq(program: PhiProgram, digits, side: Union[Side, str]) -> DigitSeq:
    """Accept a DigitSeq or a plain digit list and return a DigitSeq read on ``side``."""
    if isinstance(digits, DigitSeq):
        if digits.program != program:
            raise ValidationError("digit sequence was built for a different program")
        return digits.with_side(side)
    return DigitSeq.build(program, digits, side)


@dataclass(frozen=True)
class BoundaryWitness:
    rank: int
    base: Tuple[int, ...]
    kind: EndpointKind

    def to_dict(self) -> dict:
        return {'rank': self.rank, 'base': list(self.base), 'kind': self.kind.value}


@dataclass(frozen=True)
class DigitOutcome:
    seq: DigitSeq
    boundary: Optional[BoundaryWitness] = None

    @property
    def status(self) -> str:
        return 'boundary' if self.boundary is not None else 'ongoing'

    @property
    def is_boundary(self) -> bool:
        return self.boundary is not None

    def to_dict(self) -> dict:
        result = self.seq.to_dict()
        result['status'] = self.status
        result['boundary'] = self.boundary.to_dict() if self.boundary else None
        return result


# ============================================================================
# GUARDS
# ============================================================================
def _check_depth(max_depth: int) -> None:
    if isinstance(max_depth, bool) or not isinstance(max_depth, int) or max_depth < 0:
        raise ValidationError(f"depth must be a non-negative integer, got {max_depth!r}")
    if max_depth > config.MAX_DEPTH:
        raise DepthError(f"depth {max_depth} exceeds PERRON_MAX_DEPTH={config.MAX_DEPTH}")


def _check_digit(digit: int, rank: int, max_digit_bits: Optional[int]) -> None:
    bits = config.MAX_DIGIT_BITS if max_digit_bits is None else max_digit_bits
    if digit > (1 << bits):
        raise DepthError(f"digit {rank} exceeds 2^{bits}")


def _floor(value: Fraction) -> int:
    return value.numerator // value.denominator


# ============================================================================
# EXTRACTION
# ============================================================================
def extract_pminus(x: Fraction, program: PhiProgram, max_depth: int,
                   max_digit_bits: Optional[int] = None) -> DigitOutcome:
    """
    Alternating-side digits of x in (0, 1), up to ``max_depth`` of them.

    Extraction stops early with a boundary witness when x is an endpoint of
    a cylinder, i.e. when the quotient that fixes the next digit is an
    integer.

    Raises:
        DomainError: x outside (0, 1)
        DepthError: max_depth above the configured cap, or a digit above
            the digit-magnitude guard
    """
    x = Fraction(x)
    if not 0 < x < 1:
        raise DomainError(f"alternating expansions need 0 < x < 1, got {format_rational(x)}")
    _check_depth(max_depth)

    digits: List[int] = []
    r_values: List[int] = []
    lo, hi, length = Fraction(0), Fraction(1), Fraction(1)
    r = program.phi0
    for rank in range(max_depth):
        if rank:
            r = eval_phi(program, rank, digits)
        weight = length * r
        gap = x - lo if rank % 2 == 0 else hi - x
        quotient = weight / gap
        if quotient.denominator == 1:
            digit = quotient.numerator + 1
            _check_digit(digit, rank + 1, max_digit_bits)
            kind = EndpointKind.SUP if (rank + 1) % 2 == 1 else EndpointKind.INF
            witness = BoundaryWitness(rank + 1, tuple(digits) + (digit,), kind)
            logger.debug(f"Boundary at rank {rank + 1}: {witness}")
            seq = DigitSeq(Side.ALTERNATING, program, tuple(digits), tuple(r_values))
            return DigitOutcome(seq, witness)

        digit = _floor(quotient) + 1
        _check_digit(digit, rank + 1, max_digit_bits)
        if rank % 2 == 0:
            lo, hi = lo + weight / digit, lo + weight / (digit - 1)
        else:
            lo, hi = hi - weight / (digit - 1), hi - weight / digit
        length = weight / ((digit - 1) * digit)

        digits.append(digit)
        r_values.append(r)

    seq = DigitSeq(Side.ALTERNATING, program, tuple(digits), tuple(r_values))
    return DigitOutcome(seq)


def extract_p(x: Fraction, program: PhiProgram, max_depth: int,
              max_digit_bits: Optional[int] = None) -> DigitSeq:
    """
    Positive-side digits of x in (0, 1], up to ``max_depth`` of them.

    Positive-side cylinders are half-open (inf, sup], so every x has a
    unique infinite expansion and extraction never stops early.
    """
    x = Fraction(x)
    if not 0 < x <= 1:
        raise DomainError(f"positive expansions need 0 < x <= 1, got {format_rational(x)}")
    _check_depth(max_depth)

    digits: List[int] = []
    r_values: List[int] = []
    lo, length = Fraction(0), Fraction(1)
    r = program.phi0
    for rank in range(max_depth):
        if rank:
            r = eval_phi(program, rank, digits)
        weight = length * r
        digit = _floor(weight / (x - lo)) + 1
        _check_digit(digit, rank + 1, max_digit_bits)
        lo += weight / digit
        length = weight / ((digit - 1) * digit)

        digits.append(digit)
        r_values.append(r)

    return DigitSeq(Side.POSITIVE, program, tuple(digits), tuple(r_values))


# ============================================================================
# SERIES SUMS
# ============================================================================
def _series(seq: DigitSeq, alternating: bool) -> Tuple[Fraction, Fraction]:
    """Partial sum of the first len(seq) terms and the length of the cylinder."""
    total = Fraction(0)
    weight = Fraction(1)
    for n, digit in enumerate(seq.digits):
        weight *= seq.r_values[n]
        if alternating:
            term = weight / (digit - 1)
            total += -term if n % 2 else term
        else:
            total += weight / digit
        weight /= (digit - 1) * digit
    return total, weight


def partial_sum_pminus(program: PhiProgram, digits) -> Fraction:
    """Sum of the first k alternating-series terms."""
    return _series(as_digit_seq(program, digits, Side.ALTERNATING), True)[0]


def partial_sum_p(program: PhiProgram, digits) -> Fraction:
    """Sum of the first k positive-series terms."""
    return _series(as_digit_seq(program, digits, Side.POSITIVE), False)[0]


def cylinder_length(program: PhiProgram, digits) -> Fraction:
    """r_0 ... r_{k-1} / prod (c_j - 1) c_j; the same on both sides."""
    seq = as_digit_seq(program, digits, getattr(digits, 'side', Side.ALTERNATING))
    return _series(seq, False)[1]


def alternating_span(program: PhiProgram, digits) -> Tuple[Fraction, Fraction, Fraction]:
    """(inf, sup, length) of an alternating-side cylinder.

    The partial sum is the supremum at odd rank and the infimum at even rank.
    """
    seq = as_digit_seq(program, digits, Side.ALTERNATING)
    total, length = _series(seq, True)
    if len(seq) % 2 == 1:
        return total - length, total, length
    return total, total + length, length


def positive_span(program: PhiProgram, digits) -> Tuple[Fraction, Fraction, Fraction]:
    seq = as_digit_seq(program, digits, Side.POSITIVE)
    total, length = _series(seq, False)
    return total, total + length, length


def reconstruct_enclosure(program: PhiProgram, digits: DigitSeq,
                          side: Optional[Union[Side, str]] = None) -> Interval:
    """
    The cylinder interval of a digit prefix: open on the alternating side,
    (inf, sup] on the positive side.

    Raises:
        ValidationError: the digits violate the chain constraint
    """
    side = Side.parse(side if side is not None else getattr(digits, 'side', Side.ALTERNATING))
    if side is Side.ALTERNATING:
        lo, hi, _ = alternating_span(program, digits)
        return Interval.open(lo, hi)
    lo, hi, _ = positive_span(program, digits)
    return Interval.left_open(lo, hi)
