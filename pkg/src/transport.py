"""The digit-preserving map F_P between the two sides, cylinder measure and
digit laws.

F_P sends the point with positive-side digits p_1 p_2 ... to the point with
the same alternating-side digits. Cylinders with the same base have the same
length on both sides, so F_P preserves Lebesgue measure and everything
computed here from cylinder lengths holds on either side.

Exact cylinder mass is propagated level by level over a finite digit set.
When phi_n reads only x(n) the mass is merged by the current r-value
("markov"); otherwise every base is kept ("enumeration").
"""

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

import config
from cylinders import CylinderBox, cyl_bounds_p, cyl_bounds_pminus
from exceptions import (
    ConsistencyError, DepthError, EmptyRestriction, ValidationError,
)
from expansion import (
    BoundaryWitness, DigitSeq, EndpointKind, Interval, Side,
    extract_p, extract_pminus,
)
from logger import setup_logger
from phi import PhiProgram, eval_phi
from sampling import SamplingMode, sample_rows
from utils import format_rational

logger = setup_logger(__name__)


# ============================================================================
# TRANSPORT
# ============================================================================
@dataclass(frozen=True)
class TransportResult:
    input: Fraction
    digits: DigitSeq
    source_enclosure: Interval
    image_enclosure: Interval

    def to_dict(self) -> dict:
        return {
            'input': format_rational(self.input),
            'digits': list(self.digits.digits),
            'r_values': list(self.digits.r_values),
            'source_enclosure': self.source_enclosure.to_dict(),
            'image_enclosure': self.image_enclosure.to_dict(),
        }


def transport_point(program: PhiProgram, x: Fraction, depth: int) -> TransportResult:
    """
    Enclose F_P(x): the alternating cylinder whose base is the first
    ``depth`` positive-side digits of x.

    Raises:
        DomainError: x outside (0, 1]
    """
    seq = extract_p(x, program, depth)
    source = cyl_bounds_p(program, seq)
    image = cyl_bounds_pminus(program, seq)
    return TransportResult(Fraction(x), seq, source.span, image.span)


def transport_cylinder(program: PhiProgram, base) -> Tuple[CylinderBox, CylinderBox]:
    """The positive and alternating cylinders of ``base``; their lengths agree.

    Raises:
        ValidationError: base violates the chain constraint
        ConsistencyError: the two lengths differ
    """
    positive = cyl_bounds_p(program, base)
    alternating = cyl_bounds_pminus(program, base)
    if positive.length != alternating.length:
        raise ConsistencyError(
            f"base {list(positive.base)}: lengths {positive.length} and {alternating.length} differ"
        )
    return positive, alternating


# ============================================================================
# MASS PROPAGATION
# ============================================================================
def _propagation_method(program: PhiProgram, method: Optional[str]) -> str:
    if method is None:
        return 'markov' if program.depends_on_last_digit_only() else 'enumeration'
    if method not in ('markov', 'enumeration'):
        raise ValidationError(f"unknown propagation method {method!r}")
    if method == 'markov' and not program.depends_on_last_digit_only():
        raise ValidationError("markov propagation needs a rule that reads only x(n)")
    return method


def _propagate(program: PhiProgram, digit_set: Sequence[int], levels: int, method: str,
               cap: int) -> List[Dict]:
    """Cylinder mass after each of ``levels`` steps restricted to ``digit_set``.

    Returns one dict per level (level 0 first) mapping a state to
    ``(r, mass)``; the state is the base (enumeration) or r (markov).
    """
    initial = {(): (program.phi0, Fraction(1))} if method == 'enumeration' \
        else {program.phi0: (program.phi0, Fraction(1))}
    frontiers = [initial]
    for level in range(1, levels + 1):
        nxt: Dict = {}
        for state, (r, mass) in frontiers[-1].items():
            for digit in digit_set:
                if digit <= r:
                    continue
                child_mass = mass * r / ((digit - 1) * digit)
                if method == 'enumeration':
                    base = state + (digit,)
                    nxt[base] = (eval_phi(program, level, base), child_mass)
                else:
                    r_next = eval_phi(program, 1, (digit,))
                    previous = nxt.get(r_next, (r_next, Fraction(0)))[1]
                    nxt[r_next] = (r_next, previous + child_mass)
            if len(nxt) > cap:
                raise DepthError(f"more than {cap} states at level {level}")
        if not nxt:
            raise EmptyRestriction(f"no admissible base at level {level}")
        frontiers.append(nxt)
    return frontiers


@dataclass(frozen=True)
class CoverMeasure:
    side: Side
    restriction: Tuple[int, ...]
    depth: int
    value: Fraction
    profile: Tuple[Fraction, ...]
    method: str

    @property
    def complement(self) -> Fraction:
        return 1 - self.value

    def to_dict(self) -> dict:
        return {
            'side': self.side.value,
            'restriction': list(self.restriction),
            'depth': self.depth,
            'value': format_rational(self.value),
            'complement': format_rational(self.complement),
            'profile': [format_rational(v) for v in self.profile],
            'method': self.method,
        }


def cover_measure_restricted(program: PhiProgram, side: Union[Side, str], V: Sequence[int],
                             depth: int, method: Optional[str] = None) -> CoverMeasure:
    """
    Total length of the depth-d cylinders whose digits all lie in V.

    The value does not depend on the side, and it cannot grow with depth.
    For Luroth it is (sum over c in V of 1/((c-1)c))^d.

    Raises:
        EmptyRestriction: V empty, or no admissible base at some level
        ValidationError: depth < 1
        DepthError: the enumeration outgrows config.MAX_COVER_STATES
    """
    side = Side.parse(side)
    restriction = tuple(sorted(set(V)))
    if not restriction:
        raise EmptyRestriction("digit restriction is empty")
    if any(isinstance(c, bool) or not isinstance(c, int) or c < 2 for c in restriction):
        raise ValidationError(f"digits must be integers >= 2, got {list(restriction)}")
    if isinstance(depth, bool) or not isinstance(depth, int) or depth < 1:
        raise ValidationError(f"depth must be >= 1, got {depth!r}")
    if depth > config.MAX_DEPTH:
        raise DepthError(f"depth {depth} exceeds PERRON_MAX_DEPTH={config.MAX_DEPTH}")

    method = _propagation_method(program, method)
    frontiers = _propagate(program, restriction, depth, method, config.MAX_COVER_STATES)
    profile = tuple(sum((mass for _, mass in level.values()), Fraction(0)) for level in frontiers[1:])
    logger.info(f"Cover of {program.label} restricted to {list(restriction)}: depth {depth}, "
                f"{len(frontiers[-1])} {method} states")
    return CoverMeasure(side, restriction, depth, profile[-1], profile, method)


@dataclass(frozen=True)
class FaithfulCover:
    """Finite cover of an open interval by cylinders of one rank.

    ``left``/``right`` are the rank-t cylinders holding the endpoints; an
    alternating-side endpoint that is itself a cylinder endpoint needs no
    such cylinder and the cover starts (or stops) exactly there.
    """
    side: Side
    interval: Interval
    depth: int
    left: Optional[CylinderBox]
    right: Optional[CylinderBox]
    cover: Interval

    @property
    def excess(self) -> Fraction:
        return self.cover.width - self.interval.width

    @property
    def bound(self) -> Fraction:
        return sum((box.length for box in (self.left, self.right) if box is not None), Fraction(0))

    def to_dict(self) -> dict:
        return {
            'side': self.side.value,
            'interval': self.interval.to_dict(),
            'depth': self.depth,
            'left': self.left.to_dict() if self.left else None,
            'right': self.right.to_dict() if self.right else None,
            'cover': self.cover.to_dict(),
            'excess': format_rational(self.excess),
            'bound': format_rational(self.bound),
        }


def _endpoint_cylinder(program: PhiProgram, side: Side, x: Fraction,
                       depth: int) -> Optional[CylinderBox]:
    if side is Side.POSITIVE:
        return cyl_bounds_p(program, extract_p(x, program, depth))
    outcome = extract_pminus(x, program, depth)
    if outcome.is_boundary:
        return None
    return cyl_bounds_pminus(program, outcome.seq)


def faithful_interval_cover(program: PhiProgram, side: Union[Side, str], lo: Fraction,
                            hi: Fraction, depth: int) -> FaithfulCover:
    """
    Cover (lo, hi) by rank-``depth`` cylinders and report the excess length.

    The cylinders holding the two endpoints, plus every cylinder between
    them, cover the interval. Their union runs from inf(left) to sup(right),
    so the excess over hi - lo is at most |left| + |right| <= 2^(1-depth).

    Raises:
        ValidationError: lo >= hi
        DomainError: the interval leaves (0, 1] (positive side) or (0, 1)
            (alternating side)
    """
    side = Side.parse(side)
    lo, hi = Fraction(lo), Fraction(hi)
    if lo >= hi:
        raise ValidationError(f"empty interval ({format_rational(lo)}, {format_rational(hi)})")

    left = _endpoint_cylinder(program, side, lo, depth)
    right = _endpoint_cylinder(program, side, hi, depth)
    cover = Interval.open(left.inf if left else lo, right.sup if right else hi)
    logger.info(f"Cover of ({lo}, {hi}) at rank {depth}: excess {cover.width - (hi - lo)}")
    return FaithfulCover(side, Interval.open(lo, hi), depth, left, right, cover)


# ============================================================================
# BOUNDARY SET
# ============================================================================
@dataclass(frozen=True)
class BoundaryInfo:
    x: Fraction
    depth: int
    witness: Optional[BoundaryWitness] = None

    @property
    def detected(self) -> bool:
        return self.witness is not None

    def to_dict(self) -> dict:
        return {
            'x': format_rational(self.x),
            'probe_depth': self.depth,
            'detected': self.detected,
            'witness': self.witness.to_dict() if self.witness else None,
        }


def is_membership(program: PhiProgram, x: Fraction, depth: Optional[int] = None) -> BoundaryInfo:
    """
    Probe whether x is an alternating-side cylinder endpoint up to ``depth``.

    A detected witness is re-checked: the named endpoint of its cylinder
    must equal x exactly. Points not detected within the probe depth may
    still be endpoints of deeper cylinders.

    Raises:
        DomainError: x outside (0, 1)
        ConsistencyError: the witness endpoint differs from x
    """
    depth = config.PROBE_DEPTH if depth is None else depth
    x = Fraction(x)
    outcome = extract_pminus(x, program, depth)
    if not outcome.is_boundary:
        return BoundaryInfo(x, depth)
    witness = outcome.boundary
    box = cyl_bounds_pminus(program, witness.base)
    endpoint = box.sup if witness.kind is EndpointKind.SUP else box.inf
    if endpoint != x:
        raise ConsistencyError(f"witness {witness} names {endpoint}, not {x}")
    return BoundaryInfo(x, depth, witness)


# ============================================================================
# DIGIT LAWS
# ============================================================================
@dataclass(frozen=True)
class ExactLaw:
    position: int
    max_digit: int
    probabilities: Dict[int, Fraction]
    tail: Fraction
    method: str


def exact_digit_law(program: PhiProgram, position: int,
                    max_digit: int = config.LAW_MAX_DIGIT) -> Optional[ExactLaw]:
    """
    Exact law of the digit at ``position`` over the digits 2..max_digit.

    Position 1 and constant rules have the closed form r/((c-1)c), with
    tail r/max_digit. For the other built-in families a digit above
    max_digit pushes every later digit above max_digit too, so propagating
    the mass of the bounded digits alone is exact. Any other program gets
    None (empirical only).
    """
    if position < 1:
        raise ValidationError(f"position must be >= 1, got {position}")
    digit_set = range(2, max_digit + 1)
    constant = program.constant_value()
    if position == 1 or constant is not None:
        r = program.phi0 if position == 1 else constant
        probabilities = {c: Fraction(r, (c - 1) * c) if c > r else Fraction(0) for c in digit_set}
        method = 'closed-form'
    elif program.matching_families():
        method = 'markov'
        try:
            states = _propagate(program, digit_set, position - 1, method,
                                config.EXACT_LAW_MAX_STATES)[-1]
        except EmptyRestriction:
            states = {}
        probabilities = {c: Fraction(0) for c in digit_set}
        for r, mass in states.values():
            for c in digit_set:
                if c > r:
                    probabilities[c] += mass * r / ((c - 1) * c)
    else:
        logger.info(f"No exact law for {program.label} at position {position}")
        return None
    tail = 1 - sum(probabilities.values(), Fraction(0))
    return ExactLaw(position, max_digit, probabilities, tail, method)


@dataclass
class DigitLawReport:
    side: Side
    position: int
    samples: int
    bits: int
    seed: int
    mode: SamplingMode
    max_digit: int
    counts: Dict[int, int]
    tail_count: int
    exact: Optional[ExactLaw]
    observations: Tuple[int, ...] = field(repr=False, default=())

    @property
    def empirical(self) -> Dict[int, Fraction]:
        return {c: Fraction(n, self.samples) for c, n in self.counts.items()}

    @property
    def empirical_tail(self) -> Fraction:
        return Fraction(self.tail_count, self.samples)

    def sigma(self, digit: int) -> Optional[float]:
        if self.exact is None:
            return None
        p = float(self.exact.probabilities[digit])
        return float(np.sqrt(p * (1 - p) / self.samples))

    def deviation(self, digit: int) -> Optional[float]:
        if self.exact is None:
            return None
        return float(self.empirical[digit]) - float(self.exact.probabilities[digit])

    def flagged(self) -> List[int]:
        """Digits whose deviation exceeds config.SIGMA_BAND standard errors."""
        if self.exact is None:
            return []
        return [
            c for c in self.counts
            if abs(self.deviation(c)) > config.SIGMA_BAND * self.sigma(c) + 1e-12
        ]

    @property
    def max_abs_deviation(self) -> Optional[float]:
        if self.exact is None:
            return None
        return max(abs(self.deviation(c)) for c in self.counts)

    def table(self) -> List[dict]:
        rows = []
        for c in sorted(self.counts):
            rows.append({
                'digit': c,
                'count': self.counts[c],
                'empirical': float(self.empirical[c]),
                'exact': float(self.exact.probabilities[c]) if self.exact else None,
                'deviation': self.deviation(c),
            })
        return rows

    def to_dict(self) -> dict:
        return {
            'side': self.side.value,
            'position': self.position,
            'samples': self.samples,
            'bits': self.bits,
            'seed': self.seed,
            'sampling': self.mode.value,
            'max_digit': self.max_digit,
            'table': self.table(),
            'tail': {
                'count': self.tail_count,
                'empirical': float(self.empirical_tail),
                'exact': format_rational(self.exact.tail) if self.exact else None,
            },
            'exact_method': self.exact.method if self.exact else None,
            'max_abs_deviation': self.max_abs_deviation,
            'sigma_band': config.SIGMA_BAND,
            'flagged': self.flagged(),
        }


def mc_digit_law(program: PhiProgram, side: Union[Side, str], position: int, samples: int,
                 bits: int = config.DEFAULT_BITS, seed: int = config.DEFAULT_SEED,
                 mode: Union[SamplingMode, str] = SamplingMode.TRANSPORT,
                 max_digit: int = config.LAW_MAX_DIGIT, threads: int = 1) -> DigitLawReport:
    """
    Monte-Carlo law of the digit at ``position`` next to its exact law.

    Args:
        program (PhiProgram): The function sequence
        side (Side): Which expansion to read
        position (int): 1-based digit position
        samples (int): Number of uniform dyadic draws
        bits (int): Random bits per draw (refined per sample when needed)
        seed (int): Run seed; sample i uses substream i
        mode (SamplingMode): How alternating rows are produced
        max_digit (int): Largest digit tabulated; larger digits count as tail
        threads (int): Worker processes

    Returns:
        DigitLawReport: counts for digits 2..max_digit and the tail; the
            empirical frequencies including the tail sum to 1 exactly
    """
    if max_digit < 2:
        raise ValidationError(f"max digit must be >= 2, got {max_digit}")
    side = Side.parse(side)
    mode = SamplingMode(mode)
    draws = sample_rows(program, side, position, samples, bits, seed, mode, threads)
    observations = tuple(draw.digits[position - 1] for draw in draws)

    tally = Counter(observations)
    counts = {c: tally.get(c, 0) for c in range(2, max_digit + 1)}
    tail_count = samples - sum(counts.values())
    exact = exact_digit_law(program, position, max_digit)
    report = DigitLawReport(side, position, samples, bits, seed, mode, max_digit,
                            counts, tail_count, exact, observations)
    if report.flagged():
        logger.warning(f"Digits outside the {config.SIGMA_BAND}-sigma band: {report.flagged()}")
    return report
