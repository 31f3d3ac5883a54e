"""Reproducible uniform sampling of digit rows.

Sample ``i`` of a run draws its bits from its own Philox substream (the
run seed as key, jumped ``i`` times), so a row depends only on
``(seed, i)`` and never on how the samples are split across workers.

A draw of B bits is the dyadic point u = (U + 1) / 2^B in (0, 1]. When the
depth-n cylinder holding u is narrower than 2^(8 - B), the same substream
supplies B more bits that refine u inside its dyadic cell, doubling B.

Two ways to obtain alternating-side rows:

* ``transport`` (default): the row is the positive-side digits of u, read
  as the alternating digits of the transported point F_P(u). Each row is
  checked by re-extracting alternating digits from inside the transported
  cylinder.
* ``direct``: alternating digits of u itself, redrawing u when it is a
  cylinder endpoint (or 1).
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from multiprocessing import Pool
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

import config
from cylinders import cyl_bounds_pminus
from exceptions import ConsistencyError, PrecisionExhausted, ValidationError
from expansion import DigitSeq, Side, cylinder_length, extract_p, extract_pminus
from logger import setup_logger
from phi import PhiProgram

logger = setup_logger(__name__)


class SamplingMode(str, Enum):
    TRANSPORT = 'transport'
    DIRECT = 'direct'


@dataclass(frozen=True)
class SampleDraw:
    index: int
    point: Fraction
    bits: int
    seq: DigitSeq
    redraws: int = 0

    @property
    def digits(self) -> Tuple[int, ...]:
        return self.seq.digits


def substream(seed: int, index: int) -> np.random.Philox:
    if seed < 0 or index < 0:
        raise ValidationError(f"seed and sample index must be non-negative, got {seed}, {index}")
    bitgen = np.random.Philox(key=seed)
    return bitgen.jumped(index) if index else bitgen


def random_bits(bitgen: np.random.Philox, bits: int) -> int:
    """A uniform integer in [0, 2^bits) built from raw 64-bit words."""
    words = -(-bits // 64)
    raw = bitgen.random_raw(words).astype('<u8')
    return int.from_bytes(raw.tobytes(), 'little') >> (64 * words - bits)


def check_transport(program: PhiProgram, seq: DigitSeq,
                    max_digit_bits: Optional[int] = None) -> DigitSeq:
    """Read positive-side digits as alternating ones and verify them.

    A point strictly inside the alternating cylinder of the same base must
    extract to exactly that base.
    """
    box = cyl_bounds_pminus(program, seq.digits)
    outcome = extract_pminus(box.span.midpoint, program, len(seq), max_digit_bits)
    if outcome.is_boundary or outcome.seq.digits != seq.digits:
        raise ConsistencyError(
            f"transported cylinder {list(seq.digits)} re-extracts to {list(outcome.seq.digits)}"
        )
    return seq.with_side(Side.ALTERNATING)


def sample_row(program: PhiProgram, side: Union[Side, str], depth: int, index: int,
               seed: int, bits: int, mode: Union[SamplingMode, str] = SamplingMode.TRANSPORT,
               max_digit_bits: Optional[int] = None) -> SampleDraw:
    """
    Draw sample ``index`` and extract its first ``depth`` digits.

    Raises:
        PrecisionExhausted: refinement would exceed config.MAX_SAMPLE_BITS,
            or too many endpoint redraws in direct mode
    """
    side = Side.parse(side)
    mode = SamplingMode(mode)
    bitgen = substream(seed, index)
    redraws = 0
    width_bits = bits
    cell = random_bits(bitgen, width_bits)

    while True:
        point = Fraction(cell + 1, 1 << width_bits)
        if side is Side.ALTERNATING and mode is SamplingMode.DIRECT:
            outcome = None if point == 1 else extract_pminus(point, program, depth, max_digit_bits)
            if outcome is None or outcome.is_boundary:
                redraws += 1
                if redraws > config.MAX_RESAMPLES:
                    raise PrecisionExhausted(f"sample {index}: {redraws} endpoint redraws")
                width_bits = bits
                cell = random_bits(bitgen, width_bits)
                continue
            seq = outcome.seq
        else:
            seq = extract_p(point, program, depth, max_digit_bits)

        if cylinder_length(program, seq) * (1 << (width_bits - config.WIDTH_MARGIN_BITS)) < 1:
            if 2 * width_bits > config.MAX_SAMPLE_BITS:
                raise PrecisionExhausted(
                    f"sample {index}: depth-{depth} cylinder still below resolution at "
                    f"{width_bits} bits"
                )
            cell = (cell << width_bits) | random_bits(bitgen, width_bits)
            width_bits *= 2
            logger.debug(f"Sample {index}: refined to {width_bits} bits")
            continue

        if side is Side.ALTERNATING and mode is SamplingMode.TRANSPORT:
            seq = check_transport(program, seq, max_digit_bits)
        return SampleDraw(index, point, width_bits, seq, redraws)


def _sample_chunk(task) -> List[SampleDraw]:
    program, side, depth, indices, seed, bits, mode, max_digit_bits = task
    return [
        sample_row(program, side, depth, i, seed, bits, mode, max_digit_bits)
        for i in indices
    ]


def sample_rows(program: PhiProgram, side: Union[Side, str], depth: int, samples: int,
                bits: int, seed: int, mode: Union[SamplingMode, str] = SamplingMode.TRANSPORT,
                threads: int = 1, max_digit_bits: Optional[int] = None) -> List[SampleDraw]:
    """
    Draw ``samples`` rows of ``depth`` digits each, ordered by sample index.

    Args:
        threads (int): Worker processes; results are identical for any value

    Raises:
        ValidationError: samples < 1, depth < 1 or bits < config.MIN_BITS
    """
    if samples < 1:
        raise ValidationError(f"need at least one sample, got {samples}")
    if depth < 1:
        raise ValidationError(f"depth must be >= 1, got {depth}")
    if bits < config.MIN_BITS:
        raise ValidationError(f"need at least {config.MIN_BITS} random bits, got {bits}")
    side = Side.parse(side)
    mode = SamplingMode(mode)

    logger.info(
        f"Sampling {samples} rows: {program.label}, side={side.value}, depth={depth}, "
        f"bits={bits}, seed={seed}, mode={mode.value}, threads={threads}"
    )
    if threads <= 1 or samples < 2 * threads:
        return _sample_chunk((program, side, depth, range(samples), seed, bits, mode, max_digit_bits))

    chunks: Sequence[range] = [
        range(start, min(start + -(-samples // threads), samples))
        for start in range(0, samples, -(-samples // threads))
    ]
    tasks = [(program, side, depth, chunk, seed, bits, mode, max_digit_bits) for chunk in chunks]
    with Pool(processes=threads) as pool:
        results = pool.map(_sample_chunk, tasks)
    return [draw for chunk in results for draw in chunk]
