import pytest

import config
from exceptions import PrecisionExhausted, ValidationError
from expansion import Side, cylinder_length, extract_p, extract_pminus
from sampling import (
    SamplingMode, random_bits, sample_row, sample_rows, substream,
)


def test_substreams_are_reproducible():
    assert random_bits(substream(9, 4), 64) == random_bits(substream(9, 4), 64)
    assert random_bits(substream(9, 4), 64) != random_bits(substream(9, 5), 64)
    assert random_bits(substream(9, 4), 64) != random_bits(substream(10, 4), 64)


def test_random_bits_range():
    bitgen = substream(0, 0)
    for bits in (1, 32, 64, 65, 200):
        assert 0 <= random_bits(bitgen, bits) < 2 ** bits


def test_negative_seed():
    with pytest.raises(ValidationError):
        substream(-1, 0)


def test_row_meets_width_guard(luroth):
    draw = sample_row(luroth, Side.POSITIVE, 20, index=3, seed=1, bits=32)
    assert draw.bits >= 32 and draw.bits % 32 == 0
    width = cylinder_length(luroth, draw.seq)
    assert width * 2 ** (draw.bits - config.WIDTH_MARGIN_BITS) >= 1
    assert 0 < draw.point <= 1
    assert extract_p(draw.point, luroth, 20).digits == draw.digits


def test_transported_row_is_positive_digits(pierce):
    draw = sample_row(pierce, Side.ALTERNATING, 5, index=0, seed=2, bits=64)
    assert draw.seq.side is Side.ALTERNATING
    assert extract_p(draw.point, pierce, 5).digits == draw.digits


def test_direct_row_is_alternating_digits(luroth):
    draw = sample_row(luroth, Side.ALTERNATING, 5, index=0, seed=2, bits=64,
                      mode=SamplingMode.DIRECT)
    outcome = extract_pminus(draw.point, luroth, 5)
    assert not outcome.is_boundary
    assert outcome.seq.digits == draw.digits


def test_row_depends_only_on_seed_and_index(luroth):
    rows = sample_rows(luroth, "alt", 3, 6, 64, seed=4)
    single = sample_row(luroth, "alt", 3, index=5, seed=4, bits=64)
    assert [draw.index for draw in rows] == list(range(6))
    assert rows[5].digits == single.digits
    assert rows[5].point == single.point


def test_precision_exhausted(luroth, monkeypatch):
    monkeypatch.setattr(config, "MAX_SAMPLE_BITS", 64)
    # every depth-60 cylinder is narrower than 2^-60
    with pytest.raises(PrecisionExhausted):
        sample_row(luroth, Side.POSITIVE, 60, index=0, seed=0, bits=64, max_digit_bits=4096)


@pytest.mark.parametrize("samples, depth, bits", [(0, 3, 64), (5, 0, 64), (5, 3, 16)])
def test_rejects_bad_arguments(luroth, samples, depth, bits):
    with pytest.raises(ValidationError):
        sample_rows(luroth, "alt", depth, samples, bits, seed=0)


def test_point_is_dyadic(luroth):
    draw = sample_row(luroth, "pos", 1, index=0, seed=0, bits=64)
    assert draw.point.denominator & (draw.point.denominator - 1) == 0
