import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import FAMILIES, valid_bases
from cylinders import (
    Ordering, adjacent_boundary, child_ratio, children, compare_digitwise, cyl_bounds,
    cyl_bounds_p, cyl_bounds_pminus, first_divergence,
)
from exceptions import ChildOutOfRange, ConsistencyError, SideMismatch, ValidationError
from expansion import DigitSeq, Side
from phi import builtin_family, eval_phi

F = Fraction


def test_pierce_bounds(pierce):
    box = cyl_bounds_pminus(pierce, [2, 3])
    assert (box.inf, box.sup, box.length) == (F(1, 2), F(2, 3), F(1, 6))
    assert box.rank == 2


def test_pierce_first_cylinder(pierce):
    box = cyl_bounds_pminus(pierce, [2])
    assert (box.inf, box.sup) == (F(1, 2), F(1))


def test_luroth_bounds_both_sides(luroth):
    alt = cyl_bounds_pminus(luroth, [3, 2])
    pos = cyl_bounds_p(luroth, [3, 2])
    assert (alt.inf, alt.sup) == (F(1, 3), F(5, 12))
    assert (pos.inf, pos.sup) == (F(5, 12), F(1, 2))
    assert alt.length == pos.length == F(1, 12)
    assert pos.span.contains(F(1, 2)) and not pos.span.contains(F(5, 12))


def test_rank_zero_is_unit_interval(luroth):
    box = cyl_bounds(luroth, [], "alt")
    assert (box.inf, box.sup, box.length) == (F(0), F(1), F(1))


def test_luroth_first_level(luroth):
    # alternating rank-1 cylinders are (1/i, 1/(i-1))
    for i in range(2, 8):
        box = cyl_bounds_pminus(luroth, [i])
        assert (box.inf, box.sup) == (F(1, i), F(1, i - 1))


def test_invalid_base(pierce):
    with pytest.raises(ValidationError):
        cyl_bounds_pminus(pierce, [2, 2])


def test_child_ratio(pierce):
    assert child_ratio(pierce, [2], 3) == F(1, 3)
    with pytest.raises(ChildOutOfRange):
        child_ratio(pierce, [2], 2)


@pytest.mark.parametrize("family", FAMILIES)
@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_children_exhaust_parent(family, data):
    program = builtin_family(family)
    base = data.draw(valid_bases(program, max_rank=8))
    r = eval_phi(program, len(base), base)
    total = F(0)
    for top in range(r + 1, r + 51):
        total += child_ratio(program, base, top)
        assert total == 1 - F(r, top)


def test_children_share_endpoints(luroth):
    # odd-rank parent: children run left to right
    kids = children(luroth, [3], "alt", 8)
    assert [k.base for k in kids] == [(3, i) for i in range(2, 9)]
    for left, right in zip(kids, kids[1:]):
        assert left.sup == right.inf
    # rank 0: right to left
    kids = children(luroth, [], "alt", 6)
    for first, second in zip(kids, kids[1:]):
        assert first.inf == second.sup


def test_children_below_first_index(pierce):
    with pytest.raises(ChildOutOfRange):
        children(pierce, [3], "alt", 3)


def test_adjacent_boundary(luroth):
    assert adjacent_boundary(luroth, [3]) == F(1, 3)
    assert adjacent_boundary(luroth, [3, 2]) == F(5, 12)
    with pytest.raises(ValidationError):
        adjacent_boundary(luroth, [])


@pytest.mark.parametrize("family", FAMILIES)
@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_adjacent_boundary_never_inconsistent(family, data):
    program = builtin_family(family)
    base = data.draw(valid_bases(program, min_rank=1, max_rank=5))
    try:
        adjacent_boundary(program, base)
    except ConsistencyError:
        pytest.fail(f"siblings of {base} disagree")


class TestOrdering:
    def test_even_divergence(self, luroth):
        a = DigitSeq.build(luroth, [3, 2])
        b = DigitSeq.build(luroth, [3, 3])
        assert first_divergence(a, b) == 2
        assert compare_digitwise(a, b) is Ordering.LESS
        assert compare_digitwise(b, a) is Ordering.GREATER

    def test_odd_divergence(self, luroth):
        a = DigitSeq.build(luroth, [2])
        b = DigitSeq.build(luroth, [3])
        assert compare_digitwise(a, b) is Ordering.GREATER

    def test_prefix(self, luroth):
        a = DigitSeq.build(luroth, [3])
        b = DigitSeq.build(luroth, [3, 2])
        assert compare_digitwise(a, b) is Ordering.PREFIX_EQUAL
        assert first_divergence(a, b) is None

    def test_positive_side(self, luroth):
        a = DigitSeq.build(luroth, [3, 2], Side.POSITIVE)
        b = DigitSeq.build(luroth, [3, 3], Side.POSITIVE)
        assert compare_digitwise(a, b) is Ordering.GREATER

    def test_side_mismatch(self, luroth):
        a = DigitSeq.build(luroth, [3], Side.POSITIVE)
        b = DigitSeq.build(luroth, [3], Side.ALTERNATING)
        with pytest.raises(SideMismatch):
            compare_digitwise(a, b)

    def test_program_mismatch(self, luroth, pierce):
        with pytest.raises(SideMismatch):
            compare_digitwise(DigitSeq.build(luroth, [3]), DigitSeq.build(pierce, [3]))

    @pytest.mark.parametrize("family", FAMILIES)
    @pytest.mark.parametrize("side", ["alt", "pos"])
    @settings(max_examples=40, deadline=None)
    @given(data=st.data())
    def test_agrees_with_geometry(self, family, side, data):
        program = builtin_family(family)
        a = data.draw(valid_bases(program, min_rank=1, max_rank=4, spread=5))
        b = data.draw(valid_bases(program, min_rank=1, max_rank=4, spread=5))
        seq_a, seq_b = DigitSeq.build(program, a, side), DigitSeq.build(program, b, side)
        ordering = compare_digitwise(seq_a, seq_b)
        box_a, box_b = cyl_bounds(program, a, side), cyl_bounds(program, b, side)
        if ordering is Ordering.LESS:
            assert box_a.sup <= box_b.inf
        elif ordering is Ordering.GREATER:
            assert box_b.sup <= box_a.inf
        else:
            shorter, longer = sorted((box_a, box_b), key=lambda box: box.rank)
            assert shorter.inf <= longer.inf and longer.sup <= shorter.sup


def test_child_ratio_examples(luroth, pierce):
    assert child_ratio(luroth, [], 2) == F(1, 2)
    with pytest.raises(ChildOutOfRange):
        child_ratio(luroth, [3], 1)
    assert adjacent_boundary(pierce, [2]) == F(1, 2)


@pytest.mark.parametrize("family", FAMILIES)
@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_length_is_product_of_child_ratios(family, data):
    program = builtin_family(family)
    base = data.draw(valid_bases(program, max_rank=5))
    product = F(1)
    for k in range(len(base)):
        product *= child_ratio(program, base[:k], base[k])
    assert cyl_bounds_pminus(program, base).length == product


@pytest.mark.parametrize("family", FAMILIES)
@settings(max_examples=30, deadline=None)
@given(data=st.data(), extra=st.integers(1, 10))
def test_children_nest_strictly(family, data, extra):
    program = builtin_family(family)
    base = data.draw(valid_bases(program, max_rank=4))
    i = eval_phi(program, len(base), base) + extra
    for side in ("alt", "pos"):
        parent = cyl_bounds(program, base, side)
        child = cyl_bounds(program, base + [i], side)
        assert parent.inf <= child.inf < child.sup <= parent.sup
        assert child.length < parent.length


@pytest.mark.slow
@pytest.mark.parametrize("family", FAMILIES)
def test_ordering_matches_representatives_on_random_pairs(family):
    program = builtin_family(family)
    rng = random.Random(family)

    def draw_base():
        digits, r = [], program.phi0
        for n in range(1, rng.randint(1, 5) + 1):
            digits.append(rng.randint(r + 1, r + 4))
            r = eval_phi(program, n, digits)
        return digits

    for _ in range(10_000):
        a, b = draw_base(), draw_base()
        for side in ("alt", "pos"):
            ordering = compare_digitwise(DigitSeq.build(program, a, side), DigitSeq.build(program, b, side))
            box_a, box_b = cyl_bounds(program, a, side), cyl_bounds(program, b, side)
            mid_a, mid_b = box_a.span.midpoint, box_b.span.midpoint
            if ordering is Ordering.LESS:
                assert mid_a < mid_b and box_a.sup <= box_b.inf
            elif ordering is Ordering.GREATER:
                assert mid_b < mid_a and box_b.sup <= box_a.inf
            else:
                shorter, longer = sorted((box_a, box_b), key=lambda box: box.rank)
                assert shorter.inf <= longer.inf < longer.sup <= shorter.sup
