"""Shared fixtures: programs for every built-in family and a strategy for
valid digit prefixes."""

import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent / "src"))

from phi import builtin_family, eval_phi  # noqa: E402

FAMILIES = ["luroth", "modified-engel", "alternating-engel", "pierce", "alternating-sylvester"]


@pytest.fixture
def luroth():
    return builtin_family("luroth")


@pytest.fixture
def pierce():
    return builtin_family("pierce")


@pytest.fixture
def modified_engel():
    return builtin_family("modified-engel")


@pytest.fixture
def alternating_engel():
    return builtin_family("alternating-engel")


@pytest.fixture
def sylvester():
    return builtin_family("alternating-sylvester")


@st.composite
def valid_bases(draw, program, min_rank=0, max_rank=6, spread=20):
    """Digit prefixes obeying digit_k >= r_{k-1} + 1, each digit at most
    ``spread`` above its minimum."""
    digits = []
    r = program.phi0
    for n in range(draw(st.integers(min_rank, max_rank))):
        digit = draw(st.integers(r + 1, r + spread))
        digits.append(digit)
        r = eval_phi(program, n + 1, digits)
    return digits
