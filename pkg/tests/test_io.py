import numpy as np
import pytest
from hypothesis import given, strategies as st

from kperimeter.grid import BudgetExceeded, CellSet, GridSpec, PhaseField
from kperimeter.io import (
    BitmapFormatError,
    format_cellset,
    format_phasefield,
    parse_cellset,
    parse_phasefield,
    read_cellset,
    write_cellset,
)

grids = st.builds(
    lambda d, h, counts, origin: GridSpec(d, h, tuple(origin[:d]), tuple(counts[:d])),
    st.integers(1, 3),
    st.sampled_from([1.0, 0.5, 1 / 3, 1 / 64]),
    st.lists(st.integers(1, 6), min_size=3, max_size=3),
    st.lists(st.floats(-2, 2), min_size=3, max_size=3),
)


@given(grids, st.integers(0, 2**32 - 1))
def test_cellset_round_trip(grid, seed):
    s = CellSet(grid, np.random.default_rng(seed).random(grid.shape) < 0.5)
    t = parse_cellset(format_cellset(s))
    assert t.grid == grid and t == s


@given(grids, st.integers(0, 2**32 - 1))
def test_phasefield_round_trip_is_bit_exact(grid, seed):
    u = PhaseField(grid, np.random.default_rng(seed).random(grid.shape))
    v = parse_phasefield(format_phasefield(u))
    assert v.grid == grid and np.array_equal(v.values, u.values)


def test_origin_line_is_optional():
    s = parse_cellset("2 0.5 2 3\n010\n111\n")
    assert s.grid.origin == (0.0, 0.0)
    assert s.indicator.tolist() == [[False, True, False], [True, True, True]]


def test_file_round_trip(tmp_path):
    s = CellSet(GridSpec(2, 0.25, (0, 0), (3, 4)), np.eye(3, 4, dtype=bool))
    write_cellset(tmp_path / "a.txt", s)
    assert read_cellset(tmp_path / "a.txt") == s


@pytest.mark.parametrize("text", ["", "2 0.5 2\n01\n", "2 0.5 2 2\n01\n", "2 0.5 2 2\n01\n0x\n", "x y\n"])
def test_malformed_bitmaps(text):
    with pytest.raises(BitmapFormatError):
        parse_cellset(text)


def test_bitmap_respects_budget():
    with pytest.raises(BudgetExceeded):
        parse_cellset("2 0.5 2 2\n01\n10\n", budget=3)
