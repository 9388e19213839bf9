import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kperimeter.quadrature import (
    QuadratureConfig,
    graded_breaks,
    panel_rule,
    sphere_area,
    tree_sum,
    unit_ball_volume,
)


@pytest.mark.parametrize("kwargs", [
    {"radial_nodes": 8},
    {"tail_tolerance": 0.0},
    {"tail_tolerance": 1e-2},
    {"subcell_refinement": 0},
])
def test_config_rejects_out_of_range(kwargs):
    with pytest.raises(ValueError):
        QuadratureConfig(**kwargs)


def test_tree_sum_empty_and_single():
    assert tree_sum([]) == 0.0
    assert tree_sum([2.5]) == 2.5


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=200))
def test_tree_sum_close_to_fsum(xs):
    assert tree_sum(xs) == pytest.approx(math.fsum(xs), abs=1e-6)


def test_tree_sum_depends_only_on_input_order():
    x = np.random.default_rng(0).standard_normal(1001)
    assert tree_sum(x) == tree_sum(x.copy())
    assert tree_sum(list(x)) == tree_sum(np.asarray(x))


def test_panel_rule_integrates_polynomials_exactly():
    x, w = panel_rule([0.0, 0.3, 1.0, 2.0], 8)
    assert np.sum(w * x**15) == pytest.approx(2.0**16 / 16, rel=1e-13)


def test_graded_breaks_refine_toward_left_end():
    b = graded_breaks(1.0, 2.0, 10)
    assert b[0] == 1.0 and b[-1] == 2.0
    assert np.all(np.diff(b) > 0)
    assert b[1] - b[0] == pytest.approx(2.0**-10)


@pytest.mark.parametrize("d, vol", [(1, 2.0), (2, math.pi), (3, 4 * math.pi / 3)])
def test_unit_ball_volume(d, vol):
    assert unit_ball_volume(d) == pytest.approx(vol)
    assert sphere_area(d) == pytest.approx(d * vol)
