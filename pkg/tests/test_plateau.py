import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import small_domain
from kperimeter.functional import build_weights, interaction, perimeter_K
from kperimeter.grid import Ball, BudgetExceeded, CellSet, GridSpec, Halfspace, make_domain, make_shape, unit_cube
from kperimeter.kernel import make_kernel, rescale
from kperimeter.plateau import (
    BoundaryOutsideCollar,
    Certificate,
    NonConvergence,
    PlateauProblem,
    check_optimality,
    flatness_experiment,
    halfspace_problem,
    solve_enumerate,
    solve_exact,
    solve_relaxed,
)


def random_problem(seed, kid="exp:lambda=1", n=4, reach=2):
    dom, w = small_domain(kid, n=n, reach_cells=reach)
    rng = np.random.default_rng(seed)
    B = CellSet(dom.grid, rng.random(dom.grid.shape) < 0.5) & dom.collar
    return PlateauProblem(dom, B, w)


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["exp:lambda=1", "gauss:sigma=1", "frac:s=0.5,R=4"]))
def test_min_cut_matches_enumeration(seed, kid):
    p = random_problem(seed, kid, n=3)
    a, b = solve_exact(p), solve_enumerate(p)
    assert a.energy.J == pytest.approx(b.energy.J, rel=1e-9, abs=1e-15)
    assert a.certificate is Certificate.EXACT_MIN_CUT
    assert b.certificate is Certificate.ENUMERATION


def test_minimizer_agrees_with_collar_trace():
    p = random_problem(7)
    sol = solve_exact(p)
    assert (sol.minimizer & p.dom.collar) == p.boundary_data
    assert (sol.minimizer - p.dom.support).is_empty


def test_solution_energy_is_perimeter_of_minimizer():
    p = random_problem(11)
    sol = solve_exact(p)
    assert sol.energy.fields() == perimeter_K(sol.minimizer, p.dom, p.weights).fields()


@pytest.mark.parametrize("fill", [False, True])
def test_constant_trace_gives_constant_minimizer(fill):
    dom, w = small_domain(n=8)
    B = dom.collar if fill else CellSet.empty(dom.grid)
    sol = solve_exact(PlateauProblem(dom, B, w))
    assert sol.energy.J == 0.0
    assert (sol.minimizer & dom.omega) == (dom.omega if fill else CellSet.empty(dom.grid))


def test_one_dimensional_minimizer_is_a_single_step():
    # in d=1 every interior cut point is nearly optimal, so only monotonicity is asserted
    p = halfspace_problem(make_kernel("exp:lambda=1", 1), 1, 32)
    x = solve_exact(p).minimizer.indicator[p.dom.omega.indicator]
    assert np.all(np.diff(x.astype(int)) <= 0)


def test_boundary_outside_collar_rejected():
    dom, w = small_domain(n=8)
    with pytest.raises(BoundaryOutsideCollar):
        PlateauProblem(dom, dom.omega, w)


def test_budgets():
    p = random_problem(0, n=8)
    with pytest.raises(BudgetExceeded):
        solve_exact(p, max_nodes=10)
    with pytest.raises(BudgetExceeded):
        solve_enumerate(p)


@pytest.mark.parametrize("delta", [1e-1, 1e-2, 1e-3])
def test_relaxed_threshold_recovers_exact_energy(delta):
    p = random_problem(5, n=8, reach=2)
    exact = solve_exact(p).energy.J
    with warnings.catch_warnings():
        warnings.simplefilter("error", NonConvergence)
        res = solve_relaxed(p, delta=delta, steps=3000)
    assert res.converged
    assert res.thresholded.energy.J == pytest.approx(exact, rel=1e-9)
    assert res.energy_u >= exact * (1 - 1e-9)
    assert res.thresholded.certificate is Certificate.THRESHOLDED_RELAXATION


@pytest.mark.filterwarnings("ignore::kperimeter.plateau.NonConvergence")
def test_relaxed_history_nonincreasing():
    p = random_problem(2, n=8)
    res = solve_relaxed(p, delta=1e-2, steps=500, momentum=False)
    h = np.array(res.history)
    assert np.all(np.diff(h) <= 1e-12 * h[0])


def test_relaxed_warns_when_stopped_early():
    p = random_problem(2, n=8)
    with pytest.warns(NonConvergence):
        res = solve_relaxed(p, delta=1e-1, steps=4, momentum=False, init=np.zeros(p.dom.grid.shape))
    assert not res.converged


def test_relaxed_zero_steps_returns_thresholded_init():
    p = random_problem(3, n=8)
    res = solve_relaxed(p, steps=0, init=np.zeros(p.dom.grid.shape))
    assert res.history and len(res.history) == 1


def test_relaxed_rejects_bad_delta():
    with pytest.raises(ValueError):
        solve_relaxed(random_problem(0), delta=0.0)


@pytest.mark.parametrize("seed", range(3))
def test_exact_minimizer_satisfies_optimality_conditions(seed):
    p = random_problem(seed, n=12, reach=3)
    rep = check_optimality(solve_exact(p), p, trials=100, seed=seed)
    assert rep.ok, rep


def test_optimality_check_detects_non_minimizer():
    p = halfspace_problem(make_kernel("exp:lambda=1", 2), 2, 16)
    sol = solve_exact(p)
    # a checkerboard inside omega: single-cell flips lower the energy
    ij = np.indices(p.dom.grid.shape).sum(axis=0) % 2 == 0
    sol.minimizer = (sol.minimizer - p.dom.omega) | (CellSet(p.dom.grid, ij) & p.dom.omega)
    assert not check_optimality(sol, p, trials=50).ok


def test_halfspace_minimizer_has_smaller_energy_than_competitors():
    p = halfspace_problem(make_kernel("gauss:sigma=1", 2), 2, 16)
    sol = solve_exact(p)
    ball = (make_shape(Ball((0.0, 0.0), 0.3), p.dom.grid) & p.dom.omega) | p.boundary_data
    assert sol.energy.J < perimeter_K(ball, p.dom, p.weights).J


@pytest.mark.parametrize("kid", ["exp:lambda=1", "gauss:sigma=1"])
def test_flatness_small(kid):
    rep = flatness_experiment(make_kernel(kid, 2), 2, (16,))
    assert rep["C4"] and not rep["informational"]
    assert rep["runs"][0]["sym_diff_cells"] == 0


def test_flatness_ball_is_flagged_informational():
    rep = flatness_experiment(make_kernel("ball:R=1", 2), 2, (16,))
    assert not rep["C4"] and rep["informational"]
