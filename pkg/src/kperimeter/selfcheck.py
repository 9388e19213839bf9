"""Seeded quick versions of the library's invariants, used by `kperimeter check`."""

from __future__ import annotations

import sys

import numpy as np

from .functional import build_weights, coarea_check, perimeter_K, submodularity_gap
from .grid import Box, CellSet, PhaseField, make_domain
from .kernel import compute_constants, make_kernel, rescale
from .plateau import PlateauProblem, flatness_experiment, solve_enumerate, solve_exact

CATALOG = ("gauss:sigma=1", "exp:lambda=1", "ball:R=1", "frac:s=0.5,R=4")


def _small_problem(kid, n=16, reach=3):
    k = make_kernel(kid, 2)
    h = 1.0 / n
    kr = rescale(k, reach * h / k.truncation_radius)
    dom = make_domain(Box((0.0, 0.0), (1.0, 1.0)), h, kr.truncation_radius)
    return dom, build_weights(kr, dom.grid)


def check_constants():
    worst = 0.0
    for kid in CATALOG:
        for d in (1, 2, 3):
            c = compute_constants(make_kernel(kid, d))
            worst = max(worst, abs(c.c_K - 0.5 * c.alpha_1d * c.c_prime_K) / c.c_K)
    return worst <= 1e-6, f"max rel. identity error {worst:.2e}"


def check_coarea(rng, trials=5):
    dom, w = _small_problem("exp:lambda=1")
    worst = 0.0
    for _ in range(trials):
        levels = np.sort(rng.random(8))
        vals = np.where(dom.support.indicator, levels[rng.integers(0, 8, dom.grid.shape)], 0.0)
        r = coarea_check(PhaseField(dom.grid, vals), dom, w)
        worst = max(worst, r.relative_gap)
    return worst <= 1e-10, f"max rel. gap {worst:.2e}"


def check_submodularity(rng, trials=20):
    worst = 0.0
    for kid in CATALOG[:3]:
        dom, w = _small_problem(kid)
        for _ in range(trials):
            E = CellSet(dom.grid, rng.random(dom.grid.shape) < 0.5)
            F = CellSet(dom.grid, rng.random(dom.grid.shape) < 0.5)
            scale = perimeter_K(E, dom, w).J + perimeter_K(F, dom, w).J
            worst = min(worst, submodularity_gap(E, F, dom, w) / scale)
    return worst >= -1e-9, f"min rel. gap {worst:.2e}"


def check_mincut(rng, trials=10):
    dom, w = _small_problem("exp:lambda=1", n=4, reach=2)
    worst = 0.0
    for _ in range(trials):
        B = CellSet(dom.grid, rng.random(dom.grid.shape) < 0.5) & dom.collar
        p = PlateauProblem(dom, B, w)
        a, b = solve_exact(p).energy.J, solve_enumerate(p).energy.J
        worst = max(worst, abs(a - b) / max(b, 1e-300))
    return worst <= 1e-9, f"max rel. energy gap {worst:.2e}"


def check_flatness():
    rep = flatness_experiment(make_kernel("exp:lambda=1", 2), 2, (16,))
    diff = rep["runs"][0]["sym_diff_cells"]
    return diff == 0, f"symmetric difference {diff} cells"


def run_checks(seed: int = 0, out=sys.stdout) -> bool:
    rng = np.random.default_rng(seed)
    checks = [("constant identity", check_constants),
              ("discrete coarea", lambda: check_coarea(rng)),
              ("submodularity", lambda: check_submodularity(rng)),
              ("min-cut vs enumeration", lambda: check_mincut(rng)),
              ("flatness 16^2", check_flatness)]
    all_ok = True
    for name, fn in checks:
        ok, detail = fn()
        all_ok &= bool(ok)
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}", file=out)
    return all_ok
