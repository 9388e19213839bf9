"""Nonlocal Plateau problem: exact min-cut solver, convex relaxation, diagnostics.

For a fixed collar trace B, every admissible set is X | B with X a subset of
the free (omega) cells, and

    Per_K(X | B) = sum_{i in X, j in omega - X} w(j - i)
                   + sum_{i in X} b_i + sum_{i in omega - X} a_i

with a_i = sum_{j in B} w(j - i) and b_i = sum_{j in collar - B} w(j - i).
This is the capacity of an s-t cut, so one max-flow gives a global minimizer.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .functional import (
    EnergyBreakdown,
    PairWeightTable,
    _check_collar,
    build_weights,
    energy_J,
    interaction,
    perimeter_K,
)
from .grid import BudgetExceeded, CellSet, DomainMask, GridError, Halfspace, PhaseField, make_domain, make_shape, unit_cube
from .kernel import KernelSpec, check_admissibility, rescale
from .maxflow import min_cut
from .quadrature import QuadratureConfig

MAX_FLOW_NODES = 100_000
MAX_ENUMERATION_CELLS = 20


class Certificate(enum.Enum):
    EXACT_MIN_CUT = "ExactMinCut"
    THRESHOLDED_RELAXATION = "ThresholdedRelaxation"
    ENUMERATION = "Enumeration"


class NonConvergence(UserWarning):
    pass


class BoundaryOutsideCollar(GridError):
    pass


@dataclass
class PlateauProblem:
    dom: DomainMask
    boundary_data: CellSet
    weights: PairWeightTable

    def __post_init__(self):
        if self.boundary_data.grid != self.dom.grid:
            raise GridError("boundary data is not on the domain grid")
        if not (self.boundary_data - self.dom.collar).is_empty:
            raise BoundaryOutsideCollar("boundary data must lie in the collar")
        _check_collar(self.dom, self.weights)

    @property
    def n_free(self) -> int:
        return len(self.dom.omega)


@dataclass
class PlateauSolution:
    minimizer: CellSet
    energy: EnergyBreakdown
    certificate: Certificate


@dataclass
class RelaxedResult:
    u: PhaseField
    thresholded: PlateauSolution
    t_star: float
    energy_u: float
    converged: bool
    history: list = field(default_factory=list)


@dataclass
class _Graph:
    """Free cells in C order, undirected pair edges and unary couplings."""

    free: np.ndarray
    eu: np.ndarray
    ev: np.ndarray
    ew: np.ndarray
    a: np.ndarray  # coupling to fixed E cells (paid when the cell is left out)
    b: np.ndarray  # coupling to fixed E^c collar cells (paid when the cell is taken)

    @property
    def n(self):
        return self.a.size

    def energy(self, x):
        """Per_K of (free cells with x) | B, for one labeling or a batch of them."""
        x = np.asarray(x, dtype=bool)
        pair = np.sum(self.ew * (x[..., self.eu] != x[..., self.ev]), axis=-1)
        return pair + np.sum(np.where(x, self.b, self.a), axis=-1)

    def row_sums(self):
        return (np.bincount(self.eu, self.ew, self.n) + np.bincount(self.ev, self.ew, self.n))


def _shifted(arr, o, fill):
    """View-like copy s with s[i] = arr[i + o] (fill outside the box)."""
    out = np.full(arr.shape, fill, dtype=arr.dtype)
    dst, src = [], []
    for k, n in enumerate(arr.shape):
        ok = int(o[k])
        if abs(ok) >= n:
            return out
        dst.append(slice(max(0, -ok), n - max(0, ok)))
        src.append(slice(max(0, ok), n - max(0, -ok)))
    out[tuple(dst)] = arr[tuple(src)]
    return out


def _build_graph(p: PlateauProblem) -> _Graph:
    w = p.weights
    free = p.dom.omega.indicator
    node = np.full(free.shape, -1, dtype=np.int64)
    node[free] = np.arange(int(free.sum()))
    B = p.boundary_data.indicator.astype(np.float64)
    Bc = (p.dom.collar - p.boundary_data).indicator.astype(np.float64)
    a = np.zeros(free.shape)
    b = np.zeros(free.shape)
    eu, ev, ew = [], [], []
    for i, o in enumerate(w.offsets):
        wo = w.weights[i]
        if wo == 0.0:
            continue
        a += wo * _shifted(B, o, 0.0)
        b += wo * _shifted(Bc, o, 0.0)
    for i in w.canon:
        wo = w.weights[i]
        if wo == 0.0:
            continue
        partner = _shifted(node, w.offsets[i], -1)
        hit = free & (partner >= 0)
        eu.append(node[hit])
        ev.append(partner[hit])
        ew.append(np.full(int(hit.sum()), wo))
    cat = lambda xs, dt: np.concatenate(xs).astype(dt) if xs else np.zeros(0, dt)  # noqa: E731
    return _Graph(free, cat(eu, np.int64), cat(ev, np.int64), cat(ew, np.float64), a[free], b[free])


def _assemble(p: PlateauProblem, g: _Graph, x, certificate) -> PlateauSolution:
    ind = p.boundary_data.indicator.copy()
    ind[g.free] = np.asarray(x, dtype=bool)
    E = CellSet(p.dom.grid, ind)
    return PlateauSolution(E, perimeter_K(E, p.dom, p.weights), certificate)


def solve_exact(p: PlateauProblem, max_nodes: int = MAX_FLOW_NODES) -> PlateauSolution:
    """Global minimizer of Per_K over sets with the prescribed collar trace.

    Among several minimizers the largest one (maximal min-cut source side)
    is returned.
    """
    if p.n_free > max_nodes:
        raise BudgetExceeded(f"{p.n_free} free cells exceed the max-flow budget {max_nodes}")
    g = _build_graph(p)
    x = min_cut(g.n, g.eu, g.ev, g.ew, g.a, g.b)
    return _assemble(p, g, x, Certificate.EXACT_MIN_CUT)


def solve_enumerate(p: PlateauProblem, max_cells: int = MAX_ENUMERATION_CELLS) -> PlateauSolution:
    """Exhaustive minimization over all 2^n labelings (first minimizer in binary order)."""
    if p.n_free > max_cells:
        raise BudgetExceeded(f"enumeration is limited to {max_cells} free cells")
    g = _build_graph(p)
    n = g.n
    W = np.zeros((n, n))
    np.add.at(W, (g.eu, g.ev), g.ew)
    W = W + W.T
    deg = W.sum(axis=1)
    lin = deg + g.b - g.a
    const = g.a.sum()
    best, best_x = np.inf, None
    bits = 1 << np.arange(n, dtype=np.int64)
    chunk = 1 << 14
    for lo in range(0, 1 << n, chunk):
        codes = np.arange(lo, min(lo + chunk, 1 << n), dtype=np.int64)
        X = ((codes[:, None] & bits) != 0).astype(np.float64)
        e = const + X @ lin - np.einsum("ij,ij->i", X @ W, X)
        k = int(np.argmin(e))
        if e[k] < best:
            best, best_x = e[k], X[k].astype(bool)
    return _assemble(p, g, best_x, Certificate.ENUMERATION)


def solve_relaxed(p: PlateauProblem, delta: float = 1e-2, steps: int = 2000, step_size: float | None = None,
                  init=None, levels: int = 101, momentum: bool = True) -> RelaxedResult:
    """Projected gradient on the smoothed convex energy, then a threshold scan.

    The pairwise terms use sqrt(t^2 + delta^2) in place of |t|; the collar
    couplings are linear on [0, 1] and kept exact.  The default step is
    1/L with L = 2 max_i (row weight sum)_i / delta.  With momentum the
    iteration is the accelerated (FISTA) variant with monotone restarts.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    g = _build_graph(p)
    n = g.n
    if step_size is None:
        L = 2.0 * float(g.row_sums().max(initial=0.0)) / delta
        step_size = 1.0 / L if L > 0 else 1.0
    x = np.full(n, 0.5) if init is None else np.asarray(init, np.float64)[g.free].copy()

    def smoothed(x):
        t = x[g.eu] - x[g.ev]
        return float(np.sum(g.ew * np.sqrt(t * t + delta * delta)) + np.sum(g.a * (1 - x) + g.b * x))

    def gradient(x):
        t = x[g.eu] - x[g.ev]
        f = g.ew * t / np.sqrt(t * t + delta * delta)
        return np.bincount(g.eu, f, n) - np.bincount(g.ev, f, n) + (g.b - g.a)

    record_every = max(1, steps // 100)
    y, theta, f_prev = x.copy(), 1.0, smoothed(x)
    history = [f_prev]
    for it in range(steps):
        x_new = np.clip(y - step_size * gradient(y), 0.0, 1.0)
        if momentum:
            f_new = smoothed(x_new)
            if f_new > f_prev:
                # restart: drop the momentum and take a plain step
                theta = 1.0
                x_new = np.clip(x - step_size * gradient(x), 0.0, 1.0)
                f_new = smoothed(x_new)
            theta_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * theta * theta))
            y = x_new + ((theta - 1.0) / theta_next) * (x_new - x)
            theta, f_prev = theta_next, f_new
        else:
            y = x_new
        x = x_new
        if it % record_every == 0 or it == steps - 1:
            history.append(smoothed(x))

    tail = history[-max(2, len(history) // 10):]
    rel = (tail[0] - tail[-1]) / max(abs(tail[0]), 1e-300)
    converged = rel <= 1e-4
    if not converged:
        warnings.warn(f"relative energy decrease {rel:.2e} over the last 10% of steps", NonConvergence)

    ts = np.arange(1, levels + 1) / (levels + 1)
    distinct = np.unique(x)
    if distinct.size <= 1000:
        ts = np.unique(np.concatenate((ts, distinct[distinct < 1.0])))
    energies = np.array([g.energy(x > t) for t in ts])
    k = int(np.argmin(energies))
    sol = _assemble(p, g, x > ts[k], Certificate.THRESHOLDED_RELAXATION)

    vals = p.boundary_data.indicator.astype(np.float64)
    vals[g.free] = x
    u = PhaseField(p.dom.grid, vals)
    return RelaxedResult(u, sol, float(ts[k]), energy_J(u, p.dom, p.weights).J, converged, history)


@dataclass
class OptimalityReport:
    trials: int
    max_violation: float
    violations: int
    tolerance: float = 1e-9

    @property
    def ok(self):
        return self.violations == 0


def check_optimality(sol: PlateauSolution, p: PlateauProblem, trials: int = 100, seed: int = 0,
                     tolerance: float = 1e-9) -> OptimalityReport:
    """Test both one-sided minimality inequalities on random competitors F.

    F inside E^c & omega:  L(E, F)   <= L(E^c - F, F)
    F inside E & omega:    L(E^c, F) <= L(E - F, F)
    """
    rng = np.random.default_rng(seed)
    E, om, w = sol.minimizer, p.dom.omega, p.weights
    outside, inside = (~E) & om, E & om
    worst, bad = 0.0, 0

    def random_subset(pool):
        cells = np.flatnonzero(pool.indicator)
        if cells.size == 0:
            return CellSet.empty(pool.grid)
        if rng.random() < 0.3:
            pick = rng.choice(cells, size=1)
        else:
            pick = cells[rng.random(cells.size) < rng.random()]
        ind = np.zeros(pool.grid.shape, bool)
        ind.flat[pick] = True
        return CellSet(pool.grid, ind)

    for _ in range(trials):
        for pool, A, Bfun in ((outside, E, lambda F: (~E) - F), (inside, ~E, lambda F: E - F)):
            F = random_subset(pool)
            lhs = interaction(A, F, w)
            rhs = interaction(Bfun(F), F, w)
            scale = max(lhs, rhs, 1e-300)
            v = (lhs - rhs) / scale
            worst = max(worst, v)
            bad += v > tolerance
    return OptimalityReport(trials, worst, int(bad), tolerance)


def halfspace_problem(k: KernelSpec, d: int, resolution: int, epsilon: float | None = None,
                      q: QuadratureConfig | None = None) -> PlateauProblem:
    """Unit cube with the collar trace of the lower halfspace, kernel rescaled.

    The default epsilon makes the kernel reach a quarter of the cube width.
    """
    if epsilon is None:
        epsilon = 0.25 / k.truncation_radius
    kr = rescale(k, epsilon)
    dom = make_domain(unit_cube(d), 1.0 / resolution, kr.truncation_radius)
    w = build_weights(kr, dom.grid, q)
    H = make_shape(Halfspace(), dom.grid)
    return PlateauProblem(dom, H & dom.collar, w)


def flatness_experiment(k: KernelSpec, d: int = 2, resolutions=(16, 32, 64), epsilon: float | None = None,
                        q: QuadratureConfig | None = None):
    """Solve the halfspace-trace problem exactly and count cells off the discrete halfspace."""
    adm = check_admissibility(k, q)
    report = {"kernel_id": k.kernel_id, "dimension": d, "C4": bool(adm.C4),
              "informational": not adm.C4, "runs": []}
    for n in resolutions:
        p = halfspace_problem(k, d, n, epsilon, q)
        sol = solve_exact(p)
        H = make_shape(Halfspace(), p.dom.grid)
        diff = len((sol.minimizer ^ H) & p.dom.omega)
        report["runs"].append({"resolution": n, "h": p.dom.grid.cell_size, "epsilon": p.weights.kernel.scale,
                               "sym_diff_cells": diff, "J": sol.energy.J})
    return report
