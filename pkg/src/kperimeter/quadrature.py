"""One-dimensional quadrature building blocks and deterministic reductions."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gamma, pi

import numpy as np


@dataclass(frozen=True)
class QuadratureConfig:
    """Accuracy knobs shared by the kernel and weight-table builders.

    radial_nodes
        Gauss-Legendre points per panel in every 1-D radial integral.
    tail_tolerance
        Largest admissible value of the truncated tail of
        ``int K(h) (1 + |h|) dh``; used to pick truncation radii.
    subcell_refinement
        Panels per axis and per smooth piece in the near-diagonal cell-pair
        quadrature.  Singular kernels additionally get geometric grading.
    """

    radial_nodes: int = 24
    tail_tolerance: float = 1e-3
    subcell_refinement: int = 4

    def __post_init__(self):
        if self.radial_nodes < 16:
            raise ValueError("radial_nodes must be at least 16")
        if not (0.0 < self.tail_tolerance <= 1e-3):
            raise ValueError("tail_tolerance must lie in (0, 1e-3]")
        if self.subcell_refinement < 1:
            raise ValueError("subcell_refinement must be >= 1")


def tree_sum(values) -> float:
    """Sum with a fixed binary reduction tree.

    The pairing only depends on the number of terms, so the result is
    bit-identical for a given input order no matter how the terms were
    produced (serially or by worker threads).
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size == 0:
        return 0.0
    while x.size > 1:
        if x.size % 2:
            x = np.append(x, 0.0)
        x = x[0::2] + x[1::2]
    return float(x[0])


@lru_cache(maxsize=None)
def _gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(breaks, n: int):
    """Composite Gauss-Legendre nodes and weights on consecutive panels."""
    b = np.asarray(breaks, dtype=np.float64)
    b = np.unique(b)
    if b.size < 2:
        return np.empty(0), np.empty(0)
    x, w = _gauss_legendre(n)
    a, c = b[:-1, None], b[1:, None]
    half = 0.5 * (c - a)
    nodes = (a + c) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def graded_breaks(a: float, b: float, levels: int, ratio: float = 0.5):
    """Breakpoints on [a, b] refined geometrically toward ``a``."""
    L = b - a
    inner = a + L * ratio ** np.arange(levels, 0, -1)
    return np.concatenate(([a], inner, [b]))


def unit_ball_volume(d: int) -> float:
    """Volume omega_d of the unit ball in R^d."""
    return pi ** (d / 2) / gamma(d / 2 + 1)


def sphere_area(d: int) -> float:
    """(d-1)-dimensional measure of the unit sphere in R^d (2 for d=1)."""
    return d * unit_ball_volume(d)
