"""Uniform voxel grids, cell sets, phase fields and analytic reference shapes.

Cells are indexed C-order by ``(i_1, ..., i_d)``; axis ``k`` of the index
array is the coordinate ``x_{k+1}``.  A cell belongs to a rasterised shape
iff its center satisfies the (open) shape predicate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import floor, ceil, pi

import numpy as np
from scipy import ndimage

from .quadrature import sphere_area, unit_ball_volume

DEFAULT_CELL_BUDGET = 4_000_000


class GridError(ValueError):
    pass


class GridMismatch(GridError):
    pass


class BudgetExceeded(GridError):
    pass


class DegenerateShape(GridError):
    pass


class UnsupportedShape(GridError):
    pass


@dataclass(frozen=True)
class GridSpec:
    dimension: int
    cell_size: float
    origin: tuple
    counts: tuple
    budget: int = field(default=DEFAULT_CELL_BUDGET, compare=False, repr=False)

    def __post_init__(self):
        if self.dimension < 1 or len(self.origin) != self.dimension or len(self.counts) != self.dimension:
            raise GridError("origin/counts must have one entry per dimension")
        if not self.cell_size > 0:
            raise GridError("cell size must be positive")
        if any(int(n) < 1 for n in self.counts):
            raise GridError("every axis needs at least one cell")
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        object.__setattr__(self, "counts", tuple(int(n) for n in self.counts))
        if self.n_cells > self.budget:
            raise BudgetExceeded(f"grid with {self.n_cells} cells exceeds the budget of {self.budget}")

    @classmethod
    def covering(cls, lo, hi, h, budget=DEFAULT_CELL_BUDGET):
        """Smallest grid aligned to integer multiples of h that covers [lo, hi]."""
        lo = np.atleast_1d(np.asarray(lo, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(hi, dtype=np.float64))
        first = [floor(a / h + 1e-9) for a in lo]
        last = [ceil(b / h - 1e-9) for b in hi]
        counts = [max(b - a, 1) for a, b in zip(first, last)]
        return cls(len(lo), float(h), tuple(a * h for a in first), tuple(counts), budget)

    @property
    def shape(self):
        return self.counts

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.counts))

    @property
    def cell_volume(self) -> float:
        return self.cell_size**self.dimension

    @property
    def lower(self):
        return np.asarray(self.origin)

    @property
    def upper(self):
        return np.asarray(self.origin) + self.cell_size * np.asarray(self.counts)

    def axis_centers(self, axis: int):
        return self.origin[axis] + self.cell_size * (np.arange(self.counts[axis]) + 0.5)

    def centers(self):
        """Open mesh (broadcastable arrays) of cell-center coordinates."""
        axes = [self.axis_centers(k) for k in range(self.dimension)]
        return np.meshgrid(*axes, indexing="ij", sparse=True)

    def as_dict(self):
        return {"dimension": self.dimension, "cell_size": self.cell_size,
                "origin": list(self.origin), "counts": list(self.counts)}


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


class CellSet:
    """A set of grid cells stored as a read-only boolean array."""

    __slots__ = ("grid", "indicator")

    def __init__(self, grid: GridSpec, indicator):
        indicator = np.asarray(indicator)
        if indicator.shape != grid.shape:
            raise GridMismatch(f"indicator shape {indicator.shape} != grid {grid.shape}")
        self.grid = grid
        self.indicator = _frozen(indicator, bool)

    @classmethod
    def empty(cls, grid):
        return cls(grid, np.zeros(grid.shape, bool))

    @classmethod
    def full(cls, grid):
        return cls(grid, np.ones(grid.shape, bool))

    def _check(self, other):
        if not isinstance(other, CellSet):
            return NotImplemented
        if other.grid != self.grid:
            raise GridMismatch("cell sets live on different grids")
        return other

    def __or__(self, other):
        self._check(other)
        return CellSet(self.grid, self.indicator | other.indicator)

    def __and__(self, other):
        self._check(other)
        return CellSet(self.grid, self.indicator & other.indicator)

    def __sub__(self, other):
        self._check(other)
        return CellSet(self.grid, self.indicator & ~other.indicator)

    def __xor__(self, other):
        self._check(other)
        return CellSet(self.grid, self.indicator ^ other.indicator)

    def __invert__(self):
        return CellSet(self.grid, ~self.indicator)

    def __eq__(self, other):
        if not isinstance(other, CellSet):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.indicator, other.indicator)

    def __hash__(self):
        return hash((self.grid, self.indicator.tobytes()))

    def __len__(self):
        return int(np.count_nonzero(self.indicator))

    def __repr__(self):
        return f"CellSet({len(self)} of {self.grid.n_cells} cells)"

    def complement(self):
        return ~self

    def shift(self, offset):
        """Translate by an integer cell offset; cells leaving the box are dropped."""
        out = np.zeros_like(self.indicator)
        src, dst = [], []
        for o, n in zip(offset, self.grid.shape):
            o = int(o)
            src.append(slice(max(0, -o), min(n, n - o)))
            dst.append(slice(max(0, o), min(n, n + o)))
        out[tuple(dst)] = self.indicator[tuple(src)]
        return CellSet(self.grid, out)

    @property
    def is_empty(self):
        return not self.indicator.any()


class PhaseField:
    """Grid function with values in [0, 1]."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: GridSpec, values):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != grid.shape:
            raise GridMismatch(f"values shape {values.shape} != grid {grid.shape}")
        if not np.all(np.isfinite(values)) or values.min(initial=0.0) < 0 or values.max(initial=0.0) > 1:
            raise GridError("phase field values must lie in [0, 1]")
        self.grid = grid
        self.values = _frozen(values, np.float64)

    @classmethod
    def indicator(cls, s: CellSet):
        return cls(s.grid, s.indicator.astype(np.float64))

    def superlevel(self, t: float) -> CellSet:
        return CellSet(self.grid, self.values > t)


# -- shapes ----------------------------------------------------------------------

@dataclass(frozen=True)
class Halfspace:
    """{x : x_axis < offset}; axis=-1 is the last coordinate."""
    axis: int = -1
    offset: float = 0.0

    def contains(self, x):
        return x[self.axis] < self.offset


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DegenerateShape(f"ball radius must be positive, got {self.radius}")

    def contains(self, x):
        r2 = sum((xk - ck) ** 2 for xk, ck in zip(x, self.center))
        return r2 < self.radius**2


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or any(not a < b for a, b in zip(self.lo, self.hi)):
            raise DegenerateShape(f"box corners must satisfy lo < hi, got {self.lo}, {self.hi}")

    def contains(self, x):
        inside = True
        for xk, a, b in zip(x, self.lo, self.hi):
            inside = inside & (xk > a) & (xk < b)
        return inside


@dataclass(frozen=True)
class Annulus:
    center: tuple
    r_in: float
    r_out: float

    def __post_init__(self):
        if not 0 <= self.r_in < self.r_out:
            raise DegenerateShape("annulus needs 0 <= r_in < r_out")

    def contains(self, x):
        r2 = sum((xk - ck) ** 2 for xk, ck in zip(x, self.center))
        return (r2 > self.r_in**2) & (r2 < self.r_out**2)


@dataclass(frozen=True)
class WavyHalfspace:
    """{x : x_axis < offset + amplitude sin(2 pi x_along / wavelength + phase)}."""
    amplitude: float
    wavelength: float
    axis: int = -1
    along: int = 0
    offset: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if not self.wavelength > 0:
            raise DegenerateShape("wavelength must be positive")

    def contains(self, x):
        wave = self.amplitude * np.sin(2 * pi * x[self.along] / self.wavelength + self.phase)
        return x[self.axis] < self.offset + wave


@dataclass(frozen=True)
class Empty:
    def contains(self, x):
        return np.zeros(np.broadcast_shapes(*(np.shape(a) for a in x)), bool)


SHAPES = {"halfspace": Halfspace, "ball": Ball, "box": Box, "annulus": Annulus,
          "wavy": WavyHalfspace, "empty": Empty}


def shape_from_dict(spec: dict):
    """Build a shape from a config record like {kind="ball", center=[0,0], radius=0.25}."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in SHAPES:
        raise GridError(f"unknown shape kind {kind!r}")
    for key in ("center", "lo", "hi"):
        if key in spec:
            spec[key] = tuple(float(v) for v in spec[key])
    return SHAPES[kind](**spec)


def unit_cube(d: int) -> Box:
    return Box((-0.5,) * d, (0.5,) * d)


def make_shape(kind, grid: GridSpec) -> CellSet:
    """Rasterise a shape by the cell-center rule."""
    if isinstance(kind, Ball) and len(kind.center) != grid.dimension:
        raise GridError("ball center dimension mismatch")
    mask = np.broadcast_to(kind.contains(grid.centers()), grid.shape)
    return CellSet(grid, mask)


def lebesgue_measure(s: CellSet) -> float:
    return len(s) * s.grid.cell_volume


# -- domains -----------------------------------------------------------------------

class DomainMask:
    """Omega as a cell set plus the exterior collar within reach r_eff of it."""

    def __init__(self, grid: GridSpec, omega: CellSet, r_eff: float, shape=None):
        if omega.grid != grid:
            raise GridMismatch("omega lives on another grid")
        if omega.is_empty:
            raise GridError("omega must contain at least one cell")
        self.grid = grid
        self.omega = omega
        self.r_eff = float(r_eff)
        self.shape = shape
        if self.r_eff > 0:
            dist = ndimage.distance_transform_edt(~omega.indicator)
            collar = (~omega.indicator) & (dist * grid.cell_size <= self.r_eff * (1 + 1e-12))
        else:
            collar = np.zeros(grid.shape, bool)
        self.collar = CellSet(grid, collar)
        idx = np.nonzero(omega.indicator)
        self.margin = min(min(int(i.min()), n - 1 - int(i.max())) for i, n in zip(idx, grid.shape))

    @property
    def support(self) -> CellSet:
        return self.omega | self.collar


def shape_bounds(shape):
    if isinstance(shape, Box):
        return np.asarray(shape.lo), np.asarray(shape.hi)
    if isinstance(shape, Ball):
        c = np.asarray(shape.center)
        return c - shape.radius, c + shape.radius
    if isinstance(shape, Annulus):
        c = np.asarray(shape.center)
        return c - shape.r_out, c + shape.r_out
    raise UnsupportedShape(f"{type(shape).__name__} is unbounded")


def make_domain(omega_shape, h: float, r_eff: float, budget=DEFAULT_CELL_BUDGET) -> DomainMask:
    """Grid covering omega dilated by r_eff, aligned to multiples of h."""
    lo, hi = shape_bounds(omega_shape)
    pad = r_eff + h if r_eff > 0 else 0.0
    grid = GridSpec.covering(lo - pad, hi + pad, h, budget)
    omega = make_shape(omega_shape, grid)
    return DomainMask(grid, omega, r_eff, shape=omega_shape)


# -- classical perimeter of reference shapes ------------------------------------------

def _window_box(window):
    if window is None:
        return None
    if isinstance(window, DomainMask):
        window = window.shape
    if not isinstance(window, Box):
        raise UnsupportedShape("analytic perimeters need an axis-aligned box window")
    return window


def _circle_arc_in_box(center, r, box: Box) -> float:
    c = np.asarray(center, dtype=np.float64)
    angles = [0.0, 2 * pi]
    for axis in (0, 1):
        for plane in (box.lo[axis], box.hi[axis]):
            u = (plane - c[axis]) / r
            if -1.0 <= u <= 1.0:
                base = np.arccos(u) if axis == 0 else np.arcsin(u)
                cands = (base, -base) if axis == 0 else (base, pi - base)
                angles.extend(float(np.mod(a, 2 * pi)) for a in cands)
    angles = np.unique(angles)
    total = 0.0
    for a, b in zip(angles[:-1], angles[1:]):
        m = 0.5 * (a + b)
        p = (c[0] + r * np.cos(m), c[1] + r * np.sin(m))
        if box.lo[0] < p[0] < box.hi[0] and box.lo[1] < p[1] < box.hi[1]:
            total += (b - a) * r
    return total


def _sphere_in_box(center, r, d, box):
    area = sphere_area(d) * r ** (d - 1)
    if box is None:
        return area
    c = np.asarray(center, dtype=np.float64)
    if d == 2:
        return _circle_arc_in_box(c, r, box)
    lo, hi = np.asarray(box.lo), np.asarray(box.hi)
    if np.all(c - r > lo) and np.all(c + r < hi):
        return area
    if np.linalg.norm(np.clip(c, lo, hi) - c) >= r:
        return 0.0
    raise UnsupportedShape("partial sphere/box intersections are only supported for d=2")


def classical_perimeter(kind, window=None) -> float:
    """H^{d-1} of the reduced boundary of an analytic shape inside an open box.

    ``window`` is a Box, a DomainMask built from a Box, or None for R^d.
    """
    box = _window_box(window)
    if isinstance(kind, Empty):
        return 0.0
    if isinstance(kind, Halfspace):
        if box is None:
            return float("inf")
        d = len(box.lo)
        a = kind.axis % d
        if not box.lo[a] < kind.offset < box.hi[a]:
            return 0.0
        return float(np.prod([box.hi[k] - box.lo[k] for k in range(d) if k != a]))
    if isinstance(kind, Ball):
        return _sphere_in_box(kind.center, kind.radius, len(kind.center), box)
    if isinstance(kind, Annulus):
        d = len(kind.center)
        inner = _sphere_in_box(kind.center, kind.r_in, d, box) if kind.r_in > 0 else 0.0
        return inner + _sphere_in_box(kind.center, kind.r_out, d, box)
    if isinstance(kind, Box):
        d = len(kind.lo)
        total = 0.0
        for a in range(d):
            for plane in (kind.lo[a], kind.hi[a]):
                if box is not None and not box.lo[a] < plane < box.hi[a]:
                    continue
                face = 1.0
                for k in range(d):
                    if k == a:
                        continue
                    lo_k, hi_k = kind.lo[k], kind.hi[k]
                    if box is not None:
                        lo_k, hi_k = max(lo_k, box.lo[k]), min(hi_k, box.hi[k])
                    face *= max(hi_k - lo_k, 0.0)
                total += face
        return total
    raise UnsupportedShape(f"no analytic perimeter for {type(kind).__name__}")


def boundary_overlap(kind, window) -> float:
    """H^{d-1}(reduced boundary of E  intersected with  the boundary of a box)."""
    box = _window_box(window)
    d = len(box.lo)
    if isinstance(kind, (Empty, Ball, Annulus)):
        return 0.0
    if isinstance(kind, Halfspace):
        a = kind.axis % d
        if kind.offset in (box.lo[a], box.hi[a]):
            return float(np.prod([box.hi[k] - box.lo[k] for k in range(d) if k != a]))
        return 0.0
    if isinstance(kind, Box):
        total = 0.0
        for a in range(d):
            for plane in (kind.lo[a], kind.hi[a]):
                if plane not in (box.lo[a], box.hi[a]):
                    continue
                face = 1.0
                for k in range(d):
                    if k != a:
                        face *= max(min(kind.hi[k], box.hi[k]) - max(kind.lo[k], box.lo[k]), 0.0)
                total += face
        return total
    raise UnsupportedShape(f"no analytic boundary overlap for {type(kind).__name__}")


def ball_volume(d: int, r: float) -> float:
    return unit_ball_volume(d) * r**d
