"""Discrete nonlocal interactions, K-perimeters and K-energies on voxel grids.

Every double integral over cell pairs is reduced to per-offset sums

    S(o) = sum_i a_i b_{i+o} [ |u_{i+o} - u_i| ]

followed by a weighted sum over offsets.  Offsets come in pairs (o, -o) with
equal weight; the pair sums are folded onto the canonical half before the
final fixed-tree reduction, which makes every energy exactly symmetric under
swapping its two arguments.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .grid import (
    Box,
    CellSet,
    DomainMask,
    GridError,
    GridMismatch,
    GridSpec,
    PhaseField,
    classical_perimeter,
    make_shape,
)
from .kernel import KernelSpec, c_prime, check_admissibility, rescale
from .quadrature import QuadratureConfig, graded_breaks, panel_rule, tree_sum

_THREADS = 1


def set_threads(n: int | None):
    """Number of worker threads for the per-offset loops (results do not depend on it)."""
    global _THREADS
    import os
    _THREADS = max(1, int(n or os.cpu_count() or 1))


class CollarTooSmall(GridError):
    pass


class SingularWeightOverflow(ArithmeticError):
    pass


class SetsOverlap(GridError):
    pass


class NonConvexDomain(GridError):
    pass


class NonFiniteLevels(ValueError):
    pass


# -- weight tables -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PairWeightTable:
    """w(o) ~ int_{cell} int_{cell + o h} K(y - x) dy dx for offsets o != 0."""

    kernel: KernelSpec
    grid: GridSpec
    offsets: np.ndarray
    weights: np.ndarray
    near_band: int
    canon: np.ndarray = field(repr=False)
    mirror: np.ndarray = field(repr=False)

    @property
    def cell_size(self) -> float:
        return self.grid.cell_size

    @property
    def dimension(self) -> int:
        return self.grid.dimension

    def weight(self, o) -> float:
        o = np.asarray(o, dtype=np.int64)
        hit = np.nonzero(np.all(self.offsets == o, axis=1))[0]
        return float(self.weights[hit[0]]) if hit.size else 0.0

    @property
    def reach(self) -> int:
        """Largest Chebyshev length of an offset with nonzero weight."""
        nz = self.weights > 0
        return int(np.abs(self.offsets[nz]).max()) if nz.any() else 0

    @property
    def total(self) -> float:
        return tree_sum(self.weights)


def _enumerate_offsets(R, h, d, counts):
    r = int(np.floor(R / h + 1e-9))
    axes = [np.arange(-min(r, n - 1), min(r, n - 1) + 1) for n in counts]
    mesh = np.meshgrid(*axes, indexing="ij")
    o = np.stack([m.ravel() for m in mesh], axis=1).astype(np.int64)
    n2 = np.sum(o * o, axis=1)
    keep = (n2 > 0) & (n2 * h * h <= R * R * (1 + 1e-12))
    return o[keep]


def _axis_rule(k, o_k, h, q, singular):
    """Nodes/weights in z_k for the tent T(z) = (h - |z - o_k h|)_+."""
    c = o_k * h
    cuts = sorted({c - h, c, c + h} | ({0.0} if c - h < 0.0 < c + h else set()))
    d = k.dimension
    p = 8 if d <= 2 else 4
    m = q.subcell_refinement
    pieces = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if singular and a == 0.0:
            br = graded_breaks(a, b, 30 if d <= 2 else 12)
        elif singular and b == 0.0:
            br = b - graded_breaks(0.0, b - a, 30 if d <= 2 else 12)[::-1]
        else:
            br = np.linspace(a, b, m + 1)
        pieces.append(br)
    x, w = panel_rule(np.concatenate(pieces), p)
    return x, w * np.maximum(h - np.abs(x - c), 0.0)


def cell_pair_quadrature(k: KernelSpec, o, h: float, q: QuadratureConfig) -> float:
    """Tensor Gauss-Legendre value of the cell-pair integral for offset o.

    Uses the translated form  int K(z) prod_k (h - |z_k - o_k h|)_+ dz.
    """
    singular = k.singular_at_origin
    rules = [_axis_rule(k, int(ok), h, q, singular) for ok in o]
    mesh = np.meshgrid(*[x for x, _ in rules], indexing="ij", sparse=True)
    r = np.sqrt(sum(m * m for m in mesh))
    out = k(np.broadcast_to(r, tuple(len(x) for x, _ in rules)))
    for _, w in rules:
        out = np.tensordot(w, out, axes=([0], [0]))
    return float(out)


def build_weights(k: KernelSpec, g: GridSpec, q: QuadratureConfig | None = None,
                  near_band: int = 2) -> PairWeightTable:
    """Pair weights for all offsets reachable within the truncation radius.

    Offsets with Chebyshev length <= near_band use tensor quadrature of the
    cell-pair integral; all others the midpoint value K(o h) h^{2d}.
    Offsets longer than the grid extent are dropped (they join no cells).
    """
    q = q or QuadratureConfig()
    if k.dimension != g.dimension:
        raise GridMismatch("kernel and grid dimensions differ")
    if k.singular_at_origin and not check_admissibility(k, q).C2:
        raise SingularWeightOverflow(f"{k.kernel_id}: K(h) min(1,|h|) is not integrable, "
                                     "near-diagonal weights diverge")
    h, d = g.cell_size, g.dimension
    offsets = _enumerate_offsets(k.truncation_radius, h, d, g.counts)
    dist = np.sqrt(np.sum(offsets.astype(np.float64) ** 2, axis=1)) * h
    weights = k(dist) * h ** (2 * d)

    # canonical half: first nonzero coordinate positive
    first_nz = np.argmax(offsets != 0, axis=1)
    canon_mask = offsets[np.arange(len(offsets)), first_nz] > 0
    index = {tuple(o): i for i, o in enumerate(offsets.tolist())}
    canon = np.nonzero(canon_mask)[0]
    mirror = np.array([index[tuple((-offsets[i]).tolist())] for i in canon], dtype=np.int64)

    band = np.max(np.abs(offsets), axis=1) <= near_band if len(offsets) else np.zeros(0, bool)
    for i, j in zip(canon, mirror):
        if band[i]:
            w = cell_pair_quadrature(k, offsets[i], h, q)
            if not np.isfinite(w):
                raise SingularWeightOverflow(f"cell-pair weight diverges at offset {offsets[i]}")
            weights[i] = w
        weights[j] = weights[i]
    weights.setflags(write=False)
    offsets.setflags(write=False)
    return PairWeightTable(k, g, offsets, weights, near_band, canon, mirror)


def _check_table(w: PairWeightTable, grid: GridSpec):
    if w.dimension != grid.dimension or abs(w.cell_size - grid.cell_size) > 1e-15 * grid.cell_size:
        raise GridMismatch("weight table built for another grid")
    r = int(np.floor(w.kernel.truncation_radius / w.cell_size + 1e-9))
    for n, tn in zip(grid.counts, w.grid.counts):
        if n > tn and r > tn - 1:
            raise GridMismatch("weight table offsets were clipped to a smaller grid")


# -- the offset-sum engine ------------------------------------------------------------------

def _bbox(mask):
    idx = np.nonzero(mask)
    return [int(i.min()) for i in idx], [int(i.max()) + 1 for i in idx]


def _pair_sums(anchor, partner, offsets, values=None, signed=False):
    """S(o) for each offset; integer counts when values is None.

    With values, S(o) sums |u_{i+o} - u_i|, or with signed=True returns the
    pair (sum (u_i - u_{i+o})_+, sum (u_{i+o} - u_i)_+).
    """
    out = np.zeros(len(offsets), dtype=np.float64)
    out2 = np.zeros(len(offsets), dtype=np.float64)
    result = (out, out2) if signed else out
    if not anchor.any() or not partner.any() or len(offsets) == 0:
        return result
    alo, ahi = _bbox(anchor)
    plo, phi = _bbox(partner)
    lo_o = np.asarray(plo) - np.asarray(ahi) + 1
    hi_o = np.asarray(phi) - 1 - np.asarray(alo)
    live = np.all((offsets >= lo_o) & (offsets <= hi_o), axis=1)
    idx = np.nonzero(live)[0]
    if idx.size == 0:
        return result
    pad = np.abs(offsets[idx]).max(axis=0)
    ppad = np.pad(partner, [(p, p) for p in pad])
    a = anchor[tuple(slice(l, u) for l, u in zip(alo, ahi))]
    if values is not None:
        vpad = np.pad(values, [(p, p) for p in pad])
        va = values[tuple(slice(l, u) for l, u in zip(alo, ahi))]
    base = np.asarray(alo) + pad
    ext = np.asarray(ahi) - np.asarray(alo)

    def work(chunk):
        buf = np.empty(a.shape, bool)
        for i in chunk:
            s = base + offsets[i]
            sl = tuple(slice(x, x + e) for x, e in zip(s, ext))
            np.logical_and(a, ppad[sl], out=buf)
            if values is None:
                out[i] = np.count_nonzero(buf)
            elif signed:
                diff = vpad[sl] - va
                out[i] = np.sum(np.maximum(-diff, 0.0), where=buf)
                out2[i] = np.sum(np.maximum(diff, 0.0), where=buf)
            else:
                out[i] = np.sum(np.abs(vpad[sl] - va), where=buf)

    if _THREADS > 1 and idx.size > 256:
        chunks = np.array_split(idx, _THREADS * 4)
        with ThreadPoolExecutor(_THREADS) as ex:
            list(ex.map(work, chunks))
    else:
        work(idx)
    return result


def _folded_total(w: PairWeightTable, per_offset):
    """sum_o w(o) S(o) with S(o)+S(-o) combined on the canonical half."""
    folded = per_offset[w.canon] + per_offset[w.mirror]
    return tree_sum(w.weights[w.canon] * folded)


# -- energies --------------------------------------------------------------------------------------

@dataclass
class EnergyBreakdown:
    J1: float
    J2: float
    J: float
    L_in: float
    L_out1: float
    L_out2: float
    kernel_id: str = ""
    grid: dict = field(default_factory=dict)
    epsilon: float = 1.0

    def to_dict(self):
        return asdict(self)

    def to_json(self, **extra):
        rec = self.to_dict()
        rec.update(extra)
        return json.dumps(rec, sort_keys=True)

    def fields(self):
        return (self.J1, self.J2, self.J, self.L_in, self.L_out1, self.L_out2)


def _meta(w: PairWeightTable, grid: GridSpec):
    return dict(kernel_id=w.kernel.kernel_id, grid=grid.as_dict(), epsilon=w.kernel.scale)


def interaction(E: CellSet, F: CellSet, w: PairWeightTable) -> float:
    """L(E, F) = sum over i in E, j in F, j != i of w(j - i)."""
    if E.grid != F.grid:
        raise GridMismatch("E and F live on different grids")
    _check_table(w, E.grid)
    return _folded_total(w, _pair_sums(E.indicator, F.indicator, w.offsets))


def _check_collar(dom: DomainMask, w: PairWeightTable):
    if w.kernel.truncation_radius > dom.r_eff * (1 + 1e-12) or w.reach > dom.margin:
        raise CollarTooSmall(
            f"kernel reach {w.kernel.truncation_radius:g} ({w.reach} cells) exceeds the "
            f"collar (r_eff={dom.r_eff:g}, margin={dom.margin} cells)")


def perimeter_K(E: CellSet, dom: DomainMask, w: PairWeightTable, exterior: bool = True) -> EnergyBreakdown:
    """Nonlocal K-perimeter of E in omega with its three couplings.

    With exterior=False only the omega x omega part (J1, L_in) is evaluated
    and no collar is required.
    """
    if E.grid != dom.grid:
        raise GridMismatch("E is not on the domain grid")
    _check_table(w, dom.grid)
    om = dom.omega.indicator
    e = E.indicator
    n_in = _pair_sums(e & om, ~e & om, w.offsets)
    J1 = _folded_total(w, 2.0 * n_in)
    if exterior:
        _check_collar(dom, w)
        col = dom.collar.indicator
        n1 = _pair_sums(e & om, ~e & col, w.offsets)
        n2 = _pair_sums(~e & om, e & col, w.offsets)
        L_out1 = _folded_total(w, n1)
        L_out2 = _folded_total(w, n2)
        J2 = _folded_total(w, n1 + n2)
    else:
        L_out1 = L_out2 = J2 = 0.0
    return EnergyBreakdown(J1, J2, 0.5 * J1 + J2, 0.5 * J1, L_out1, L_out2, **_meta(w, dom.grid))


def energy_J(u: PhaseField, dom: DomainMask, w: PairWeightTable, exterior: bool = True) -> EnergyBreakdown:
    """J1, J2 and J = J1/2 + J2 for a [0,1]-valued field (collar values are data).

    The couplings generalize to L_out1 = sum w (u_i - u_j)_+ and
    L_out2 = sum w (u_j - u_i)_+ over i in omega, j in the collar; for an
    indicator every field equals the perimeter_K one bit for bit.
    """
    if u.grid != dom.grid:
        raise GridMismatch("u is not on the domain grid")
    _check_table(w, dom.grid)
    om = dom.omega.indicator
    v = u.values
    half = w.offsets[w.canon]
    s1 = _pair_sums(om, om, half, v)
    J1 = tree_sum(w.weights[w.canon] * (2.0 * s1))
    if exterior:
        _check_collar(dom, w)
        p, m = _pair_sums(om, dom.collar.indicator, w.offsets, v, signed=True)
        L_out1, L_out2 = _folded_total(w, p), _folded_total(w, m)
        J2 = _folded_total(w, p + m)
    else:
        L_out1 = L_out2 = J2 = 0.0
    return EnergyBreakdown(J1, J2, 0.5 * J1 + J2, 0.5 * J1, L_out1, L_out2, **_meta(w, dom.grid))


@dataclass(frozen=True)
class CoareaResult:
    lhs: float
    rhs: float
    levels: tuple

    @property
    def relative_gap(self):
        scale = max(abs(self.lhs), abs(self.rhs))
        return abs(self.lhs - self.rhs) / scale if scale else 0.0


def coarea_check(u: PhaseField, dom: DomainMask, w: PairWeightTable, levels=None,
                 exterior: bool = True) -> CoareaResult:
    """J(u) against sum over level gaps of gap * Per_K({u > t})."""
    support = dom.support.indicator
    if levels is None:
        levels = np.unique(u.values[support])
    levels = np.asarray(levels, dtype=np.float64)
    if not np.all(np.isfinite(levels)):
        raise NonFiniteLevels("levels must be finite")
    breaks = np.unique(np.concatenate(([0.0], levels[(levels > 0) & (levels < 1)], [1.0])))
    lhs = energy_J(u, dom, w, exterior).J
    terms = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        per = perimeter_K(u.superlevel(a), dom, w, exterior).J
        terms.append((b - a) * per)
    return CoareaResult(lhs, tree_sum(terms), tuple(breaks.tolist()))


def submodularity_gap(E: CellSet, F: CellSet, dom: DomainMask, w: PairWeightTable,
                      exterior: bool = True) -> float:
    """Per(E) + Per(F) - Per(E & F) - Per(E | F); nonnegative up to roundoff."""
    p = lambda s: perimeter_K(s, dom, w, exterior).J  # noqa: E731
    return (p(E) + p(F)) - (p(E & F) + p(E | F))


def locality_defect(E: CellSet, F: CellSet, k: KernelSpec, eps_list, q: QuadratureConfig | None = None,
                    resolution_factor: float = 8.0):
    """(1/eps) L_{K_eps}(E, F) for each eps, weights rebuilt per eps on E's grid."""
    q = q or QuadratureConfig()
    if E.grid != F.grid:
        raise GridMismatch("E and F live on different grids")
    if not (E & F).is_empty:
        raise SetsOverlap("E and F must be disjoint")
    eps_list = [float(e) for e in eps_list]
    if E.grid.cell_size > min(eps_list) / resolution_factor * (1 + 1e-12):
        raise GridError(f"cell size must be <= eps/{resolution_factor:g} for every eps")
    out = []
    for eps in eps_list:
        w = build_weights(rescale(k, eps), E.grid, q)
        out.append({"epsilon": eps, "value": interaction(E, F, w) / eps})
    return out


def bv_bound_check(shape, dom: DomainMask, w: PairWeightTable, q: QuadratureConfig | None = None):
    """J1(E, omega) and c'_K Per(E, omega) for a convex (box) omega."""
    if not isinstance(dom.shape, Box):
        raise NonConvexDomain("only box domains are accepted as convex")
    E = make_shape(shape, dom.grid)
    J1 = perimeter_K(E, dom, w, exterior=False).J1
    bound = float(c_prime(w.kernel, q) * classical_perimeter(shape, dom.shape))
    return {"J1": J1, "bound": bound}
