"""epsilon-sweeps of the rescaled energies and their extrapolated limits."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass

import numpy as np

from .functional import build_weights, perimeter_K
from .grid import (
    DEFAULT_CELL_BUDGET,
    Halfspace,
    WavyHalfspace,
    boundary_overlap,
    classical_perimeter,
    make_domain,
    make_shape,
    unit_cube,
)
from .kernel import KernelSpec, compute_constants, rescale
from .quadrature import QuadratureConfig

DEFAULT_EPSILONS = (1 / 4, 1 / 8, 1 / 16, 1 / 32)
CSV_HEADER = ("epsilon", "h", "ratio_J1", "ratio_J2", "ref_J1", "ref_J2")


class InsufficientPoints(ValueError):
    pass


@dataclass(frozen=True)
class SweepRecord:
    epsilon: float
    h: float
    ratio_J1: float
    ratio_J2: float
    ref_J1: float
    ref_J2: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    @property
    def ratio_J(self):
        """J_eps / eps = J1/(2 eps) + J2/eps."""
        return self.ratio_J1 + self.ratio_J2

    @property
    def ref_J(self):
        return self.ref_J1 + self.ref_J2


@dataclass(frozen=True)
class ExtrapolationResult:
    limit_estimate: float
    slope: float
    residual: float
    relative_error: float
    reference: float
    n_points: int

    def to_dict(self):
        return asdict(self)


def sweep(E_shape, omega_shape, k: KernelSpec, eps_list=DEFAULT_EPSILONS, q: int = 8,
          quad: QuadratureConfig | None = None, budget: int = DEFAULT_CELL_BUDGET,
          exterior: bool = True) -> list[SweepRecord]:
    """Ratios (1/2eps) J1_eps and (1/eps) J2_eps of a fixed shape at h = eps/q."""
    if q < 8:
        raise ValueError("resolution factor q must be at least 8")
    c_K = compute_constants(k, quad).c_K
    ref1 = c_K * classical_perimeter(E_shape, omega_shape)
    ref2 = c_K * boundary_overlap(E_shape, omega_shape)
    records = []
    for eps in sorted((float(e) for e in eps_list), reverse=True):
        kr = rescale(k, eps)
        h = eps / q
        dom = make_domain(omega_shape, h, kr.truncation_radius if exterior else 0.0, budget)
        w = build_weights(kr, dom.grid, quad)
        eb = perimeter_K(make_shape(E_shape, dom.grid), dom, w, exterior=exterior)
        records.append(SweepRecord(eps, h, eb.J1 / (2 * eps), eb.J2 / eps, ref1, ref2))
    return records


def extrapolate(records, field: str = "ratio_J1", reference: float | None = None) -> ExtrapolationResult:
    """Least-squares fit ratio ~ limit + slope * eps over all records."""
    eps = np.array([r.epsilon for r in records], dtype=np.float64)
    if np.unique(eps).size < 3:
        raise InsufficientPoints("need at least 3 distinct epsilons")
    y = np.array([getattr(r, field) for r in records], dtype=np.float64)
    if reference is None:
        reference = getattr(records[0], field.replace("ratio", "ref"))
    A = np.stack([np.ones_like(eps), eps], axis=1)
    (limit, slope), *_ = np.linalg.lstsq(A, y, rcond=None)
    residual = float(np.sqrt(np.mean((A @ (limit, slope) - y) ** 2)))
    err = abs(limit - reference)
    if reference != 0:
        err /= abs(reference)
    return ExtrapolationResult(float(limit), float(slope), residual, float(err), float(reference), len(eps))


def records_to_csv(records) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_HEADER)
    for r in records:
        wr.writerow([repr(getattr(r, c)) for c in CSV_HEADER])
    return buf.getvalue()


def summary_json(records, results: dict, **meta) -> str:
    rec = {"extrapolation": {k: v.to_dict() for k, v in results.items()},
           "records": [asdict(r) for r in records]}
    rec.update(meta)
    return json.dumps(rec, sort_keys=True, indent=2)


def gamma_liminf_probe(k: KernelSpec, amplitude: float, eps_list=(1 / 8, 1 / 16, 1 / 32), q: int = 8,
                       wavelength: float = 4.0, rtol: float = 1e-12,
                       quad: QuadratureConfig | None = None):
    """Compare (1/2eps) J1_eps in the unit cube for the flat and a wavy halfspace.

    The interface is displaced by amplitude*eps * sin(2 pi x_1 / (wavelength*eps)).
    """
    d = k.dimension
    U = unit_cube(d)
    runs = []
    for eps in sorted((float(e) for e in eps_list), reverse=True):
        kr = rescale(k, eps)
        dom = make_domain(U, eps / q, 0.0)
        w = build_weights(kr, dom.grid, quad)
        flat = perimeter_K(make_shape(Halfspace(), dom.grid), dom, w, exterior=False).J1 / (2 * eps)
        wavy_shape = WavyHalfspace(amplitude * eps, wavelength * eps)
        wavy = perimeter_K(make_shape(wavy_shape, dom.grid), dom, w, exterior=False).J1 / (2 * eps)
        runs.append({"epsilon": eps, "flat": flat, "perturbed": wavy,
                     "ok": bool(wavy >= flat * (1 - rtol))})
    return {"kernel_id": k.kernel_id, "amplitude": amplitude, "wavelength": wavelength,
            "runs": runs, "ok": all(r["ok"] for r in runs)}
