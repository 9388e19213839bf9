"""Radial interaction kernels, admissibility checks and limit constants.

A kernel is described by a radial profile ``Kbar(r)``; ``K(h) = Kbar(|h|)``.
Every kernel carries a truncation radius beyond which the grid machinery
treats it as zero.  The limit constants are computed from the untruncated
profile.

Catalog ids::

    gauss:sigma=1        Kbar(r) = exp(-(r/sigma)^2)
    exp:lambda=1         Kbar(r) = exp(-lambda r)
    ball:R=1             Kbar(r) = 1 for r < R
    frac:s=0.5,R=4       Kbar(r) = max(r, rmin)^-(d+s) for r < R  (rmin=0 default)
    tab:file=path.csv    piecewise-linear profile from "r,value" rows

Any id may add ``trunc=<radius>`` to override the automatic truncation.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from math import pi

import numpy as np

from .quadrature import (
    QuadratureConfig,
    graded_breaks,
    panel_rule,
    sphere_area,
    tree_sum,
    unit_ball_volume,
)

__all__ = [
    "AdmissibilityReport",
    "KernelConstants",
    "KernelSpec",
    "check_admissibility",
    "compute_constants",
    "make_kernel",
    "rescale",
    "tabulated_kernel",
]


class KernelError(ValueError):
    pass


class UnknownKernel(KernelError):
    pass


class NonFiniteKernelValue(KernelError):
    pass


class NonPositiveEpsilon(KernelError):
    pass


class QuadratureInconsistency(RuntimeError):
    pass


_PARAM_NAMES = {
    "gauss": ("sigma",),
    "exp": ("lambda",),
    "ball": ("R",),
    "frac": ("s", "R", "rmin"),
    "tab": (),
}

# Relative identity tolerance between the direct and the radial route to c_K.
IDENTITY_RTOL = 1e-6


@dataclass(frozen=True)
class KernelSpec:
    family: str
    params: tuple
    dimension: int
    truncation_radius: float
    strictly_decreasing: bool
    scale: float = 1.0
    samples: tuple = field(default=(), repr=False)
    source: str = ""

    def param(self, name, default=None):
        for key, value in self.params:
            if key == name:
                return value
        if default is None:
            raise KeyError(name)
        return default

    # -- profile -----------------------------------------------------------
    def _base(self, r):
        f = self.family
        if f == "gauss":
            return np.exp(-((r / self.param("sigma")) ** 2))
        if f == "exp":
            return np.exp(-self.param("lambda") * r)
        if f == "ball":
            return np.where(r < self.param("R"), 1.0, 0.0)
        if f == "frac":
            R, s, rmin = self.param("R"), self.param("s"), self.param("rmin", 0.0)
            with np.errstate(divide="ignore"):
                v = np.maximum(r, rmin) ** (-(self.dimension + s))
            return np.where(r < R, v, 0.0)
        if f == "tab":
            rs = np.array([p[0] for p in self.samples])
            vs = np.array([p[1] for p in self.samples])
            return np.interp(r, rs, vs, right=0.0)
        raise UnknownKernel(f)

    def profile(self, r):
        """Untruncated radial profile of the (possibly rescaled) kernel."""
        r = np.asarray(r, dtype=np.float64)
        e = self.scale
        return self._base(r / e) / e**self.dimension

    def __call__(self, r):
        """Truncated profile: zero for r > truncation_radius."""
        r = np.asarray(r, dtype=np.float64)
        return np.where(r <= self.truncation_radius, self.profile(r), 0.0)

    def evaluate(self, h):
        """K(h) for an array of vectors with trailing axis of length d."""
        h = np.asarray(h, dtype=np.float64)
        return self(np.sqrt(np.sum(h * h, axis=-1)))

    # -- geometry used by quadrature ----------------------------------------
    @property
    def length_scale(self) -> float:
        f = self.family
        base = {
            "gauss": lambda: self.param("sigma"),
            "exp": lambda: 1.0 / self.param("lambda"),
            "ball": lambda: self.param("R"),
            "frac": lambda: self.param("R"),
            "tab": lambda: self.samples[-1][0],
        }[f]()
        return base * self.scale

    @property
    def support_radius(self):
        f = self.family
        if f in ("ball", "frac"):
            return self.param("R") * self.scale
        if f == "tab":
            return self.samples[-1][0] * self.scale
        return None

    @property
    def quadrature_radius(self) -> float:
        """Radius beyond which the untruncated profile is numerically zero."""
        if self.support_radius is not None:
            return self.support_radius
        if self.family == "gauss":
            return 12.0 * self.length_scale
        return 80.0 * self.length_scale

    @property
    def breakpoints(self):
        f = self.family
        if f == "ball":
            pts = [self.param("R")]
        elif f == "frac":
            pts = [self.param("R")]
            if self.param("rmin", 0.0) > 0:
                pts.append(self.param("rmin"))
        elif f == "tab":
            pts = [p[0] for p in self.samples if p[0] > 0]
        else:
            pts = []
        return sorted(p * self.scale for p in pts)

    @property
    def singular_at_origin(self) -> bool:
        return self.family == "frac" and self.param("rmin", 0.0) == 0.0

    @property
    def kernel_id(self) -> str:
        if self.family == "tab":
            base = f"tab:file={self.source}" if self.source else "tab"
        else:
            body = ",".join(f"{k}={v:g}" for k, v in self.params)
            base = f"{self.family}:{body}"
        if self.scale != 1.0:
            base += f"@eps={self.scale:g}"
        return base


@dataclass(frozen=True)
class AdmissibilityReport:
    C2: bool
    C2_prime: bool
    C3: bool
    C4: bool
    tail: float
    tail_ok: bool

    @property
    def all(self) -> bool:
        return self.C2 and self.C2_prime and self.C3 and self.C4


@dataclass(frozen=True)
class KernelConstants:
    c_K: float
    c_prime_K: float
    alpha_1d: float

    def as_dict(self):
        return dataclasses.asdict(self)


# -- construction ------------------------------------------------------------

def parse_kernel_id(kernel_id: str):
    family, _, body = kernel_id.strip().partition(":")
    family = family.strip().lower()
    if family not in _PARAM_NAMES:
        raise UnknownKernel(f"unknown kernel family {family!r} in {kernel_id!r}")
    params = {}
    for item in filter(None, (s.strip() for s in body.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise UnknownKernel(f"malformed parameter {item!r} in {kernel_id!r}")
        key = key.strip()
        if key == "r_min":
            key = "rmin"
        params[key] = value.strip()
    return family, params


def make_kernel(kernel_id: str, dimension: int, q: QuadratureConfig | None = None) -> KernelSpec:
    """Resolve a catalog id into a KernelSpec in the given dimension."""
    q = q or QuadratureConfig()
    if dimension < 1:
        raise KernelError("dimension must be >= 1")
    family, raw = parse_kernel_id(kernel_id)
    trunc = raw.pop("trunc", None)
    if family == "tab":
        path = raw.pop("file", None)
        if path is None or raw:
            raise UnknownKernel(f"tab kernels take exactly one file=... parameter: {kernel_id!r}")
        data = np.loadtxt(path, delimiter=",", ndmin=2)
        return tabulated_kernel(data[:, 0], data[:, 1], dimension, q,
                                truncation_radius=None if trunc is None else float(trunc),
                                source=path)
    allowed = _PARAM_NAMES[family]
    unknown = set(raw) - set(allowed)
    if unknown:
        raise UnknownKernel(f"unknown parameters {sorted(unknown)} for {family}")
    try:
        values = {k: float(v) for k, v in raw.items()}
    except ValueError as exc:
        raise UnknownKernel(f"non-numeric parameter in {kernel_id!r}") from exc
    required = [n for n in allowed if n != "rmin"]
    missing = [n for n in required if n not in values]
    if missing:
        raise UnknownKernel(f"missing parameters {missing} for {family}")
    for name, v in values.items():
        if not np.isfinite(v) or (v <= 0 and name != "rmin") or v < 0:
            raise KernelError(f"parameter {name}={v} out of range")
    decreasing = True
    if family == "frac":
        if not 0.0 < values["s"] < 1.0:
            raise KernelError("fractional order s must lie in (0, 1)")
        rmin = values.get("rmin", 0.0)
        if rmin >= values["R"]:
            raise KernelError("rmin must be smaller than R")
        values["rmin"] = rmin
        decreasing = rmin == 0.0
    if family == "ball":
        decreasing = False
    params = tuple((n, values[n]) for n in allowed if n in values)
    k = KernelSpec(family, params, dimension, np.inf, decreasing)
    if trunc is not None:
        R = float(trunc)
    elif k.support_radius is not None:
        R = k.support_radius
    else:
        R = _truncation_radius(k, q)
    return dataclasses.replace(k, truncation_radius=R)


def tabulated_kernel(radii, values, dimension, q=None, truncation_radius=None, source=""):
    q = q or QuadratureConfig()
    radii = np.asarray(radii, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if radii.ndim != 1 or radii.shape != values.shape or radii.size < 2:
        raise KernelError("tabulated kernel needs matching 1-D radii/values")
    if np.any(np.diff(radii) <= 0) or radii[0] < 0:
        raise KernelError("radii must be nonnegative and strictly increasing")
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise NonFiniteKernelValue("tabulated values must be finite and >= 0")
    decreasing = bool(np.all(np.diff(values) < 0))
    samples = tuple(zip(radii.tolist(), values.tolist()))
    k = KernelSpec("tab", (), dimension, radii[-1], decreasing, samples=samples, source=source)
    if truncation_radius is not None:
        k = dataclasses.replace(k, truncation_radius=float(truncation_radius))
    return k


def rescale(k: KernelSpec, eps: float) -> KernelSpec:
    """Mass-preserving rescaling h -> eps^-d K(h / eps)."""
    if not eps > 0:
        raise NonPositiveEpsilon(f"epsilon must be positive, got {eps}")
    return dataclasses.replace(k, scale=k.scale * eps,
                               truncation_radius=k.truncation_radius * eps)


# -- radial quadrature ---------------------------------------------------------

def _radial_breaks(k: KernelSpec, lo=0.0, hi=None, levels=None, grade_breaks=False):
    ell = k.length_scale
    hi = k.quadrature_radius if hi is None else hi
    if levels is None:
        levels = 50 if k.singular_at_origin else 8
    pts = [graded_breaks(0.0, min(ell, hi), levels)]
    if hi > ell:
        pts.append(np.arange(ell, hi, ell * 0.5))
    pts.append([hi])
    pts.append([b for b in k.breakpoints if b < hi])
    if grade_breaks:
        # sqrt(b^2 - t^2) endpoint behaviour below every kink of the profile
        prev = 0.0
        for b in k.breakpoints:
            pts.append(b - (b - prev) * 0.5 ** np.arange(1, 40))
            prev = b
    b = np.unique(np.concatenate([np.asarray(p, dtype=np.float64) for p in pts]))
    b = b[(b >= lo) & (b <= hi)]
    return np.unique(np.concatenate(([lo], b, [hi])))


def _checked_profile(k: KernelSpec, r):
    v = k.profile(r)
    bad = ~np.isfinite(v) & (r > 0)
    if np.any(bad):
        raise NonFiniteKernelValue(f"kernel {k.kernel_id} is not finite at r={r[bad][0]:g}")
    return v


def radial_integral(k: KernelSpec, weight, q: QuadratureConfig, lo=0.0, hi=None, levels=None):
    """int_lo^hi Kbar(r) weight(r) dr on the untruncated profile."""
    breaks = _radial_breaks(k, lo, hi, levels)
    r, w = panel_rule(breaks, q.radial_nodes)
    return tree_sum(w * _checked_profile(k, r) * weight(r))


def radial_moment(k: KernelSpec, weight, q: QuadratureConfig, lo=0.0, hi=None, levels=None):
    """int over lo<|h|<hi of K(h) weight(|h|) dh for a radial weight."""
    d = k.dimension
    return sphere_area(d) * radial_integral(
        k, lambda r: weight(r) * r ** (d - 1), q, lo, hi, levels)


def tail_integral(k: KernelSpec, q: QuadratureConfig, radius=None):
    """int_{|h| > radius} K(h) (1 + |h|) dh (radius defaults to the truncation)."""
    R = k.truncation_radius if radius is None else radius
    if R >= k.quadrature_radius:
        return 0.0
    return radial_moment(k, lambda r: 1.0 + r, q, lo=R)


def _truncation_radius(k: KernelSpec, q: QuadratureConfig) -> float:
    lo, hi = 1e-3 * k.length_scale, k.quadrature_radius
    if tail_integral(k, q, lo) < q.tail_tolerance:
        return lo
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if tail_integral(k, q, mid) < q.tail_tolerance:
            hi = mid
        else:
            lo = mid
    return hi


def kernel_mass(k: KernelSpec, q: QuadratureConfig | None = None):
    """int K(h) dh of the untruncated profile, or inf when K is not L^1."""
    q = q or QuadratureConfig()
    if k.singular_at_origin:
        return float("inf")
    return radial_moment(k, lambda r: np.ones_like(r), q)


def min1_moment(k: KernelSpec, q: QuadratureConfig | None = None):
    """int K(h) min(1, |h|) dh."""
    q = q or QuadratureConfig()
    return radial_moment(k, lambda r: np.minimum(1.0, r), q)


def _converged_moment(k, weight, q):
    coarse = radial_moment(k, weight, q, levels=30 if k.singular_at_origin else 8)
    fine = radial_moment(k, weight, q, levels=60 if k.singular_at_origin else 16)
    ok = np.isfinite(coarse) and np.isfinite(fine) and abs(fine - coarse) <= 1e-3 * abs(fine)
    return bool(ok), fine


def check_admissibility(k: KernelSpec, q: QuadratureConfig | None = None) -> AdmissibilityReport:
    """Evaluate the kernel conditions numerically.

    C2 is the summability of K(h) min(1, |h|); C2' the finiteness of
    int Kbar(r) r^d dr; C3 holds for every radial family; C4 is strict
    decrease of Kbar on (0, truncation_radius], checked at samples.
    """
    q = q or QuadratureConfig()
    c2, _ = _converged_moment(k, lambda r: np.minimum(1.0, r), q)
    c2p, _ = _converged_moment(k, lambda r: r, q)
    R = min(k.truncation_radius, k.quadrature_radius)
    r = np.unique(np.concatenate([
        R * np.geomspace(1e-6, 1.0, 400),
        np.linspace(0.0, R, 2001)[1:],
    ]))
    if k.support_radius is not None:
        r = r[r < k.support_radius]
    v = _checked_profile(k, r)
    c4 = bool(k.strictly_decreasing and np.all(np.diff(v) < 0))
    tail = tail_integral(k, q)
    return AdmissibilityReport(C2=c2, C2_prime=c2p, C3=True, C4=c4,
                               tail=tail, tail_ok=bool(tail < q.tail_tolerance))


# -- constants -----------------------------------------------------------------

def alpha_1d(d: int, q: QuadratureConfig | None = None) -> float:
    """Spherical average of |e_d . z| normalised by d*omega_d."""
    q = q or QuadratureConfig()
    if d == 1:
        return (abs(1.0) + abs(-1.0)) / (1 * unit_ball_volume(1))
    phi, w = panel_rule([0.0, pi / 2, pi], q.radial_nodes)
    num = sphere_area(d - 1) * tree_sum(w * np.abs(np.cos(phi)) * np.sin(phi) ** (d - 2))
    return num / (d * unit_ball_volume(d))


def c_prime(k: KernelSpec, q: QuadratureConfig | None = None) -> float:
    """c'_K = int K(h) |h| dh = d omega_d int Kbar(r) r^d dr."""
    q = q or QuadratureConfig()
    d = k.dimension
    return d * unit_ball_volume(d) * radial_integral(k, lambda r: r**d, q)


def c_direct(k: KernelSpec, q: QuadratureConfig | None = None) -> float:
    """c_K = 1/2 int K(h) |h_d| dh by nested quadrature over (h_d, |h'|)."""
    q = q or QuadratureConfig()
    d = k.dimension
    if d == 1:
        return radial_integral(k, lambda r: r, q)
    rmax = k.quadrature_radius
    ell = k.length_scale
    t_nodes, t_w = panel_rule(_radial_breaks(k, grade_breaks=True), q.radial_nodes)
    inner = np.empty_like(t_nodes)
    bps = np.asarray(k.breakpoints + [rmax])
    for i, t in enumerate(t_nodes):
        rho_max = np.sqrt(max(rmax * rmax - t * t, 0.0))
        if rho_max == 0.0:
            inner[i] = 0.0
            continue
        geo = t * 2.0 ** np.arange(-6, 1)
        grow = t * 2.0 ** np.arange(1, 60)
        grow = grow[grow < ell]
        uni = np.arange(max(ell, t), rho_max, 0.5 * ell)
        kinks = np.sqrt(np.maximum(bps[bps > t] ** 2 - t * t, 0.0))
        breaks = np.concatenate(([0.0], geo, grow, uni, kinks, [rho_max]))
        breaks = breaks[breaks <= rho_max]
        rho, w = panel_rule(breaks, q.radial_nodes)
        vals = _checked_profile(k, np.sqrt(rho * rho + t * t))
        inner[i] = tree_sum(w * vals * rho ** (d - 2))
    # 1/2 int |h_d| K = int_0^inf t A(t) dt by the h_d -> -h_d symmetry
    return sphere_area(d - 1) * tree_sum(t_w * t_nodes * inner)


def compute_constants(k: KernelSpec, q: QuadratureConfig | None = None) -> KernelConstants:
    """c_K, c'_K and alpha_{1,d}, cross-checked through c_K = alpha/2 c'_K."""
    q = q or QuadratureConfig()
    cp = c_prime(k, q)
    if not np.isfinite(cp):
        raise KernelError(f"int Kbar(r) r^d dr is not finite for {k.kernel_id}")
    a = alpha_1d(k.dimension, q)
    c = c_direct(k, q)
    via = 0.5 * a * cp
    if not abs(c - via) <= IDENTITY_RTOL * abs(via):
        raise QuadratureInconsistency(
            f"c_K={c!r} but alpha/2 c'_K={via!r} for {k.kernel_id} in d={k.dimension}")
    return KernelConstants(c_K=c, c_prime_K=cp, alpha_1d=a)
