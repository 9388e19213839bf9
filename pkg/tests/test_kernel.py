import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from kperimeter.kernel import (
    KernelError,
    NonPositiveEpsilon,
    UnknownKernel,
    alpha_1d,
    check_admissibility,
    compute_constants,
    kernel_mass,
    make_kernel,
    min1_moment,
    rescale,
    tabulated_kernel,
    tail_integral,
)
from kperimeter.quadrature import QuadratureConfig

CATALOG = ["gauss:sigma=1", "exp:lambda=1", "ball:R=1", "frac:s=0.5,R=4",
           "frac:s=0.3,R=2,rmin=0.1", "gauss:sigma=0.5", "exp:lambda=2"]


# -- parsing -------------------------------------------------------------------------

@pytest.mark.parametrize("bad", ["foo", "gauss", "gauss:sigma", "exp:lambda=x", "ball:R=1,Q=2",
                                 "frac:s=1.5,R=1", "frac:s=0.5,R=1,rmin=2", "gauss:sigma=-1"])
def test_bad_ids_are_rejected(bad):
    with pytest.raises(KernelError):
        make_kernel(bad, 2)


def test_unknown_family_error_type():
    with pytest.raises(UnknownKernel):
        make_kernel("nope:a=1", 2)


def test_kernel_id_round_trip():
    k = make_kernel("frac:s=0.5,R=4", 2)
    assert make_kernel(k.kernel_id, 2) == k
    assert rescale(k, 0.5).kernel_id.endswith("@eps=0.5")


def test_explicit_truncation_override():
    assert make_kernel("exp:lambda=1,trunc=3", 2).truncation_radius == 3.0


# -- truncation ----------------------------------------------------------------------

@pytest.mark.parametrize("kid", ["gauss:sigma=1", "exp:lambda=1"])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_truncation_tail_below_tolerance(kid, d):
    q = QuadratureConfig()
    k = make_kernel(kid, d, q)
    assert tail_integral(k, q) < q.tail_tolerance
    # the tail is not far below the tolerance either: the radius is the smallest admissible
    assert tail_integral(k, q, 0.95 * k.truncation_radius) >= q.tail_tolerance


def test_truncation_zeroes_kernel():
    k = make_kernel("gauss:sigma=1", 2)
    R = k.truncation_radius
    assert k(np.array(R * 1.0001)) == 0.0
    assert k(np.array(R * 0.999)) > 0.0


# -- admissibility -------------------------------------------------------------------

@pytest.mark.parametrize("kid, c4", [("gauss:sigma=1", True), ("exp:lambda=1", True),
                                     ("ball:R=1", False), ("frac:s=0.5,R=4", True),
                                     ("frac:s=0.5,R=4,rmin=0.5", False)])
def test_admissibility(kid, c4):
    rep = check_admissibility(make_kernel(kid, 2))
    assert rep.C2 and rep.C2_prime and rep.C3
    assert rep.C4 is c4


def test_tabulated_increasing_kernel_fails_c4():
    k = tabulated_kernel([0.0, 0.5, 1.0], [1.0, 2.0, 0.0], 2)
    assert not check_admissibility(k).C4


def test_fractional_c2_prime_matches_adaptive_oracle():
    k = make_kernel("frac:s=0.5,R=4", 2)
    from kperimeter.kernel import radial_integral
    ours = radial_integral(k, lambda r: r**2, QuadratureConfig())
    oracle, _ = integrate.quad(lambda r: r**-2.5 * r**2, 0, 4)
    assert ours == pytest.approx(oracle, rel=1e-8)
    assert oracle == pytest.approx(4.0)


# -- constants -----------------------------------------------------------------------

@pytest.mark.parametrize("kid, expected", [
    ("gauss:sigma=1", math.sqrt(math.pi) / 2),   # 1/2 * sqrt(pi) * int |y| e^{-y^2}
    ("exp:lambda=1", 4.0),                        # 1/2 * 4 * int r^2 e^{-r}
    ("ball:R=1", 2.0 / 3.0),                      # 1/2 * (1/3) * 4
])
def test_c_K_closed_forms(kid, expected):
    assert compute_constants(make_kernel(kid, 2)).c_K == pytest.approx(expected, abs=1e-6)


def test_exp_c_prime_is_four_pi():
    assert compute_constants(make_kernel("exp:lambda=1", 2)).c_prime_K == pytest.approx(4 * math.pi, rel=1e-9)


def test_c_K_against_cartesian_quadrature():
    # independent route: 2-D cartesian quadrature of 1/2 int K(h)|h_2| dh
    k = make_kernel("gauss:sigma=0.7", 2)
    f = lambda y, x: np.exp(-(x * x + y * y) / 0.49) * abs(y)
    val, _ = integrate.dblquad(f, -10, 10, -10, 10, epsabs=1e-12)
    assert compute_constants(k).c_K == pytest.approx(0.5 * val, rel=1e-7)


@pytest.mark.parametrize("d, expected", [(1, 1.0), (2, 2 / math.pi), (3, 0.5)])
def test_alpha_closed_forms(d, expected):
    assert alpha_1d(d) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_alpha_matches_surface_formula(d):
    from kperimeter.quadrature import unit_ball_volume
    assert alpha_1d(d) == pytest.approx(2 * unit_ball_volume(d - 1) / (d * unit_ball_volume(d)), rel=1e-12)


@pytest.mark.parametrize("kid", CATALOG)
@pytest.mark.parametrize("d", [1, 2, 3])
def test_constant_identity(kid, d):
    c = compute_constants(make_kernel(kid, d))
    assert c.c_K == pytest.approx(0.5 * c.alpha_1d * c.c_prime_K, rel=1e-6)
    assert c.c_K > 0 and c.c_prime_K > 0 and c.alpha_1d > 0


# -- rescaling -----------------------------------------------------------------------

def test_rescale_identity_at_one():
    k = make_kernel("gauss:sigma=1", 2)
    r = np.linspace(0, 3, 50)
    assert np.array_equal(rescale(k, 1.0)(r), k(r))


def test_rescale_ball_values():
    k = rescale(make_kernel("ball:R=1", 2), 0.5)
    assert k(np.array(0.49)) == 4.0
    assert k(np.array(0.51)) == 0.0
    assert k.truncation_radius == 0.5


def test_rescale_rejects_nonpositive():
    with pytest.raises(NonPositiveEpsilon):
        rescale(make_kernel("exp:lambda=1", 2), 0.0)


@given(st.integers(0, 6))
def test_mass_invariance(k_pow):
    k = make_kernel("exp:lambda=1", 2)
    eps = 2.0**-k_pow
    m0 = kernel_mass(k)
    assert abs(kernel_mass(rescale(k, eps)) - m0) / m0 < 1e-6


def test_mass_oracle_exp():
    # int e^{-|h|} dh = 2 pi in the plane
    assert kernel_mass(make_kernel("exp:lambda=1", 2)) == pytest.approx(2 * math.pi, rel=1e-8)


@pytest.mark.parametrize("kid", ["gauss:sigma=1", "exp:lambda=1", "ball:R=1", "frac:s=0.5,R=4"])
@pytest.mark.parametrize("eps", [0.5, 0.125])
def test_c_prime_homogeneity(kid, eps):
    k = make_kernel(kid, 2)
    c0 = compute_constants(k)
    c1 = compute_constants(rescale(k, eps))
    assert c1.c_prime_K == pytest.approx(eps * c0.c_prime_K, rel=1e-8)
    assert c1.c_K == pytest.approx(eps * c0.c_K, rel=1e-8)


def test_min1_moment_oracle():
    # int e^{-r} min(1, r) 2 pi r dr
    val, _ = integrate.quad(lambda r: np.exp(-r) * min(1.0, r) * 2 * math.pi * r, 0, 60, points=[1.0])
    assert min1_moment(make_kernel("exp:lambda=1", 2)) == pytest.approx(val, rel=1e-8)
