import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gtliquid.density import DensitySpec, builtin, poly
from gtliquid.liquid import (
    NotInLiquidRegion,
    PathDegenerate,
    beta_kernel,
    burgers_residual,
    forward_map,
    infinity_point,
    inverse_map,
    inverse_map_arrays,
    root_count,
    _search_box,
)
from gtliquid.transforms import HalfPlanePoint, cauchy, poisson

UNIFORM = builtin("uniform-half")
QUARTIC = builtin("quartic")
POLY_SPECS = ["uniform-half", "quartic", "sing1-ramp", "two-interval", "symmetric-square", "dip-iv"]


def chart_by_hand(w):
    # closed-form C for the half-density on [0, 2], then the chart formulas
    C = 0.5 * (cmath.log(w) - cmath.log(w - 2))
    P, H = -C.imag / math.pi, C.real / math.pi
    s, c = math.sin(math.pi * P), math.cos(math.pi * P)
    chi = w.real + w.imag * (math.exp(-math.pi * H) - c) / s
    eta = 1 - w.imag * (math.exp(math.pi * H) + math.exp(-math.pi * H) - 2 * c) / s
    return chi, eta, P


def test_inverse_map_uniform_examples():
    s = inverse_map(UNIFORM, HalfPlanePoint(1, 1))
    assert (s.chi, s.eta) == pytest.approx((math.sqrt(2), 3 - 2 * math.sqrt(2)), abs=1e-13)
    assert (s.chi, s.eta) == pytest.approx((1.4142, 0.1716), abs=1e-4)
    s = inverse_map(UNIFORM, HalfPlanePoint(0, 1))
    chi, eta, P = chart_by_hand(1j)
    assert (s.chi, s.eta, s.rho) == pytest.approx((chi, eta, P), abs=1e-13)
    assert (s.chi, s.eta, s.rho) == pytest.approx((1.2263, 0.1198, 0.1762), abs=1e-4)
    assert s.omega.imag > 0 and s.fprime_residual < 1e-12


def test_inverse_map_regular_limit():
    s = inverse_map(UNIFORM, HalfPlanePoint(1, 1e-7))
    assert (s.chi, s.eta) == pytest.approx((1, 1), abs=1e-6)


@pytest.mark.parametrize("name", POLY_SPECS)
def test_chart_identities_on_grid(name):
    spec = builtin(name)
    a, b = spec.hull
    span = b - a
    U, V = np.meshgrid(np.linspace(a - span, b + span, 40), span * np.geomspace(1e-3, 1e2, 40))
    d = inverse_map_arrays(spec, U.ravel(), V.ravel())
    w = U.ravel() + 1j * V.ravel()
    assert np.max(d["residual"]) < 1e-8
    chi, eta, om = d["chi"], d["eta"], d["omega"]
    slope = (w - chi) / (w - chi - eta + 1)
    assert np.max(np.abs(slope - om)) < 1e-8
    assert np.all(om.imag > 0)
    assert np.allclose(np.angle(om) / math.pi, d["rho"], atol=1e-12, rtol=0)
    P = np.asarray(poisson(spec, U.ravel(), V.ravel()))
    assert np.allclose(d["rho"], P, atol=1e-12, rtol=0)
    # images land in the polytope and are pairwise distinct
    tol = 1e-9 * span
    assert np.all((eta > -tol) & (eta < 1 + tol))
    assert np.all((chi + eta - 1 >= a - tol) & (chi + eta - 1 <= chi + tol) & (chi <= b + tol))
    pts = np.round(np.stack([chi, eta], 1), 12)
    assert len(np.unique(pts, axis=0)) == len(pts)


def test_forward_map_uniform_example():
    w = forward_map(UNIFORM, *chart_by_hand(1j)[:2])
    assert w.w == pytest.approx(1j, abs=1e-9)


def test_forward_map_outside_liquid_region():
    # right of the straight segment from (0.7146, 0.2893) up to (1, 1)
    for chi, eta in [(0.99, 0.3), (0.95, 0.05)]:
        with pytest.raises(NotInLiquidRegion):
            forward_map(QUARTIC, chi, eta)
        assert root_count(QUARTIC, chi, eta, _search_box(QUARTIC)) == 0


def test_quartic_near_top_corner_is_liquid():
    # f(0.9) is strictly between 0 and 1, so the liquid region reaches eta = 1 there
    w = forward_map(QUARTIC, 0.9, 0.9)
    assert w.v > 0
    s = inverse_map(QUARTIC, w)
    assert (s.chi, s.eta) == pytest.approx((0.9, 0.9), abs=1e-9)
    assert root_count(QUARTIC, 0.9, 0.9, _search_box(QUARTIC)) == 1


def test_root_count_is_one_inside():
    s = inverse_map(QUARTIC, HalfPlanePoint(0.3, 0.5))
    assert root_count(QUARTIC, s.chi, s.eta, _search_box(QUARTIC)) == 1


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(POLY_SPECS), st.floats(-1.5, 1.5), st.floats(-2.5, 0.5))
def test_round_trip_from_random_w(name, x, logv):
    spec = builtin(name)
    a, b = spec.hull
    u = (a + b) / 2 + x * (b - a) / 2
    v = 10.0**logv * (b - a)
    s = inverse_map(spec, HalfPlanePoint(u, v))
    w = forward_map(spec, s.chi, s.eta)
    assert abs(w.w - complex(u, v)) < 1e-6 * max(1.0, abs(complex(u, v)))
    back = inverse_map(spec, w)
    assert (back.chi, back.eta) == pytest.approx((s.chi, s.eta), abs=1e-6)


@pytest.mark.parametrize("spec,w", [(UNIFORM, 1 + 1j), (QUARTIC, 0.3 + 0.5j)])
def test_burgers_residual_is_small_and_second_order(spec, w):
    p = HalfPlanePoint(w.real, w.imag)
    r1 = burgers_residual(spec, p, 1e-3)
    r2 = burgers_residual(spec, p, 5e-4)
    assert r1 < 1e-4
    assert math.log2(r1 / r2) == pytest.approx(2, abs=0.25)


def test_beta_kernel_examples():
    assert beta_kernel(1j, 0, 0) == pytest.approx(0.5, abs=1e-15)
    assert beta_kernel(cmath.exp(1j * math.pi / 3), 0, 0) == pytest.approx(1 / 3, abs=1e-15)
    # antiderivative of (1 - z)/z is log z - z, log taken through the positive axis
    closed = (cmath.log(1j) - cmath.log(-1j) - 2j) / (2j * math.pi)
    assert closed == pytest.approx(0.5 - 1 / math.pi, abs=1e-15)
    assert beta_kernel(1j, 1, 0) == pytest.approx(closed, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(0.1, 2), st.integers(-3, 3), st.integers(-3, 3))
def test_beta_kernel_against_antiderivative(x, y, m, l):
    om = complex(x, y)
    # integrate (1 - z)^m z^(-l-1) term by term when m >= 0
    if m < 0:
        return
    total = 0j
    for k in range(m + 1):
        c = math.comb(m, k) * (-1) ** k
        p = k - l - 1
        if p == -1:
            # log z, path through (0, 1) keeps to the principal branch
            total += c * (cmath.log(om) - cmath.log(om.conjugate()))
        else:
            total += c * (om ** (p + 1) - om.conjugate() ** (p + 1)) / (p + 1)
    assert beta_kernel(om, m, l) == pytest.approx(total / (2j * math.pi), abs=1e-10)


def test_beta_kernel_negative_m_crosses_negative_axis():
    # (1 - z)^-1 z^-1 = 1/z + 1/(1 - z); crossing (-inf, 0) the 1/z term winds
    # through the negative axis while log(1 - z) stays principal
    om = 0.3 + 0.8j
    lz = cmath.log(om) - cmath.log(om.conjugate()) - 2j * math.pi
    l1 = -(cmath.log(1 - om) - cmath.log(1 - om.conjugate()))
    assert beta_kernel(om, -1, 0) == pytest.approx((lz + l1) / (2j * math.pi), abs=1e-10)


def test_beta_kernel_degenerate():
    with pytest.raises(PathDegenerate):
        beta_kernel(0.5 + 0j, 1, 1)


def test_infinity_points():
    assert infinity_point(QUARTIC) == pytest.approx((0.5, 0))
    assert infinity_point(UNIFORM) == pytest.approx((1.5, 0))
    c = 0.75
    shifted = DensitySpec((poly(c, 2 + c, 0.5),))
    assert infinity_point(shifted) == pytest.approx((infinity_point(UNIFORM)[0] + c, 0))
    s = inverse_map(QUARTIC, HalfPlanePoint(0.1, 1e4))
    assert (s.chi, s.eta) == pytest.approx(infinity_point(QUARTIC), abs=1e-3)


@pytest.mark.parametrize("w", [-0.3 + 0.3j, -0.6 + 0.25j, 0.3 + 0.5j])
def test_burgers_holds_with_exact_slope_derivative(w):
    # Omega' = -C' Omega is exact; only the chart Jacobian is differenced, at a
    # tiny step, so what is left is far below the central-difference residual
    def img(z):
        s = inverse_map(QUARTIC, HalfPlanePoint(z.real, z.imag))
        return np.array([s.chi, s.eta])

    e = 1e-6
    J = np.column_stack([(img(w + e) - img(w - e)) / (2 * e), (img(w + 1j * e) - img(w - 1j * e)) / (2 * e)])
    Ji = np.linalg.inv(J)
    dw_dchi, dw_deta = Ji[0, 0] + 1j * Ji[1, 0], Ji[0, 1] + 1j * Ji[1, 1]
    om = np.exp(-cauchy(QUARTIC, w))
    dom = -cauchy(QUARTIC, w, 1) * om
    assert abs(om * dom * dw_dchi + (1 - om) * dom * dw_deta) < 1e-7
