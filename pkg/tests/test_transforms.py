import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from gtliquid.density import DensitySpec, builtin, poly, table
from gtliquid.transforms import (
    HalfPlanePoint,
    cauchy,
    conjugate,
    dini_check,
    hilbert,
    hilbert_prime,
    inverse_square,
    mean_profile,
    poisson,
)

UNIFORM = builtin("uniform-half")
QUARTIC = builtin("quartic")


def quartic_f(t):
    return 15 / 16 * (t * t - 1) ** 2


def cauchy_quad(f, a, b, w):
    re = integrate.quad(lambda t: (f(t) / (w - t)).real, a, b, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    im = integrate.quad(lambda t: (f(t) / (w - t)).imag, a, b, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    return complex(re, im)


def uniform_closed(w):
    return 0.5 * (cmath.log(w) - cmath.log(w - 2))


def test_cauchy_uniform_examples():
    assert cauchy(UNIFORM, 1 + 1j) == pytest.approx(-1j * math.pi / 4, abs=1e-14)
    c = cauchy(UNIFORM, 1j)
    assert c == pytest.approx(uniform_closed(1j), abs=1e-14)
    assert c.real == pytest.approx(-0.4024, abs=1e-4) and c.imag == pytest.approx(-0.5536, abs=1e-4)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(0.05, 3))
def test_cauchy_quartic_against_quadrature(u, v):
    w = complex(u, v)
    assert cauchy(QUARTIC, w) == pytest.approx(cauchy_quad(quartic_f, -1, 1, w), abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(1e-3, 3))
def test_cauchy_conjugate_symmetry(u, v):
    for spec in (UNIFORM, QUARTIC, builtin("sing1-ramp")):
        assert cauchy(spec, complex(u, -v)) == pytest.approx(cauchy(spec, complex(u, v)).conjugate(), abs=1e-13)


@pytest.mark.parametrize("name", ["uniform-half", "quartic", "two-interval", "half-root-sine"])
def test_cauchy_at_infinity(name):
    w = 1e6 * cmath.exp(0.7j)
    assert abs(cauchy(builtin(name), w) * w - 1) < 1e-5


def test_poisson_examples():
    assert poisson(UNIFORM, HalfPlanePoint(1, 1)) == pytest.approx(0.25, abs=1e-14)
    assert poisson(UNIFORM, HalfPlanePoint(1, 1e-6)) == pytest.approx(0.5, abs=1e-6)
    assert poisson(QUARTIC, HalfPlanePoint(0, 1e-6)) == pytest.approx(15 / 16, abs=1e-5)


def test_conjugate_examples():
    for v in (1e-3, 0.5, 1, 7):
        assert conjugate(UNIFORM, HalfPlanePoint(1, v)) == pytest.approx(0, abs=1e-14)
    assert conjugate(UNIFORM, HalfPlanePoint(0, 1)) == pytest.approx(uniform_closed(1j).real / math.pi, abs=1e-14)
    assert conjugate(UNIFORM, HalfPlanePoint(0, 1)) == pytest.approx(-0.1281, abs=1e-4)


def test_poisson_is_harmonic():
    u, v, h = 0.4, 0.3, 1e-3
    P = lambda a, b: poisson(QUARTIC, HalfPlanePoint(a, b))
    lap = (P(u + h, v) + P(u - h, v) + P(u, v + h) + P(u, v - h) - 4 * P(u, v)) / h**2
    assert abs(lap) < 1e-4 / v**2


def test_hilbert_odd_ramp():
    # a sign-changing test function is fine for the transform itself
    phi = DensitySpec((poly(-1, 1, 0.0, 1.0),))
    assert float(hilbert(phi, 0.0)) == pytest.approx(-2 / math.pi, abs=1e-14)


def test_hilbert_quartic_edge_against_quadrature():
    # f vanishes to second order at 1, so the integrand is regular
    oracle = integrate.quad(lambda t: quartic_f(t) / (1 - t), -1, 1, epsabs=1e-14)[0] / math.pi
    assert float(hilbert(QUARTIC, 1.0)) == pytest.approx(oracle, abs=1e-12)
    assert math.pi * float(hilbert(QUARTIC, 1.0)) == pytest.approx(1.25, abs=1e-12)
    assert float(hilbert(QUARTIC, -1.0)) == pytest.approx(-oracle, abs=1e-12)


def test_hilbert_symmetry_and_jump():
    assert float(hilbert(UNIFORM, 1.0)) == pytest.approx(0.0, abs=1e-14)
    # a jump up at 0 makes the p.v. diverge to minus infinity
    assert hilbert(UNIFORM, 0.0).tag == "-inf"
    assert hilbert(UNIFORM, 2.0).tag == "+inf"


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.95, 0.95))
def test_hilbert_quartic_interior_against_quadrature(x):
    pv = integrate.quad(quartic_f, -1, 1, weight="cauchy", wvar=x, epsabs=1e-13)[0]
    # quad's cauchy weight is 1/(t - x)
    assert float(hilbert(QUARTIC, x)) == pytest.approx(-pv / math.pi, abs=1e-10)


def test_hilbert_prime_examples():
    oracle = integrate.quad(lambda t: quartic_f(t) / (1 - t) ** 2, -1, 1, epsabs=1e-14)[0]
    assert oracle == pytest.approx(2.5, abs=1e-12)
    assert float(hilbert_prime(QUARTIC, 1.0)) == pytest.approx(-oracle / math.pi, abs=1e-12)
    assert hilbert_prime(UNIFORM, 1.0).tag == "-inf"
    two = builtin("two-interval")
    f = lambda t: 1.0
    oracle = sum(integrate.quad(lambda t: f(t) / (1.25 - t) ** 2, a, b)[0] for a, b in ((0, 0.5), (2, 2.5)))
    assert inverse_square(two, 1.25) == pytest.approx(oracle, rel=1e-12)
    assert float(hilbert_prime(two, 1.25)) == pytest.approx(-oracle / math.pi, rel=1e-12)


def test_mean_profile_uniform():
    p = mean_profile(UNIFORM, 1.0)
    assert (p.fr_plus, p.fr_minus, p.fl_plus, p.fl_minus) == pytest.approx((0.5,) * 4, abs=1e-8)
    assert p.c_x == pytest.approx(0, abs=1e-8)
    assert p.b_x == pytest.approx(0.25, abs=1e-8)


def test_mean_profile_sing1_ramp():
    p = mean_profile(builtin("sing1-ramp"), 0.0)
    assert p.fl_plus == pytest.approx(1, abs=1e-6) and p.fl_minus == pytest.approx(1, abs=1e-6)
    assert p.fr_plus == pytest.approx(0, abs=1e-6) and p.fr_minus == pytest.approx(0, abs=1e-6)
    assert p.c_x == pytest.approx(1, abs=1e-6)


def test_mean_profile_half_root_sine():
    p = mean_profile(builtin("half-root-sine"), 0.0)
    assert p.fr_minus >= math.sqrt(math.pi) / 6
    assert p.fr_plus <= 0.5


def test_mean_profile_bounds():
    p = mean_profile(QUARTIC, 0.3)
    for h, r, l, d in zip(p.h_grid, p.mr, p.ml, p.dm):
        assert 0 <= r <= 1 and 0 <= l <= 1
        assert abs(d) < 1 and abs(d) <= 1 / h + 1e-15
    with pytest.raises(ValueError):
        mean_profile(QUARTIC, 0.3, h_min=1.0, h_max=0.1)


def test_dini_examples():
    assert dini_check(QUARTIC, 0.0) == "Satisfied"
    assert dini_check(builtin("log-cusp"), 0.0) == "Violated"
    rng = np.random.default_rng(0)
    ts = np.linspace(-1, 1, 4001)
    noisy = DensitySpec((table(zip(ts, 0.5 + 0.3 * rng.random(ts.size))),))
    # shells stop before reaching the table spacing
    assert dini_check(noisy, 0.0132, budget=8) == "Indeterminate"
    # a piecewise-linear table is Lipschitz once resolved
    assert dini_check(noisy, 0.0132, budget=40) == "Satisfied"


@settings(max_examples=50, deadline=None)
@given(st.floats(-4, 4), st.floats(1e-4, 10))
def test_poisson_strictly_between_zero_and_one(u, v):
    for spec in (UNIFORM, QUARTIC, builtin("two-interval")):
        p = poisson(spec, HalfPlanePoint(u, v))
        assert 0 < p < 1
