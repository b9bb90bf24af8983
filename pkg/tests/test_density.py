import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from gtliquid.density import (
    BUILTIN_NAMES,
    DensitySpec,
    MalformedSpec,
    UnknownName,
    builtin,
    poly,
    support_atlas,
    validate,
)


def test_uniform_half_is_valid():
    assert validate(builtin("uniform-half")).valid


def test_unit_indicator_fails_hull_length():
    rep = validate(DensitySpec((poly(0, 1, 1.0),)))
    assert not rep.valid
    assert [v.invariant for v in rep] == ["hull"]


def test_quartic_mass_against_quadrature():
    spec = builtin("quartic")
    assert validate(spec).valid
    m, _ = integrate.quad(lambda t: 15 / 16 * (t * t - 1) ** 2, -1, 1)
    assert spec.mass == pytest.approx(m, abs=1e-14)
    assert m == pytest.approx(1.0, abs=1e-14)


def test_range_violation_is_reported():
    spec = DensitySpec((poly(0, 1, 0.0, 2.0), poly(1, 1.5, 0.0)))
    rep = validate(spec)
    assert "range" in [v.invariant for v in rep]


def test_mass_violation_is_reported():
    rep = validate(DensitySpec((poly(0, 3, 0.5),)))
    assert [v.invariant for v in rep] == ["mass"]


def test_overlapping_pieces_are_malformed():
    with pytest.raises(MalformedSpec):
        DensitySpec((poly(0, 1, 0.5), poly(0.5, 2, 0.5)))


def test_malformed_json():
    with pytest.raises(MalformedSpec):
        DensitySpec.from_json("{bad")
    with pytest.raises(MalformedSpec):
        DensitySpec.from_json('{"pieces": [{"a": 0, "b": 1}]}')


def test_unknown_builtin():
    with pytest.raises(UnknownName):
        builtin("no-such-density")


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_every_builtin_is_valid(name):
    spec = builtin(name)
    assert validate(spec).valid, list(validate(spec))


def test_builtin_shapes():
    q = builtin("quartic")
    assert len(q.pieces) == 1 and (q.pieces[0].a, q.pieces[0].b) == (-1, 1)
    t = np.linspace(-1, 1, 11)
    assert np.allclose(q(t), 15 / 16 * (t * t - 1) ** 2)
    s = builtin("sing1-ramp")
    assert s(-0.5) == pytest.approx(0.5) and s(0.25) == pytest.approx(0.25)
    assert builtin("uniform-half")(1.3) == 0.5


def test_atlas_uniform_half():
    at = support_atlas(builtin("uniform-half"))
    assert at.s_nt == ((0.0, 2.0),)
    assert at.r_mu == ((-math.inf, 0.0), (2.0, math.inf))
    assert at.r_lambda_mu == () and at.r_one == () and at.r_two == () and at.r_zero == ()


def test_atlas_sing1_ramp_has_no_saturated_points():
    at = support_atlas(builtin("sing1-ramp"))
    assert at.s_nt == ((-1.0, 1.0),)
    assert at.r_one == () and at.r_two == ()


def test_atlas_two_interval():
    at = support_atlas(builtin("two-interval"))
    assert at.r_lambda_mu == ((0.0, 0.5), (2.0, 2.5))
    assert set(at.r_one) == {0.5, 2.5}
    assert set(at.r_two) == {0.0, 2.0}
    assert at.s_nt == ()
    # the gap is symmetric about 1.25, where C changes sign
    assert at.r_zero == pytest.approx((1.25,))


@pytest.mark.parametrize("name", ["uniform-half", "quartic", "two-interval", "symmetric-square", "sing1-ramp", "dip-iv"])
def test_atlas_covers_the_line(name):
    at = support_atlas(builtin(name))
    a, b = builtin(name).hull
    grid = np.linspace(a - 1, b + 1, 10_000)
    labels = {at.locate(float(t)) for t in grid}
    assert labels <= {"R_0", "R_1", "R_2", "R_mu", "R_lambda_mu", "S_nt", "boundary"}
    # R_1 and R_2 never share a point
    assert not set(at.r_one) & set(at.r_two)
    for t in grid:
        if at.locate(float(t)) == "S_nt":
            assert at.component(float(t)) is None


def test_raising_zero_tol_never_shrinks_r():
    spec = DensitySpec((poly(0, 0.5, 1.0), poly(0.5, 1.5, 1e-8), poly(1.5, 2.0, 1.0 - 1e-8)))

    def measure(at):
        return sum(min(hi, 5) - max(lo, -5) for lo, hi in at.r_mu + at.r_lambda_mu)

    assert measure(support_atlas(spec, 1e-6)) >= measure(support_atlas(spec, 1e-12))


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.floats(0.1, 2.0),
            st.lists(st.floats(-1, 1, allow_nan=False), min_size=1, max_size=4),
        ),
        min_size=1,
        max_size=4,
    )
)
def test_polynomial_roundtrip_is_byte_identical(pieces):
    t = -1.0
    ps = []
    for width, coeffs in pieces:
        ps.append(poly(t, t + width, *coeffs))
        t += width + 0.25
    spec = DensitySpec(tuple(ps))
    text = spec.to_json()
    assert DensitySpec.from_json(text).to_json() == text
