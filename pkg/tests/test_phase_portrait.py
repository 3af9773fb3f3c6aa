import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polyball import phase_portrait as pp
from polyball.constitutive import Material
from polyball.static_ball import CenterData, integrate_static


@st.composite
def materials(draw):
    nu = draw(st.floats(-0.5, 0.5))
    g = draw(st.floats(0.1, 1.95))
    frac = draw(st.floats(-0.3, 1.0))
    b = frac * 3.0 * g * (1 - nu) / (1 + nu)
    if abs(b) < 1e-2:
        b = 0.5
    return Material(nu, g, b, strict=False)


def test_y_P_values():
    assert pp.y_P(1.0) == pytest.approx(1.0 / 3.0)
    assert pp.y_P(4.0 / 3.0) == 0.0
    with pytest.raises(pp.UnsupportedParameters):
        pp.y_P(2.0)


@given(materials())
def test_upsilon_at_one_and_zero(m):
    assert pp.upsilon(m, 1.0) == pytest.approx(0.0, abs=1e-14)
    if m.beta < 1.0:
        assert pp.upsilon(m, 0.0) == pytest.approx(3 * (1 - m.gamma) / (1 - m.beta), rel=1e-12)


@given(materials(), st.floats(0.05, 0.95))
def test_upsilon_prime_fd(m, y):
    h = 1e-6
    fd = (pp.upsilon(m, y + h) - pp.upsilon(m, y - h)) / (2 * h)
    assert pp.upsilon_prime(m, y) == pytest.approx(fd, rel=1e-6, abs=1e-6)


@given(materials(), st.floats(0.05, 0.95), st.floats(0.01, 5.0))
def test_jacobian_matches_fd(m, y, v):
    np.testing.assert_allclose(pp.jacobian(m, y, v), pp.jacobian_fd(m, y, v), rtol=1e-6,
                               atol=1e-6)


@given(materials())
def test_jacobian_at_O(m):
    J = pp.jacobian(m, 1.0, 0.0)
    np.testing.assert_array_equal(J, [[-3.0, -1.0], [0.0, 2.0]])
    vec = pp.unstable_direction_O(m)
    np.testing.assert_allclose(vec, np.array([-1.0, 5.0]) / math.sqrt(26.0), rtol=1e-15)


@given(materials())
def test_fixed_points(m):
    fps = pp.fixed_points(m)
    names = [f.name for f in fps]
    assert names[0] == "O"
    assert ("Q" in names) == (m.beta < 1.0)
    for f in fps:
        assert f.residual <= 1e-12
        assert np.all(np.isfinite(f.jacobian_fd))
    O = fps[0]
    assert O.classification == "saddle"
    assert max(O.eigenvalues.real) == 2.0


def test_fixed_point_P_and_Q():
    m = Material(0.25, 1.0, 0.5)
    fps = {f.name: f for f in pp.fixed_points(m)}
    P = fps["P"]
    assert P.y == pytest.approx(1.0 / 3.0)
    assert P.classification in ("stable focus", "stable node")
    assert np.all(P.eigenvalues.real < 0)
    # gamma = 1 makes Q non-hyperbolic with eigenvalues 0 and -1
    np.testing.assert_allclose(sorted(fps["Q"].eigenvalues.real), [-1.0, 0.0], atol=1e-12)
    assert fps["Q"].classification == "non-hyperbolic"
    Q = {f.name: f for f in pp.fixed_points(Material(0.25, 0.8, 0.5))}["Q"]
    assert Q.classification == "saddle"
    np.testing.assert_allclose(Q.jacobian, Q.jacobian_fd, rtol=1e-6, atol=1e-6)
    d = Q.to_dict()
    assert d["name"] == "Q" and len(d["eigenvalues"]) == 2


def test_gamma_two_unsupported():
    with pytest.raises(pp.UnsupportedParameters):
        pp.fixed_points(Material(0.25, 2.0, 1.0))


def test_seed_on_unstable_manifold():
    m = Material(0.1, 1.3, 0.9)
    a, b = pp.seed_coefficients(m)
    # the second-order seed has an O(e**3) field residual off the manifold
    for e in (1e-3, 1e-4):
        v = e + a * e * e
        y = 1.0 - (e / 5.0 + b * e * e)
        dy, dv = pp.vector_field(m, pp.PhaseState(y, v))
        # along the manifold, d/dxi = 2 e d/de
        assert dv == pytest.approx(2 * e * (1 + 2 * a * e), rel=20 * e * e)
        assert -dy == pytest.approx(2 * e * (0.2 + 2 * b * e), rel=20 * e * e)


def test_orbit_stays_in_strip():
    for m in (Material(0.25, 1.0, 0.5), Material(0.0, 1.5, 2.0), Material(0.3, 0.5, -1.0)):
        orb = pp.track_gamma(m, 1.0, 20.0)
        assert orb.invariance_violations == 0
        assert np.all(orb.y[:-1] > 0) and np.all(orb.v > 0)


def test_orbit_reaches_P():
    m = Material(0.25, 1.0, 0.5)
    orb = pp.track_gamma(m, 1.0, 40.0)
    assert orb.status == "horizon"
    assert abs(orb.y[-1] - 1.0 / 3.0) < 1e-9
    lim = orb.omega_limit()
    assert lim["distance_to_P"] < 1e-8


def test_orbit_C_shift():
    # C enters only through a shift of xi by log(C)/2
    m = Material(0.2, 1.4, 1.1)
    o1 = pp.track_gamma(m, 1.0, 5.0)
    o2 = pp.track_gamma(m, 4.0, 5.0)
    xi = np.linspace(-3.0, 1.0, 7)
    y1, v1 = o1.dense(xi)
    y2, v2 = o2.dense(xi - math.log(2.0))
    np.testing.assert_allclose(y1, y2, rtol=1e-9)
    np.testing.assert_allclose(v1, v2, rtol=1e-9)


def test_type_A_orbit_exits():
    m = Material(0.25, 2.5, 2.0)
    orb = pp.track_gamma(m, 1.0, 10.0)
    assert orb.status == "exited" and orb.exit_location is not None


def test_static_profile_lies_on_orbit():
    for m in (Material(0.25, 1.5, 1.2), Material(0.25, 0.8, -0.5)):
        prof = integrate_static(CenterData(2.0, 1.0), m)
        C = 2.0 ** (2.0 - m.gamma)
        orb = pp.track_gamma(m, C, math.log(prof.r[-1]) + 0.1)
        xi, y, v = pp.static_to_phase(prof)
        d = pp.distance_to_orbit(orb, xi, y, v)
        assert np.max(d) <= 1e-9


def test_gamma_two_tracking():
    m = Material(0.5, 2.0, 2.0)
    orb = pp.track_gamma(m, 1.0, 1.0)
    prof = integrate_static(CenterData(), m)
    xi, y, v = pp.static_to_phase(prof)
    sel = xi < 0.5
    d = pp.distance_to_orbit(orb, xi[sel], y[sel], v[sel])
    assert np.max(d) <= 1e-8


@given(materials(), st.floats(0.05, 0.95), st.floats(0.05, 5.0))
def test_dulac_closed_form(m, y, v):
    fd = pp.dulac_divergence_fd(m, y, v)
    ex = pp.dulac_divergence(m, y, v)
    assert fd == pytest.approx(ex, rel=1e-5, abs=1e-5 * max(1.0, abs(ex)))


def test_track_gamma_validation():
    m = Material(0.25, 1.0, 0.5)
    with pytest.raises(ValueError):
        pp.track_gamma(m, -1.0, 5.0)
    with pytest.raises(ValueError):
        pp.track_gamma(m, 1.0, -50.0)
