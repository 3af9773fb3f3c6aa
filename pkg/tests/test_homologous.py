import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polyball import homologous as H
from polyball.constitutive import Material
from polyball.static_ball import CenterData, StaticOptions, integrate_static

MAT = Material(0.25, 4.0 / 3.0, H.zero_shear_beta(0.25))


def params(alpha, nu=0.25, beta=None, delta0_c=1.0, theta=1.0):
    b = H.zero_shear_beta(nu) if beta is None else beta
    return H.HomologousParams(alpha, Material(nu, 4.0 / 3.0, b), delta0_c, theta)


def test_params_validation():
    with pytest.raises(ValueError):
        H.HomologousParams(0.0, MAT)
    with pytest.raises(ValueError):
        H.HomologousParams(1.0, Material(0.25, 1.5, 1.0))
    with pytest.raises(ValueError):
        H.HomologousParams(1.0, MAT, delta0_c=-1.0)
    p = params(-0.5)
    assert p.c_omega == pytest.approx(3.0 * 0.75 / 1.25)
    assert p.to_dict()["alpha"] == -0.5


def test_zero_shear_beta():
    assert H.zero_shear_beta(0.25) == pytest.approx(2.4)
    assert Material(0.25, 4.0 / 3.0, 2.4).zero_shear


@given(st.floats(-5.0, -1e-3), st.floats(-0.8, 0.45))
def test_collapse_time_closed_form(alpha, nu):
    p = params(alpha, nu)
    ref = math.pi / (2.0 * math.sqrt(2.0 * p.c_omega * abs(alpha)))
    assert H.collapse_time_quadrature(p.c_omega, alpha) == pytest.approx(ref, rel=1e-13)


def test_collapse_time_from_ode():
    for alpha in (-0.01, -0.3, -4.0):
        p = params(alpha)
        tr = H.solve_omega(p, 1e4)
        ref = H.collapse_time_quadrature(p.c_omega, alpha)
        assert tr.collapse_time == pytest.approx(ref, rel=1e-10)
        assert tr.energy_drift() <= 1e-10
        assert np.all(np.diff(tr.omega) < 0)


def test_expansion_and_energy():
    p = params(0.7)
    tr = H.solve_omega(p, 50.0)
    assert tr.collapse_time is None
    assert np.all(np.diff(tr.omega) > 0)
    assert tr.energy_drift() <= 1e-10
    w, wd = tr(np.array([10.0, 50.0]))
    # omega'**2 -> 2 c alpha at large omega
    assert wd[1] ** 2 == pytest.approx(2 * p.c_omega * 0.7 * (1 - 1 / w[1]), rel=1e-9)


def test_no_collapse_before_t_end_warns():
    with pytest.warns(RuntimeWarning):
        tr = H.solve_omega(params(-0.01), 1.0)
    assert tr.collapse_time is None and tr.warnings


def test_collapse_quadrature_rejects_expansion():
    with pytest.raises(ValueError):
        H.collapse_time_quadrature(1.0, 0.5)


def test_small_alpha_recovers_static_profile():
    # with alpha -> 0 the profile system is the static system at gamma = 4/3
    mat = Material(0.25, 4.0 / 3.0, 2.0)
    prof = H.integrate_profile(H.HomologousParams(1e-12, mat, 1.0))
    stat = integrate_static(CenterData(1.0, 1.0), mat)
    assert prof.Z == pytest.approx(stat.R, rel=1e-9)


def test_profile_residual_matches_rhs():
    p = params(0.5, 0.1, beta=1.2)
    prof = H.integrate_profile(p)
    d, e = prof.interpolant()
    z = np.linspace(0.05, prof.Z * 0.95, 40)
    dd, de = H.profile_rhs(p, z, d(z), e(z))
    np.testing.assert_allclose(d(z, 1), dd, rtol=1e-5, atol=1e-6)
    np.testing.assert_allclose(e(z, 1), de, rtol=1e-5, atol=1e-6)


def test_positive_alpha_boundary_and_extinction():
    p = params(0.4, 0.2, beta=1.25, delta0_c=2.0)
    prof = H.integrate_profile(p)
    assert prof.exists
    assert math.isfinite(prof.Z_max_hint) and prof.Z_max_hint > prof.Z
    assert np.all(prof.F_tan >= prof.F_rad)
    assert H.decay_constant(prof) > 0
    zc, yc = H.continuation_y(prof)
    assert len(zc) > 0 and np.all(np.diff(zc) > 0)


def test_threshold_scaling_and_ordering():
    # delta_star is linear in |alpha|
    d1 = H.find_threshold(-0.1, 0.0)
    d2 = H.find_threshold(-0.4, 0.0)
    assert d2 / d1 == pytest.approx(4.0, rel=3e-3)
    assert H.exists_at(-0.1, 0.0, d1 * 1.01)
    assert not H.exists_at(-0.1, 0.0, d1 * 0.99)
    assert d1 < H.find_threshold(-0.1, 0.25) < H.find_threshold(-0.1, 0.45)


def test_threshold_bracket_errors():
    with pytest.raises(ValueError):
        H.find_threshold(0.1, 0.0)
    with pytest.raises(H.NoSignChange):
        H.find_threshold(-0.1, 0.0, bracket=(10.0, 20.0))


def test_assembled_ball():
    p = params(-0.2, 0.25, delta0_c=4.0)
    tr = H.solve_omega(p, 100.0)
    prof = H.integrate_profile(p)
    ball = H.assemble_solution(tr, prof)
    T = tr.collapse_time
    m0 = ball.mass(0.0)
    for t in (0.0, 0.3 * T, 0.8 * T):
        w = ball.omega(t)
        assert ball.R(t) == pytest.approx(prof.Z * w)
        assert ball.central_density(t) == pytest.approx(4.0 / w**3)
        assert ball.mass(t) == pytest.approx(m0, rel=1e-9)
        r = np.linspace(0.05, 0.9, 7) * ball.R(t)
        assert np.max(ball.continuity_residual(t, r)) < 1e-6
        pr0, pt0 = ball.pressures(0.0, r / w)
        pr, pt = ball.pressures(t, r)
        np.testing.assert_allclose(pr, pr0 / w**4, rtol=1e-10, atol=1e-14)
    assert ball.rho(0.0, 10 * prof.Z) == 0.0
    assert ball.u(0.3 * T, 0.5 * ball.R(0.3 * T)) < 0.0


def test_ball_requires_boundary():
    p = params(-1.0, 0.25, delta0_c=0.5)
    prof = H.integrate_profile(p, StaticOptions(classify=False))
    assert not prof.exists
    with pytest.raises(ValueError):
        H.assemble_solution(H.solve_omega(p, 10.0), prof)


def test_sidecar():
    p = params(-0.2, 0.25, delta0_c=4.0)
    side = H.integrate_profile(p).sidecar(1.5)
    assert side["T"] == 1.5 and side["alpha"] == -0.2
