import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from polyball import constitutive as C
from polyball.constitutive import Material, StrainState

M = Material(0.25, 2.0, 2.0)


@st.composite
def materials(draw, nu_min=-0.5, gamma_max=4.0):
    nu = draw(st.floats(nu_min, 0.5))
    g = draw(st.floats(0.2, gamma_max))
    frac = draw(st.floats(-0.5, 1.0))
    b = frac * 3.0 * g * (1.0 - nu) / (1.0 + nu)
    assume(abs(b) > 1e-3)
    return Material(nu, g, b)


positive = st.floats(1e-3, 1e3)


# -- closed-form oracles ---------------------------------------------------------

def test_shear_S_values():
    assert C.shear_S(M, 1.0) == 0.0
    assert C.shear_S(M, 2.0) == pytest.approx(0.15, rel=1e-14)
    lim = 0.6 * (math.log(2.0) + 0.5 - 1.0)
    for d in (1e-3, 1e-5, 1e-6):
        m = Material(0.25, 2.0, 1.0 + d)
        assert C.shear_S(m, 2.0) == pytest.approx(lim, abs=2 * d)
    assert C.shear_S(Material(0.25, 2.0, 1.0), 2.0) == pytest.approx(lim, rel=1e-14)


def test_shear_S_continuous_across_branch_switch():
    eps = C.EPS_BRANCH
    a = C.shear_S(Material(0.25, 2.0, 1.0 + 0.999 * eps), 3.0)
    b = C.shear_S(Material(0.25, 2.0, 1.0 + 1.001 * eps), 3.0)
    assert abs(a - b) < 1e-7


def test_f_rad_values():
    assert C.f_rad(M, 1.0) == 0.0
    assert C.f_rad(M, 0.5) == pytest.approx(-0.225, rel=1e-14)
    for m in (M, Material(0.1, 1.5, 0.7), Material(-0.3, 3.0, -1.0)):
        assert C.f_rad(m, m.y_b) == pytest.approx(-1.0 / (3.0 * m.gamma), rel=1e-12)


def test_f_tan_from_S():
    S = C.PolytropicShear(M)
    assert C.f_tan_from_S(M, S, 1.0) == 0.0
    assert C.f_tan_from_S(M, S, 2.0) == pytest.approx(0.0, abs=1e-14)
    m1 = Material(0.25, 1.0, 0.5)
    ys = np.linspace(0.2, 4.0, 9)
    np.testing.assert_allclose(C.f_tan_from_S(m1, C.PolytropicShear(m1), ys), C.f_rad(m1, ys),
                               rtol=1e-14)


def test_shear_function_normalization():
    for m in (M, Material(0.0, 1.2, 1.0), Material(0.4, 0.5, -0.8)):
        S = C.PolytropicShear(m)
        assert S(1.0) == 0.0
        assert S.derivative(1.0) == 0.0
        assert S.second_derivative(1.0) == pytest.approx(m.c, rel=1e-12)


def test_B_values():
    assert C.B_func(Material(0.25, 2.0, 1.0), math.e) == pytest.approx(math.e * (math.e - 2), rel=1e-14)
    assert C.B_func(M, 2.0) == pytest.approx(1.0, rel=1e-14)
    for b in (-1.0, 0.5, 1.0, 3.0):
        assert C.B_func(Material(-0.5, 2.0, b), 1.0) == 0.0


@given(materials(), st.floats(1e-3, 1e3))
def test_B_nonnegative(m, y):
    assert C.B_func(m, y) >= 0.0


def test_B_series_matches_closed_form_at_switch():
    for b in (-1.5, 0.3, 2.0, 7.0):
        m = Material(-0.5, 4.0, b)
        for y in (1.0 - 1.0001e-3, 1.0 + 1.0001e-3):
            inner = C.B_func(m, 1.0 + 0.9999 * (y - 1.0))
            outer = C.B_func(m, y)
            assert inner == pytest.approx(outer, rel=1e-3)


def test_Q_values():
    m = Material(0.25, 1.7, 1.7)
    ys = np.geomspace(1e-3, 1e3, 31)
    np.testing.assert_allclose(C.Q_func(m, ys), 0.5 / 1.25, rtol=1e-12)
    for mm in (M, Material(0.1, 3.0, 0.5)):
        ref = (1 - 2 * mm.nu) / (1 + mm.nu)
        assert C.Q_func(mm, 1.0) == ref
        assert C.Q_func(mm, 1.0 + 1e-7) == pytest.approx(ref, rel=1e-6)
    m = Material(0.25, 2.0, 0.5)
    q0 = 3 * m.gamma * m.c / (2 * m.beta) - 0.5
    assert C.Q_func(m, 1e-12) == pytest.approx(q0, rel=1e-5)
    assert C.Q_limits(m)[0] == pytest.approx(q0)


def test_Q_consistent_with_S_form():
    for m in (M, Material(0.1, 1.3, 0.4), Material(-0.4, 0.8, 1.0), Material(0.45, 2.5, -2.0)):
        d, e = np.meshgrid(np.geomspace(0.05, 20, 15), np.geomspace(0.05, 20, 15))
        s = StrainState(d, e)
        pr, pt = C.p_hat(m, s)
        pr2, pt2 = C.p_hat_from_S(m, s)
        np.testing.assert_allclose(pt - pr, pt2 - pr2, rtol=1e-12, atol=1e-13)


def test_p_hat_values():
    assert C.p_hat(M, StrainState(1.0, 1.0)) == (0.0, 0.0)
    m = Material(0.25, 4.0 / 3.0, 2.0)
    assert m.y_b**2 == pytest.approx(1.0 / 6.0, rel=1e-14)
    assert C.p_hat(m, StrainState(0.5, 1.0))[0] == pytest.approx(-0.675, rel=1e-13)
    for eta in (1e-3, 0.3, 7.0, 1e3):
        assert C.p_hat(m, StrainState(m.y_b * eta, eta))[0] == pytest.approx(-m.kappa / m.gamma,
                                                                             rel=1e-12)


def test_eos_F_values():
    m = Material(0.25, 4.0 / 3.0, 2.0, kappa=2.0)
    assert C.eos_F(m, StrainState(1.0, 1.0)) == pytest.approx((1.5, 1.5))
    m1 = Material(0.25, 4.0 / 3.0, 2.0)
    assert C.eos_F(m1, StrainState(0.5, 1.0))[0] == pytest.approx(0.075, rel=1e-12)
    assert C.eos_F(m1, StrainState(m1.y_b * 3.0, 3.0))[0] == pytest.approx(0.0, abs=1e-13)
    fr = C.eos_F(m1, StrainState(np.array([0.3, 0.5]), 1.0))[0]
    assert fr[0] < 0 < fr[1]


def test_coeff_a():
    for m in (M, Material(-0.3, 1.1, 0.4)):
        assert C.coeff_a(m, StrainState(1.0, 1.0)) == pytest.approx(3 * m.c)
    fl = Material(0.5, 1.7, 1.7)
    d, e = 0.7, 1.9
    assert C.coeff_a(fl, StrainState(d, e)) == pytest.approx(d**0.7, rel=1e-13)
    m = Material(0.2, 1.4, 0.9)
    h = 1e-5
    fd = (C.p_hat(m, StrainState(0.8 + h, 1.3))[0] - C.p_hat(m, StrainState(0.8 - h, 1.3))[0]) / (2 * h)
    assert C.coeff_a(m, StrainState(0.8, 1.3)) == pytest.approx(fd, rel=1e-9)


@given(materials(), positive, positive)
def test_coeff_a_positive(m, d, e):
    assert C.coeff_a(m, StrainState(d, e)) > 0.0


def test_coeff_b_times():
    assert C.coeff_b_times(M, StrainState(1.3, 1.3)) == 0.0
    m = Material(0.25, 1.6, 1.6)
    assert C.coeff_b_times(m, StrainState(0.3, 2.0)) == 0.0
    m = Material(0.25, 1.0, 2.0, strict=False)
    assert C.coeff_b_times(m, StrainState(2.0, 1.0)) == pytest.approx(5.4, rel=1e-14)


def test_stored_energy_values():
    for m in (M, Material(0.25, 1.0, 0.5), Material(0.25, 2.0, 1.0), Material(0.1, 1.0, 1.0)):
        assert C.stored_energy(m, StrainState(1.0, 1.0)) == pytest.approx(0.0, abs=1e-15)
    # branch limit at beta = 1 +- 1e-6
    s = StrainState(0.6, 1.7)
    w1 = C.stored_energy(Material(0.25, 2.0, 1.0), s)
    for b in (1.0 - 1e-6, 1.0 + 1e-6):
        assert C.stored_energy(Material(0.25, 2.0, b), s) == pytest.approx(w1, abs=1e-4)
    w1 = C.stored_energy(Material(0.25, 1.0, 0.5), s)
    for g in (1.0 - 1e-6, 1.0 + 1e-6):
        assert C.stored_energy(Material(0.25, g, 0.5), s) == pytest.approx(w1, abs=1e-4)


def test_stored_energy_gradient():
    for m in (M, Material(0.25, 1.0, 0.5), Material(0.25, 2.0, 1.0), Material(-0.2, 1.0, 1.0),
              Material(0.3, 0.7, -0.5)):
        d, e, h = 0.8, 1.4, 1e-5
        w = lambda dd, ee: C.stored_energy(m, StrainState(dd, ee))
        wd = (w(d + h, e) - w(d - h, e)) / (2 * h)
        we = (w(d, e + h) - w(d, e - h)) / (2 * h)
        pr, pt = C.p_hat(m, StrainState(d, e))
        assert pr == pytest.approx(d * d * wd, abs=1e-8)
        assert pt - pr == pytest.approx(1.5 * d * e * we, abs=1e-8)


def test_fluid_limit():
    m = Material(0.5, 1.8, 1.8)
    d = np.geomspace(0.01, 100, 25)
    s = StrainState(d, np.geomspace(0.02, 50, 25))
    pr, pt = C.p_hat(m, s)
    ref = (d**1.8 - 1) / 1.8
    np.testing.assert_allclose(pr, ref, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(pt, ref, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(C.stored_energy(m, StrainState(d, d)), C.stored_energy_fluid(m, d),
                               rtol=1e-12, atol=1e-14)


def test_hyperelastic_exactness():
    for m in (M, Material(0.25, 1.0, 0.5), Material(0.0, 3.0, 1.0), Material(-0.5, 0.5, -2.0)):
        assert C.check_hyperelastic_exactness(m) <= 1e-6
    assert C.check_hyperelastic_exactness(Material(0.5, 2.0, 2.0)) <= 1e-9

    def perturbed(mat, s):
        pr, pt = C.p_hat(mat, s)
        return pr, pt + 0.1 * s.eta

    assert C.check_hyperelastic_exactness(M, pressures=perturbed) > 1e-2


def test_scale_invariance_examples():
    m = Material(0.25, 4.0 / 3.0, 1.1)
    assert C.check_scale_invariance(m, 0.5, 2.0, 1.0) == (0.0, 0.0)
    a1 = C.coeff_a(m, StrainState(8.0, 8.0))
    a0 = C.coeff_a(m, StrainState(1.0, 1.0))
    assert a1 / a0 == pytest.approx(2.0, rel=1e-15)


def test_cbs_and_linearization():
    m = Material(0.3, 1.4, 1.1)
    assert C.cbs_spread(m, np.geomspace(1e-5, 1e5, 101)) <= 1e-12
    lin = C.linearization(m)
    ex = C.linearization_exact(0.3)
    for k in ex:
        assert lin[k] == pytest.approx(ex[k], abs=1e-8)


def test_baker_ericksen_examples():
    for m in (M, Material(0.25, 2.0, 0.5), Material(-0.5, 1.0, -1.0), Material(0.4, 3.0, 2.0)):
        assert C.baker_ericksen(m, "weak").passed
    assert C.baker_ericksen(M, "strong").passed
    r = C.baker_ericksen(Material(0.25, 2.0, 0.5), "strong")
    assert not r.passed and not r.predicate
    assert r.witness is not None and r.witness > 1.0
    assert C.Q_func(Material(0.25, 2.0, 0.5), r.witness) < 0.0
    with pytest.raises(ValueError):
        C.baker_ericksen(M, "medium")


def test_nonnegative_energy():
    assert C.check_nonnegative_energy(Material(0.25, 2.0, 0.5), "weak")[0]
    ok, _ = C.check_nonnegative_energy(Material(0.25, 2.0, 0.5), "strong")
    assert ok == C.condgamma(Material(0.25, 2.0, 0.5))
    assert C.check_nonnegative_energy(M, "strong")[0]


def test_material_validation():
    with pytest.raises(C.InadmissibleMaterial):
        Material(0.25, 1.0, 2.0)
    with pytest.raises(C.InadmissibleMaterial):
        Material(0.25, 1.0, 0.0)
    with pytest.raises(C.InadmissibleMaterial):
        Material(0.6, 1.0, 1.0)
    m = Material(0.25, 4.0 / 3.0, 2.4)
    assert m.zero_shear and m.y_b == 0.0
    assert Material(0.25, 2.0, 2.0).P_ref == 0.5
    with pytest.raises(C.DomainError):
        C.shear_S(M, 0.0)
    with pytest.raises(C.DomainError):
        StrainState(-1.0, 1.0)


def test_svk():
    ev = C.svk_eval(0.25, 1.0, StrainState(1.0, 1.0))
    assert ev.w == pytest.approx(0.0, abs=1e-15)
    assert ev.p_rad == pytest.approx(0.0, abs=1e-15) and ev.p_tan == pytest.approx(0.0, abs=1e-15)
    assert ev.a == pytest.approx(1.8, rel=1e-14)
    d, e = np.meshgrid(np.linspace(0.1, 3, 60), np.linspace(0.1, 3, 60))
    a = C.svk_eval(0.25, 1.0, StrainState(d, e)).a
    assert np.any(a <= 0.0)
    # pressures from the energy by central differences
    h, d0, e0 = 1e-6, 0.9, 1.3
    w = lambda dd, ee: C.svk_eval(0.25, 1.0, StrainState(dd, ee)).w
    ev = C.svk_eval(0.25, 1.0, StrainState(d0, e0))
    assert ev.p_rad == pytest.approx(d0**2 * (w(d0 + h, e0) - w(d0 - h, e0)) / (2 * h), rel=1e-7)
    assert ev.p_tan - ev.p_rad == pytest.approx(
        1.5 * d0 * e0 * (w(d0, e0 + h) - w(d0, e0 - h)) / (2 * h), rel=1e-7)


def test_svk_be_ratio_continuous_on_diagonal():
    r_on = C.svk_be_ratio(0.25, 1.0, StrainState(1.2, 1.2))
    r_off = C.svk_be_ratio(0.25, 1.0, StrainState(1.2, 1.2 * (1 + 1e-4)))
    assert r_on == pytest.approx(r_off, rel=1e-3)


@given(materials(), st.floats(0.5, 2.0), st.floats(0.5, 2.0))
def test_property_pressure_relation(m, d, e):
    s = StrainState(d, e)
    pr, pt = C.p_hat(m, s)
    y = d / e
    rhs = 3.0 * m.kappa * (1 - y) * C.Q_func(m, y) * e**m.gamma
    assert pt - pr == pytest.approx(rhs, rel=1e-10, abs=1e-13)
