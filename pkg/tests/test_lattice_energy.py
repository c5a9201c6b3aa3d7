import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from latticephase.halfplane import HEXAGONAL, SQUARE, Invert, Translate, apply_move
from latticephase.jacobi_theta import TruncationBudget
from latticephase.lattice_energy import (M_SPEC, THETA, W2, FDMethod, FDStepUnderflow, Method, PotentialSpec,
                                         Aa_closed, Ba_closed, L_main, L_prefactor, L_value, P_approx,
                                         arc_to_axis, axis_to_arc, dual_gap, endpoint_constants, energy,
                                         gamma_a_profile, gamma_c_profile, grid_energy, m_partials,
                                         m_via_duality, ma_mb, pa_pb, w_derivative, w_sum, w_sum_bruteforce)

PI = math.pi
POINTS = [(0.0, 1.0), (0.5, math.sqrt(3) / 2), (0.2, 1.3), (0.45, 2.7), (0.1, 0.9)]


@pytest.mark.parametrize("k", [0, 1, 2])
@pytest.mark.parametrize("alpha", [0.6, 1.0, 1.9])
@pytest.mark.parametrize("z", POINTS)
def test_against_bruteforce(k, alpha, z):
    ref = w_sum_bruteforce(k, alpha, z, 25)
    got = w_sum(k, alpha, z, method="Direct")
    assert abs(got.value - ref) <= 1e-13 * ref
    if k < 2:
        red = w_sum(k, alpha, z, method="Reduced1D")
        assert abs(red.value - ref) <= 1e-13 * ref


def test_small_alpha_uses_duality_and_agrees():
    for z in POINTS[:3]:
        for alpha in (0.15, 0.25):
            ref = w_sum_bruteforce(1, alpha, z, 60)
            assert w_sum(1, alpha, z).value == pytest.approx(ref, rel=1e-12)
            assert m_via_duality(alpha, z) == pytest.approx(ref, rel=1e-12)
            assert w_sum(0, alpha, z).value == pytest.approx(w_sum_bruteforce(0, alpha, z, 60), rel=1e-12)


def test_theta_duality_and_M_at_one():
    for z in POINTS:
        t = w_sum(0, 0.7, z).value
        assert t == pytest.approx(w_sum(0, 1 / 0.7, z).value / 0.7, rel=1e-13)
        # at alpha = 1 the duality forces M = theta / (2 pi)
        assert dual_gap(1.0, z) == pytest.approx(w_sum(0, 1.0, z).value / 2, rel=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.floats(-2, 2), st.floats(0.6, 3), st.floats(0.4, 2.5), st.sampled_from([0, 1]))
def test_modular_invariance(x, y, alpha, k):
    z = (x, y)
    v = w_sum(k, alpha, z).value
    for mv in (Translate(1), Invert()):
        w = apply_move(mv, z)
        if w.y < 0.05:
            continue
        assert w_sum(k, alpha, w, method="Direct").value == pytest.approx(v, rel=1e-12)


def test_tail_bound_reported():
    v = energy(M_SPEC, 1.0, SQUARE, TruncationBudget(abs_tol=1e-8, rel_tol=1e-8))
    exact = w_sum_bruteforce(1, 1.0, SQUARE, 30)
    assert abs(v.value - exact) <= v.tail_bound + 1e-15


def test_gamma_energy_is_sum():
    spec = PotentialSpec(1, 0.3)
    z = (0.3, 1.2)
    e = energy(spec, 1.1, z).value
    assert e == pytest.approx(w_sum(1, 1.1, z).value + 0.3 * w_sum(0, 1.1, z).value, rel=1e-15)


def test_grid_energy_matches_pointwise():
    X = np.array([0.0, 0.2, 0.5])
    Y = np.array([1.0, 1.7, 0.9])
    for spec in (THETA, M_SPEC, W2, PotentialSpec(1, 2.0)):
        g = grid_energy(spec, 1.2, X, Y)
        for i in range(3):
            assert g[i] == pytest.approx(energy(spec, 1.2, (X[i], Y[i]), method="Direct").value, rel=1e-13)


def test_spec_parse():
    assert PotentialSpec.parse("theta") == THETA
    assert PotentialSpec.parse("M") == M_SPEC
    assert PotentialSpec.parse("w2") == W2
    assert PotentialSpec.parse("gamma:0.5") == PotentialSpec(1, 0.5)
    for bad in ("w3", "gamma:-1", "gamma:nan", ""):
        with pytest.raises(ValueError):
            PotentialSpec.parse(bad)
    with pytest.raises(ValueError):
        w_sum(2, 1.0, SQUARE, method=Method.REDUCED)
    with pytest.raises(ValueError):
        w_sum(1, -1.0, SQUARE)


@pytest.mark.parametrize("which,d", [("dx", (1, 0)), ("dy", (0, 1)), ("dxy", (1, 1))])
@pytest.mark.parametrize("alpha,z", [(0.9, (0.17, 1.4)), (1.3, (0.33, 2.2)), (1.1, (0.05, 0.95))])
def test_expansions_against_direct_derivatives(which, d, alpha, z):
    got = m_partials(alpha, z, which)
    ref = w_derivative(1, alpha, z, *d)
    assert got == pytest.approx(ref, rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("alpha,z", [(0.95, (0.2, 2.0)), (1.2, (0.4, 1.1))])
def test_dyy_plus(alpha, z):
    ref = w_derivative(1, alpha, z, 0, 2) + 2 / z[1] * w_derivative(1, alpha, z, 0, 1)
    assert m_partials(alpha, z, "dyy_plus") == pytest.approx(ref, rel=1e-10)
    pa, pb = pa_pb(alpha, *z)
    assert pa + pb == pytest.approx(ref, rel=1e-10)
    assert m_partials(alpha, z, "dyy_plus", FDMethod.FINITE_DIFFERENCE) == pytest.approx(ref, rel=1e-5)


def test_fd_step_underflow():
    with pytest.raises(FDStepUnderflow):
        m_partials(1.0, (0.1, 1.0), "dx", FDMethod.FINITE_DIFFERENCE, h=1e-12)


def test_L_is_dual_gap_x_derivative():
    alpha, y = 1.2, 1.1
    for x in (0.05, 0.2, 0.4):
        h = 1e-5
        fd = (dual_gap(alpha, (x + h, y)) - dual_gap(alpha, (x - h, y))) / (2 * h)
        assert L_prefactor(alpha, x, y) * L_value(alpha, x, y) == pytest.approx(fd, rel=1e-6)
    # the n = 1 term dominates at large y
    assert L_value(1.5, 0.2, 3.0) == pytest.approx(L_main(1.5, 0.2, 3.0), rel=1e-6)


def test_ma_mb_reassemble_dxy():
    alpha, x, y = 1.1, 0.23, 1.3
    X = y / alpha
    from latticephase.jacobi_theta import theta1
    pref = 2 / (PI * math.sqrt(X) * alpha ** 2) * -theta1(X, x, (0, 1)).value * math.exp(-PI * alpha * y)
    a, b = ma_mb(alpha, x, y)
    assert pref * (a + b) == pytest.approx(w_derivative(1, alpha, (x, y), 1, 1), rel=1e-10)


def test_gamma_a_profile_identities():
    alpha, y = 1.3, 1.6
    p = gamma_a_profile(alpha, y)
    # d theta / dy on the imaginary axis = -pi alpha X_a, dM/dy = X_a - pi alpha X_b
    assert -PI * alpha * p.Xa == pytest.approx(w_derivative(0, alpha, (0, y), 0, 1), rel=1e-12)
    assert p.Xa - PI * alpha * p.Xb == pytest.approx(w_derivative(1, alpha, (0, y), 0, 1), rel=1e-12)
    assert p.Aa == pytest.approx(Aa_closed(alpha, y), rel=1e-13)
    assert p.Ba == pytest.approx(Ba_closed(alpha, y), rel=1e-13)
    # X_a(1/y) = -y^2 X_a(y)
    assert gamma_a_profile(alpha, 1.0).Xa == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        gamma_a_profile(alpha, 0.9)


@pytest.mark.parametrize("field,base", [("dXa", "Xa"), ("ddXa", "dXa"), ("dddXa", "ddXa"),
                                        ("dXb", "Xb"), ("ddXb", "dXb"), ("dddXb", "ddXb")])
def test_gamma_a_derivatives_by_fd(field, base):
    alpha, y, h = 1.1, 1.7, 1e-5
    fd = (getattr(gamma_a_profile(alpha, y + h), base) - getattr(gamma_a_profile(alpha, y - h), base)) / (2 * h)
    assert getattr(gamma_a_profile(alpha, y), field) == pytest.approx(fd, rel=1e-7, abs=1e-10)


@pytest.mark.parametrize("field,base", [("dYa", "Ya"), ("ddYa", "dYa"), ("dddYa", "ddYa"), ("dYb", "Yb")])
def test_gamma_c_derivatives_by_fd(field, base):
    alpha, y, h = 1.4, 0.7, 1e-5
    fd = (getattr(gamma_c_profile(alpha, y + h), base) - getattr(gamma_c_profile(alpha, y - h), base)) / (2 * h)
    assert getattr(gamma_c_profile(alpha, y), field) == pytest.approx(fd, rel=1e-7, abs=1e-10)


def test_gamma_c_profile_identities():
    alpha, y = 1.25, 0.74
    p = gamma_c_profile(alpha, y)
    assert -PI * alpha * p.Ya == pytest.approx(w_derivative(0, alpha, (0.5, y), 0, 1), rel=1e-11)
    assert p.Ya - PI * alpha * p.Yb == pytest.approx(w_derivative(1, alpha, (0.5, y), 0, 1), rel=1e-11)
    assert p.Papprox == pytest.approx(P_approx(alpha, y), rel=1e-12)
    # at alpha = 1, M = theta / (2 pi) on this line, so Y_b / Y_a is constant
    q = gamma_c_profile(1.0, 0.7)
    assert q.Yb / q.Ya == pytest.approx(3 / (2 * PI), rel=1e-10)
    # removable limit at y = 1/2
    assert gamma_c_profile(alpha, 0.5).Papprox == pytest.approx(gamma_c_profile(alpha, 0.5 + 1e-6).Papprox, rel=1e-5)


def test_endpoint_constants_against_profile():
    alpha = 1.7
    c = endpoint_constants(alpha)
    p = gamma_a_profile(alpha, 1.0)
    # at y = 1: derivatives of the dominant block are -A, -B, of the remainder -C, -D
    assert p.dAa == pytest.approx(-c.A, rel=1e-12)
    assert p.dBa == pytest.approx(-c.B, rel=1e-12)
    assert p.dAe == pytest.approx(-c.C, rel=1e-9)
    assert p.dBe == pytest.approx(-c.D, rel=1e-9)


def test_arc_axis_maps():
    for u in (-0.5, 0.0, 0.3):
        p = arc_to_axis(u)
        assert p.x == 0.5
        q = axis_to_arc(p.y)
        assert q.x == pytest.approx(u, abs=1e-14)
        # both points lie in the same orbit, so energies agree
        a = w_sum(1, 1.3, p).value
        b = w_sum(1, 1.3, q).value
        assert a == pytest.approx(b, rel=1e-13)
    assert axis_to_arc(math.sqrt(3) / 2).distance(HEXAGONAL) < 1e-15
