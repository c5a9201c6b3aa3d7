import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from latticephase.jacobi_theta import (QUOTIENT_KINDS, BudgetExhausted, RangeError, TruncationBudget,
                                       mu, nu, quotient_bound, quotient_bound_check, theta1, theta_array)

mp.mp.dps = 40


def oracle(X, Y, d=(0, 0)):
    # theta(X; Y) as Jacobi's theta_3 with nome exp(-pi X); derivatives by mpmath's
    # adaptive numerical differentiation
    f = lambda a, b: mp.jtheta(3, mp.pi * b, mp.exp(-mp.pi * a))
    if d == (0, 0):
        return float(f(mp.mpf(X), mp.mpf(Y)))
    return float(mp.diff(f, (mp.mpf(X), mp.mpf(Y)), d))


ORDERS = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (2, 1)]


@pytest.mark.parametrize("d", ORDERS)
@pytest.mark.parametrize("X,Y", [(0.07, 0.13), (0.4, 0.31), (1.0, 0.0), (1.7, 0.45), (3.2, 0.77)])
def test_against_mpmath(d, X, Y):
    v = theta1(X, Y, d)
    ref = oracle(X, Y, d)
    assert abs(v.value - ref) <= 1e-12 * max(1.0, abs(ref))


@settings(max_examples=60, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.0, 1.0), st.sampled_from(ORDERS))
def test_direct_and_poisson_agree(X, Y, d):
    a = theta1(X, Y, d, form="direct")
    b = theta1(X, Y, d, form="poisson")
    scale = max(1.0, abs(a.value))
    assert abs(a.value - b.value) <= 1e-12 * scale


@pytest.mark.parametrize("d", ORDERS)
def test_tail_bound_is_honest(d):
    # a deliberately loose tolerance leaves room to see the dropped tail
    budget = TruncationBudget(abs_tol=1e-6, rel_tol=1e-6)
    for X, Y in [(0.05, 0.2), (0.6, 0.3), (1.2, 0.1)]:
        v = theta1(X, Y, d, budget)
        exact = theta1(X, Y, d, TruncationBudget(abs_tol=1e-300, rel_tol=1e-16, max_terms=2000))
        assert abs(v.value - exact.value) <= v.tail_bound + 1e-15 * max(1, abs(exact.value))


def test_periodic_and_even():
    for X in (0.2, 1.3):
        assert theta1(X, 0.3).value == pytest.approx(theta1(X, 1.3).value, rel=1e-14)
        assert theta1(X, 0.3).value == pytest.approx(theta1(X, -0.3).value, rel=1e-14)
        assert theta1(X, 0.3, (0, 1)).value == pytest.approx(-theta1(X, -0.3, (0, 1)).value, rel=1e-13)


def test_theta_array_matches_scalar():
    X = np.array([0.1, 0.5, 1.0, 2.5])
    Y = np.array([0.05, 0.3, 0.5, 0.9])
    for d in ORDERS:
        vals, tails = theta_array(X, Y, d)
        for i in range(4):
            assert vals[i] == pytest.approx(theta1(X[i], Y[i], d).value, rel=1e-12, abs=1e-14)
        assert np.all(tails < 1e-40)


def test_errors():
    with pytest.raises(ValueError):
        theta1(0.0, 0.1)
    with pytest.raises(ValueError):
        theta1(1.0, 0.1, (3, 0))
    with pytest.raises(BudgetExhausted):
        theta1(1e-4, 0.1, budget=TruncationBudget(abs_tol=1e-300, rel_tol=1e-300, max_terms=8), form="direct")
    with pytest.raises(ValueError):
        TruncationBudget(abs_tol=-1.0)


def test_envelope_series():
    X = 0.7
    ref_mu = sum(n * n * math.exp(-math.pi * (n * n - 1) * X) for n in range(2, 40))
    ref_nu = sum(n**4 * math.exp(-math.pi * (n * n - 1) * X) for n in range(2, 40))
    assert mu(X) == pytest.approx(ref_mu, rel=1e-14)
    assert nu(X) == pytest.approx(ref_nu, rel=1e-14)


Y_GRID = np.linspace(0.0, 0.5, 401)


@pytest.mark.parametrize("kind,X", [("L2a_1", 0.3), ("L2a_1", 2.0), ("L2a_2", 0.1), ("L2a_2", 0.55),
                                    ("L2b_1", 0.5), ("L2b_2", 0.25), ("L2b_3", 1.0), ("L2c_1", 0.2),
                                    ("L2c_2", 0.45)])
def test_quotient_envelopes_hold(kind, X):
    ks = (1,) if kind in ("L2b_3", "L2c_1") else (1, 2, 3)
    for k in ks:
        r = quotient_bound_check(kind, X, k, Y_GRID)
        assert r.passed, r


def test_quotient_region_enforced():
    with pytest.raises(RangeError):
        quotient_bound_check("L2a_1", 0.1, 1, Y_GRID)
    with pytest.raises(RangeError):
        quotient_bound_check("L2c_1", 0.3, 2, Y_GRID)
    with pytest.raises(ValueError):
        quotient_bound("nope", 1.0, 1)
    assert set(QUOTIENT_KINDS) >= {"L2a_1", "L2c_2"}
