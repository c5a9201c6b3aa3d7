import math

import numpy as np
import pytest

from latticephase.lattice_energy import pa_pb, w_derivative
from latticephase.lemma_audit import (CATALOGUE, EPS1_BOUND, LEMMA_IDS, SQ3_2, GridSpec, HypothesisRegionError,
                                      _flat_slope_margin, _nudge_x, audit, span)


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec((1.0, 0.5, 3))
    with pytest.raises(ValueError):
        GridSpec((1.0, 2.0, 1))
    g = GridSpec((1.0, 2.0, 3), (0.0, 0.5, 2), (1.0, 1.0, 1))
    assert g.size == 6
    r = g.refined(2)
    assert r.alpha_range == (1.0, 2.0, 5)
    assert r.y_range == (1.0, 1.0, 1)
    # nested: old nodes survive
    assert set(np.round(g.axes()[0], 12)) <= set(np.round(r.axes()[0], 12))


def test_span():
    lo, hi, n = span(0.0, 1.0, 0.01)
    assert (lo, hi, n) == (0.0, 1.0, 101)
    assert span(0.0, 1e-6)[2] == 2


def test_nudge_x_moves_inward():
    out = _nudge_x(np.array([0.0, 0.25, 0.5, 1.0]))
    assert out[0] > 0 and out[1] == 0.25 and out[2] < 0.5 and out[3] > 1.0


def test_flat_slope_limit_is_continuous():
    # F = (y - 1), G = (y - 1) (2 - (y - 1)^2): ratio 2 - (y-1)^2, stationary at y = 1
    def FG(y):
        t = y - 1
        F = (t, 1.0, 0.0, 0.0)
        G = (2 * t - t ** 3, 2 - 3 * t ** 2, -6 * t, -6.0)
        return F, G
    at = _flat_slope_margin(*FG(1.0), 1.0, 1.0)
    near = _flat_slope_margin(*FG(1.0 + 1e-5), 1.0 + 1e-5, 1.0)
    assert at == pytest.approx(1.0)
    assert near == pytest.approx(at, rel=1e-4)


def test_catalogue_is_complete():
    assert len(LEMMA_IDS) == 16
    for e in CATALOGUE.values():
        assert e.claim


def test_region_enforced():
    g = GridSpec((1.05, 1.2, 3), (0.0, 0.5, 3), (SQ3_2, 2.0, 3))
    with pytest.raises(HypothesisRegionError):
        audit("L_positive", g)
    with pytest.raises(KeyError):
        audit("nope")


def test_eps1_bound():
    rep = audit("eps1_bound")
    assert rep.passed
    assert rep.claimed_bound == 13 * math.exp(-3 * math.pi ** 2 / 4) == EPS1_BOUND
    # the claimed decimal 0.007928797236 agrees only to ~2e-8 relative
    assert rep.claimed_bound == pytest.approx(0.007928797236, rel=2e-8)
    assert 1 - 0.007928797236 / EPS1_BOUND < rep.min_margin
    assert "numerical check only" in rep.line()
    assert rep.line().startswith("eps1_bound: PASS")


def test_ya_nonneg_fine_grid():
    rep = audit("Ya_nonneg", GridSpec((0.7, 0.7, 1), (0.0, 0.0, 1), (0.5, SQ3_2, 1000)))
    assert rep.passed and rep.nodes == 1000


def test_pa_pb_components_and_fd_oracle():
    g = GridSpec((0.92, 0.98, 3), (0.0, 0.5, 6), (SQ3_2, 2.0, 8))
    rep = audit("PA_PB", g)
    assert rep.components["P_A>=1e-3"] > 0
    assert rep.components["P_A+P_B>0"] > 0
    # P_A + P_B is (d_yy + (2/y) d_y) M; check against direct second derivatives
    alpha, x, y = 0.9156, 0.28, 2.0
    pa, pb = pa_pb(alpha, x, y)
    ref = w_derivative(1, alpha, (x, y), 0, 2) + 2 / y * w_derivative(1, alpha, (x, y), 0, 1)
    assert pa + pb == pytest.approx(ref, rel=1e-10)


def test_l_positive_past_its_root():
    # the audited margin crosses zero near alpha = 1.09872 at the hexagonal corner
    g = GridSpec((1.09872, 1.3, 5), (0.0, 0.5, 11), (SQ3_2, 2.0, 12))
    assert audit("L_positive", g).passed


@pytest.mark.parametrize("lemma_id", ["eps1_bound", "Rn_positive", "AB_bound"])
def test_refinement_preserves_pass(lemma_id):
    base = audit(lemma_id)
    fine = audit(lemma_id, CATALOGUE[lemma_id].default_grid.refined(2))
    assert base.passed and fine.passed
    assert fine.min_margin <= base.min_margin + 1e-15
    assert fine.min_margin == pytest.approx(base.min_margin, rel=0.05)


def test_quotient_bounds_small_grid():
    rep = audit("quotient_bounds", GridSpec((0.0, 0.0, 1), (0.25, 2.0, 8), (0.0, 0.5, 101)))
    assert rep.passed
    assert set(rep.components) >= {"L2a_1", "L2c_2"}


def test_yratio_monotone_uses_limits():
    rep = audit("Yratio_monotone", GridSpec((1.0, 1.1, 3), (0.0, 0.0, 1), (0.5, SQ3_2, 41)))
    assert rep.passed and math.isfinite(rep.min_margin)
