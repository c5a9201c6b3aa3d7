"""Grid audits of the quantitative inequalities behind the phase diagram.

Every entry evaluates one inequality on an explicit (alpha, x, y) grid and
reports a *relative* margin: positive means the inequality holds with room
to spare at that node, so ``passed`` is simply ``min_margin > 0``.  These are
numerical checks only; nothing here is a proof.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .jacobi_theta import QUOTIENT_KINDS, ULP_SLACK, quotient_bound_check
from .lattice_energy import (P_n, P_mn, R_n, _outer_count, _th, endpoint_constants,
                             gamma_a_profile, gamma_c_profile)
from .phase_solver import _threads

PI = math.pi
SQ3_2 = math.sqrt(3) / 2
ALPHA_LEMMA4 = 0.9155730607
ALPHA_MAIN = 1.092212127
EPS1_BOUND = 13 * math.exp(-3 * PI ** 2 / 4)
BANNER = "numerical check only"

Range = Tuple[float, float, int]


class HypothesisRegionError(ValueError):
    """The requested grid leaves the region where the audited statement is claimed."""


@dataclass(frozen=True)
class GridSpec:
    alpha_range: Range
    x_range: Range = (0.0, 0.0, 1)
    y_range: Range = (0.0, 0.0, 1)

    def __post_init__(self):
        for name in ("alpha_range", "x_range", "y_range"):
            lo, hi, n = getattr(self, name)
            if n == 1:
                if lo != hi:
                    raise ValueError(f"{name}: a collapsed axis needs lo == hi")
            elif not (lo < hi and n >= 2):
                raise ValueError(f"{name}: need lo < hi and steps >= 2, got {(lo, hi, n)}")

    def axes(self):
        return tuple(np.linspace(lo, hi, n) for lo, hi, n in (self.alpha_range, self.x_range, self.y_range))

    def refined(self, factor: int = 2) -> "GridSpec":
        """Nested refinement: every old node survives."""
        def r(t):
            lo, hi, n = t
            return t if n == 1 else (lo, hi, (n - 1) * factor + 1)
        return GridSpec(r(self.alpha_range), r(self.x_range), r(self.y_range))

    @property
    def size(self) -> int:
        return self.alpha_range[2] * self.x_range[2] * self.y_range[2]


def span(lo: float, hi: float, res: float = 0.01, minimum: int = 2) -> Range:
    """Axis covering [lo, hi] at roughly ``res`` spacing."""
    return (lo, hi, max(minimum, int(math.ceil((hi - lo) / res - 1e-9)) + 1))


@dataclass(frozen=True)
class AuditReport:
    lemma_id: str
    grid: GridSpec
    min_margin: float
    worst_point: Dict[str, float]
    claimed_bound: float
    passed: bool
    claim: str = ""
    components: Dict[str, float] = field(default_factory=dict)
    nodes: int = 0
    truncation: str = ""
    banner: str = BANNER

    def line(self) -> str:
        where = ",".join(f"{k}={v:.10g}" for k, v in self.worst_point.items())
        status = "PASS" if self.passed else "FAIL"
        return f"{self.lemma_id}: {status} min_margin={self.min_margin:.4g} at ({where}) [{self.banner}]"


# --------------------------------------------------------------- helpers

def _nudge_x(xs: np.ndarray, h: float = 1e-7) -> np.ndarray:
    # theta_Y(X; x) vanishes at x in Z/2; step h toward the interior of [0, 1/2]
    out = xs.astype(float).copy()
    r = np.round(2 * out)
    near = np.abs(2 * out - r) < 2 * h
    base = r / 2
    even = (base - np.floor(base)) == 0
    out[near] = np.where(even[near], base[near] + h, base[near] - h)
    return out


def _zero_ratio(F, G, dF, dG, ddF, ddG, at_zero: bool):
    """(G/F, d/dy (G/F)), using the limits at a common simple zero of F and G."""
    if at_zero:
        return dG / dF, (dF * ddG - ddF * dG) / (2 * dF * dF)
    return G / F, (dG * F - G * dF) / (F * F)


def _flat_slope_margin(F, G, y: float, y_s: float) -> float:
    """-(d/dy (G/F)) / (|G/F| ln(y / y_s)) for a ratio that is stationary at y_s.

    F, G are (value, d, d2, d3) at y, and both vanish at y_s.  The log factor
    has the sign of y - y_s and removes the exact zero of the slope there; at
    y = y_s the value is the limit -y_s (G/F)'' / |G/F|.
    """
    F0, F1, F2, F3 = F
    G0, G1, G2, G3 = G
    if abs(y - y_s) < 1e-12:
        r = G1 / F1
        r2 = (G3 * F1 - G1 * F3) / (3 * F1 ** 2) - F2 * (G2 * F1 - G1 * F2) / (2 * F1 ** 3)
        return -y_s * r2 / abs(r)
    r, s = G0 / F0, (G1 * F0 - G0 * F1) / (F0 * F0)
    return -s / (abs(r) * math.log(y / y_s))


_Y_ENDPOINTS = (0.5, SQ3_2)


def _at_endpoint(y: float) -> bool:
    return any(abs(y - e) < 1e-12 for e in _Y_ENDPOINTS)


# Each evaluator maps (alpha, xs, ys) to (margin, {component: margin}), arrays of
# shape (len(xs), len(ys)); NaN marks nodes outside a coupled constraint.
Evaluator = Callable[[float, np.ndarray, np.ndarray], Tuple[np.ndarray, Dict[str, np.ndarray]]]


def _L_parts(alpha, xs, ys):
    x = _nudge_x(xs)[None, :, None]
    y = ys[None, None, :]
    X = y / alpha
    n = np.arange(1, _outer_count(PI * alpha * ys.min(), 1e-22) + 2, dtype=float)[:, None, None]
    den = _th(X, x, (0, 1))
    rY = _th(X, n * x, (0, 1)) / den
    rXY = _th(X, n * x, (1, 1)) / (-den)
    terms = (2 * PI * y * alpha ** 2 * n ** 3 * rY - 2 * y * n * rXY - alpha * n * rY) \
        * np.exp(-PI * alpha * y * (n * n - 1))
    scale = 2 * PI * ys[None, :] * alpha ** 2
    return terms.sum(axis=0) / scale, terms[0] / scale


def _eval_L(alpha, xs, ys):
    full, main = _L_parts(alpha, xs, ys)
    return full, {"main_term": main}


def _eval_main(alpha, xs, ys):
    _, main = _L_parts(alpha, xs, ys)
    inside = (xs[:, None] ** 2 + ys[None, :] ** 2) >= 1 - 1e-12
    return np.where(inside, main, np.nan), {}


def _eps1(X):
    n = np.arange(2, 40, dtype=float)[:, None]
    e = np.exp(-PI * (n * n - 1) * X)
    return ((n ** 4 - n ** 2) * e).sum(axis=0) / (1 + (n * n * e).sum(axis=0))


def _eval_eps1(alpha, xs, ys):
    X = ys / alpha
    m = 1 - _eps1(X) / EPS1_BOUND
    m = np.where(X >= PI / 4 - 1e-12, m, np.nan)[None, :]
    # positive root of 2 pi a^2 - a - 2 pi (1 + eps) at the claimed eps bound
    root = (1 + math.sqrt(1 + 16 * PI ** 2 * (1 + EPS1_BOUND))) / (4 * PI)
    return m, {"threshold<=1.086682914": np.full_like(m, 1 - root / 1.086682914)}


def _eval_p_major(alpha, xs, ys):
    x, y = xs[:, None], ys[None, :]
    major = P_n(alpha, x, y, 0) + 2 * P_n(alpha, x, y, 1)
    lb = alpha ** 2 * (0.25 - (PI * alpha ** 2 * y * y - PI * alpha * y - 0.25) * np.exp(-PI * alpha * y)) \
        * _th(y / alpha, 0.0) - (8 * PI * alpha * y + 8 * PI ** 2 * y * y) * np.exp(-PI * y / alpha)
    lb = np.broadcast_to(lb, major.shape)
    return major / 0.1 - 1, {"major>=stated_lower_bound": (major - lb) / 0.1,
                             "stated_lower_bound>0.1": lb / 0.1 - 1}


def _eval_p_error(alpha, xs, ys):
    N = _outer_count(PI * alpha * ys.min(), 1e-30) + 2
    n = np.arange(2, N + 1, dtype=float)[:, None, None]
    x, y = xs[None, :, None], ys[None, None, :]
    terms = 2 * np.abs(P_n(alpha, x, y, n))
    from2 = terms.sum(axis=0)
    from3 = terms[1:].sum(axis=0)
    env = (4 * (4 * PI * alpha * y + 4 * PI ** 2 * y * y + alpha ** 4 * PI ** 2 * y * y * n ** 4)
           * np.exp(-PI * alpha * y * n * n)).sum(axis=0)
    env = np.broadcast_to(env, from2.shape)
    return 1 - from2 / 4e-7, {"sum_n>=3": 1 - from3 / 4e-7,
                              "envelope<=4e-7": 1 - env / 4e-7,
                              "envelope>=sum_n>=3": (env - from3) / 4e-7}


def _eval_pa_pb(alpha, xs, ys):
    N = _outer_count(PI * alpha * ys.min(), 1e-22) + 1
    Mx = int(math.ceil(math.sqrt(60 * ys.max() / (PI * alpha)))) + N
    m, n = np.meshgrid(np.arange(-Mx, Mx + 1.0), np.arange(-N, N + 1.0), indexing="ij")
    m, n = m.ravel()[:, None], n.ravel()[:, None]
    inner = ((np.abs(m) <= 2) & (np.abs(n) <= 2))[:, 0]
    PA = np.empty((len(xs), len(ys)))
    PB = np.empty_like(PA)
    for j, y in enumerate(ys):
        t = P_mn(alpha, xs[None, :], y, m, n)
        PA[:, j] = t[inner].sum(axis=0)
        PB[:, j] = t[~inner].sum(axis=0)
    a = PA / 1e-3 - 1
    b = 1 - np.abs(PB) / 1e-6
    return np.minimum(a, b), {"P_A>=1e-3": a, "|P_B|<=1e-6": b, "P_A+P_B>0": 1 + PB / PA}


def _eval_ma_mb(alpha, xs, ys):
    x = _nudge_x(xs)[None, :]
    MA = np.empty((len(xs), len(ys)))
    MB = np.empty_like(MA)
    N = _outer_count(PI * alpha * ys.min(), 1e-22) + 2
    n = np.arange(1, N + 1, dtype=float)[:, None]
    for j, y in enumerate(ys):
        X = y / alpha
        den = _th(X, x, (0, 1))
        r1 = _th(X, n * x, (0, 1)) / den
        r2 = _th(X, n * x, (1, 1)) / den
        r3 = _th(X, n * x, (2, 1)) / den
        t = ((alpha ** 2 * n ** 5 * PI ** 2 * y * y - PI * alpha * y * n ** 3 - n / 4) * r1
             - 2 * X * n * r2 - X * X * n * r3) * np.exp(-PI * alpha * y * (n * n - 1))
        MA[:, j] = t[:2].sum(axis=0)
        MB[:, j] = t[2:].sum(axis=0)
    a = MA / 0.1 - 1
    b = 1 - np.abs(MB) / 2e-5
    return np.minimum(a, b), {"M_A>=1e-1": a, "|M_B|<=2e-5": b, "M_A+M_B>0": 1 + MB / MA}


def _eval_rn(alpha, xs, ys):
    ok = ys >= 2 * alpha - 1e-12
    m = np.full(len(ys), np.nan)
    if ok.any():
        y = ys[ok]
        n = np.arange(0, 6, dtype=float)[:, None]
        r = R_n(alpha, y[None, :], n) / (alpha ** 2 * _th(y / alpha, 0.0))
        m[ok] = r.min(axis=0)
    return m[None, :], {}


def _profile_column(alpha, ys, mask, fn):
    out: Dict[str, np.ndarray] = {}
    main = np.full(len(ys), np.nan)
    for j, y in enumerate(ys):
        if not mask[j]:
            continue
        val, comps = fn(alpha, float(y))
        main[j] = val
        for k, v in comps.items():
            out.setdefault(k, np.full(len(ys), np.nan))[j] = v
    return main[None, :], {k: v[None, :] for k, v in out.items()}


def _xratio_node(alpha, y):
    # X_b / X_a is invariant under y -> 1/y, so its slope vanishes at y = 1
    p = gamma_a_profile(alpha, y)
    return _flat_slope_margin((p.Xa, p.dXa, p.ddXa, p.dddXa), (p.Xb, p.dXb, p.ddXb, p.dddXb), y, 1.0), {}


def _eval_xratio(alpha, xs, ys):
    return _profile_column(alpha, ys, ys <= 2 * alpha + 1e-12, _xratio_node)


def _eps_I_node(alpha, y):
    p = gamma_a_profile(alpha, y)
    major = p.dBa * p.Aa - p.dAa * p.Ba
    eps = (p.dBa * p.Ae + p.dBe * p.Aa + p.dBe * p.Ae) - (p.Ba * p.dAe + p.Be * p.dAa + p.Be * p.dAe)
    return 1 - abs(eps / major) / 0.5, {}


def _eval_eps_I(alpha, xs, ys):
    mask = (ys >= 1.1 * alpha - 1e-12) & (ys <= 2 * alpha + 1e-12)
    return _profile_column(alpha, ys, mask, _eps_I_node)


def _eps_II_node(alpha, y):
    p = gamma_a_profile(alpha, y)
    if abs(y - 1) < 1e-12:
        # both Wronskians vanish at y = 1 (y -> 1/y symmetry); take the ratio of their slopes
        den = p.dddXb * p.dXa - p.dddXa * p.dXb
        major = p.dddBa * p.dAa - p.dddAa * p.dBa
        eps = den - major
    else:
        den = p.ddXb * p.dXa - p.ddXa * p.dXb
        major = p.ddBa * p.dAa - p.ddAa * p.dBa
        eps = (p.ddBa * p.dAe + p.ddBe * p.dAa + p.ddBe * p.dAe) \
            - (p.dBa * p.ddAe + p.dBe * p.ddAa + p.dBe * p.ddAe)
    return 1 - abs(eps / den) / 0.5, {"vs_major_term": 1 - abs(eps / major) / 0.5}


def _eval_eps_II(alpha, xs, ys):
    return _profile_column(alpha, ys, ys <= 1.1 * alpha + 1e-12, _eps_II_node)


def _eval_ab(alpha, xs, ys):
    A, B, C, D = endpoint_constants(alpha)
    # with B, B + D > 0 the claim is B C <= A D
    rel = (A * D - B * C) / (abs(A * D) + abs(B * C))
    comps = {"B>0": np.sign(B), "D>0": np.sign(D), "A/B>1": A / B - 1, "C/D<1": 1 - C / D}
    return np.array([[rel]]), {k: np.array([[v]]) for k, v in comps.items()}


def _ya_node(alpha, y):
    p = gamma_c_profile(alpha, y)
    w = (y - 0.5) * (SQ3_2 - y)
    if abs(y - 0.5) < 1e-12:
        return p.dYa / (SQ3_2 - 0.5), {}
    if abs(y - SQ3_2) < 1e-12:
        return -p.dYa / (SQ3_2 - 0.5), {}
    return p.Ya / w, {}


def _eval_ya(alpha, xs, ys):
    return _profile_column(alpha, ys, np.ones(len(ys), bool), _ya_node)


def _yfloor_node(alpha, y):
    p = gamma_c_profile(alpha, y)
    r, _ = _zero_ratio(p.Ya, p.Yb, p.dYa, p.dYb, p.ddYa, p.ddYb, _at_endpoint(y))
    P = p.Papprox
    scale = 1.1
    return PI * alpha / 2 * r / scale - 1, {
        "ratio>=P-1/20": (r - (P - 0.05)) / scale,
        "ratio<=P": (P - r) / scale,
        "(pi alpha/2)(P-1/20)>11/10": PI * alpha / 2 * (P - 0.05) / scale - 1,
    }


def _eval_yfloor(alpha, xs, ys):
    return _profile_column(alpha, ys, np.ones(len(ys), bool), _yfloor_node)


def _ymono_y(alpha, y):
    p = gamma_c_profile(alpha, y)
    F = (p.Ya, p.dYa, p.ddYa, p.dddYa)
    G = (p.Yb, p.dYb, p.ddYb, p.dddYb)
    if abs(y - SQ3_2) < 1e-12:
        r, s = _zero_ratio(F[0], G[0], F[1], G[1], F[2], G[2], True)
        return -s / (abs(r) * math.log(2 * y))
    # Y_b / Y_a is invariant under y -> 1/(4y), so its slope vanishes at y = 1/2
    return _flat_slope_margin(F, G, y, 0.5)


def _ymono_node(alpha, y, h=1e-5):
    # at alpha = 1, M = theta / (2 pi) makes Y_b / Y_a constant; divide out alpha - 1
    if abs(alpha - 1) < 1e-12:
        return (_ymono_y(1 + h, y) - _ymono_y(1 - h, y)) / (2 * h), {}
    return _ymono_y(alpha, y) / (alpha - 1), {}


def _eval_ymono(alpha, xs, ys):
    return _profile_column(alpha, ys, np.ones(len(ys), bool), _ymono_node)


# ------------------------------------------------------------- catalogue

@dataclass(frozen=True)
class Entry:
    lemma_id: str
    claim: str
    claimed_bound: float
    region: Dict[str, Tuple[float, float]]
    default_grid: GridSpec
    evaluate: Optional[Evaluator]
    truncation: str = ""


INF = math.inf

CATALOGUE: Dict[str, Entry] = {e.lemma_id: e for e in [
    Entry("L_positive", "L(alpha, x, y) > 0, margin L / (2 pi y alpha^2)", 0.0,
          {"alpha": (ALPHA_MAIN, INF), "x": (-INF, INF), "y": (SQ3_2, INF)},
          GridSpec(span(ALPHA_MAIN, 2.0), span(0, 0.5), span(SQ3_2, 3.0)), _eval_L,
          "alpha <= 2, y <= 3; x in [0, 1/2] by parity and periodicity; "
          "beyond y = 3 the n >= 2 terms are below 1e-12 relative"),
    Entry("main_term_gamma", "2 pi y alpha^2 - alpha - 2y theta_XY/(-theta_Y) > 0 on |z| >= 1", 0.0,
          {"alpha": (ALPHA_MAIN, INF), "x": (0.0, 0.5), "y": (SQ3_2, INF)},
          GridSpec(span(ALPHA_MAIN, 2.0), span(0, 0.5), span(SQ3_2, 3.0)), _eval_main,
          "alpha <= 2, y <= 3"),
    Entry("eps1_bound", "eps_1(y/alpha) <= 13 e^{-3 pi^2/4}", EPS1_BOUND,
          {"alpha": (0.0, INF), "y": (1.0, INF)},
          GridSpec(span(1.0, 4.0), (0.0, 0.0, 1), span(1.0, 6.0)), _eval_eps1,
          "eps_1 is decreasing in y/alpha; nodes with y/alpha < pi/4 are masked"),
    Entry("P_major", "P_0 + 2 P_1 > 0.1", 0.1,
          {"alpha": (ALPHA_LEMMA4, 1.0), "x": (-INF, INF), "y": (2.0, INF)},
          GridSpec(span(ALPHA_LEMMA4, 1.0, minimum=11), span(0, 0.5), span(2.0, 12.0)), _eval_p_major,
          "y <= 12: beyond it P_0 + 2 P_1 differs from alpha^2/4 by < 1e-12"),
    Entry("P_error", "sum_{n>=2} 2|P_n| <= 4e-7 (the n = 2 term is absent from the stated split)", 4e-7,
          {"alpha": (ALPHA_LEMMA4, 1.0), "x": (-INF, INF), "y": (2.0, INF)},
          GridSpec(span(ALPHA_LEMMA4, 1.0, minimum=11), span(0, 0.5), span(2.0, 6.0)), _eval_p_error,
          "y <= 6: the sum decays like y^2 e^{-4 pi alpha y}"),
    Entry("PA_PB", "P_A >= 1e-3 and |P_B| <= 1e-6", 1e-3,
          {"alpha": (ALPHA_LEMMA4, 1.0), "x": (0.0, 0.5), "y": (SQ3_2, 2.0)},
          GridSpec((ALPHA_LEMMA4, 1.0, 101), (0.0, 0.5, 51), (SQ3_2, 2.0, 113)), _eval_pa_pb),
    Entry("MA_MB", "M_A >= 1e-1 and |M_B| <= 2e-5", 0.1,
          {"alpha": (ALPHA_LEMMA4, 1.0), "x": (0.0, 0.5), "y": (SQ3_2, 1.05)},
          GridSpec(span(ALPHA_LEMMA4, 1.0, minimum=11), span(0, 0.5), span(SQ3_2, 1.05)), _eval_ma_mb,
          "x in Z/2 is sampled 1e-7 inside (removable singularity)"),
    Entry("Rn_positive", "R_n(alpha, y) > 0 for n = 0..5 (larger |n| dominated by n^4 term)", 0.0,
          {"alpha": (1.01, INF), "y": (0.0, INF)},
          GridSpec(span(1.01, 4.0, 0.05), (0.0, 0.0, 1), span(2.02, 12.0)), _eval_rn,
          "alpha <= 4, y <= 12; nodes with y < 2 alpha are masked"),
    Entry("Xratio_monotone", "d/dy (X_b / X_a) <= 0 on [1, 2 alpha]", 0.0,
          {"alpha": (1.01, INF), "y": (1.0, INF)},
          GridSpec(span(1.01, 3.0, 0.05), (0.0, 0.0, 1), span(1.0, 6.0)), _eval_xratio,
          "alpha <= 3; y = 1 uses the limit at the common zero of X_a, X_b"),
    Entry("eps_I", "|eps_I / (B_a' A_a - A_a' B_a)| <= 1/2 on [1.1 alpha, 2 alpha]", 0.5,
          {"alpha": (1.01, INF), "y": (1.0, INF)},
          GridSpec(span(1.01, 3.0, 0.05), (0.0, 0.0, 1), span(1.1, 6.0)), _eval_eps_I, "alpha <= 3"),
    Entry("eps_II", "|eps_II / (X_b'' X_a' - X_a'' X_b')| <= 1/2 on [1, 1.1 alpha]", 0.5,
          {"alpha": (1.01, INF), "y": (1.0, INF)},
          GridSpec(span(1.01, 3.0, 0.05), (0.0, 0.0, 1), span(1.0, 3.3)), _eval_eps_II, "alpha <= 3"),
    Entry("AB_bound", "(A + C)/(B + D) <= A/B", 0.0,
          {"alpha": (1.0, INF)},
          GridSpec(span(1.0, 5.0)), _eval_ab, "alpha <= 5"),
    Entry("Ya_nonneg", "Y_a >= 0 on [1/2, sqrt3/2], margin Y_a / ((y - 1/2)(sqrt3/2 - y))", 0.0,
          {"alpha": (0.0, INF), "y": (0.5, SQ3_2)},
          GridSpec(span(0.5, 4.0, 0.1), (0.0, 0.0, 1), span(0.5, SQ3_2, 0.004)), _eval_ya,
          "0.5 <= alpha <= 4; endpoints use the derivative limit"),
    Entry("Yratio_floor", "(pi alpha / 2) Y_b / Y_a >= 11/10", 1.1,
          {"alpha": (1.2, INF), "y": (0.5, SQ3_2)},
          GridSpec(span(1.2, 4.0, 0.05), (0.0, 0.0, 1), span(0.5, SQ3_2, 0.004)), _eval_yfloor,
          "alpha <= 4 (the ratio grows with alpha); endpoints use Y_b'/Y_a'"),
    Entry("Yratio_monotone", "d/dy (Y_b / Y_a) <= 0", 0.0,
          {"alpha": (1.0, 1.2), "y": (0.5, SQ3_2)},
          GridSpec(span(1.0, 1.2, 0.01), (0.0, 0.0, 1), span(0.5, SQ3_2, 0.004)), _eval_ymono,
          "endpoints use the limit at the common zero of Y_a, Y_b"),
    Entry("quotient_bounds", "theta quotient envelopes, k = 1..5; x axis is X, y axis is Y", 0.0,
          {"x": (0.0, INF), "y": (-INF, INF)},
          GridSpec((0.0, 0.0, 1), (0.05, 3.0, 119), (0.0, 0.5, 501)), None,
          "X <= 3; Y in [0, 1/2] covers all Y by parity and periodicity"),
]}

LEMMA_IDS = tuple(CATALOGUE)


def _check_region(entry: Entry, grid: GridSpec):
    for axis, rng in zip(("alpha", "x", "y"), (grid.alpha_range, grid.x_range, grid.y_range)):
        if axis not in entry.region:
            continue
        lo, hi = entry.region[axis]
        if rng[0] < lo - 1e-12 or rng[1] > hi + 1e-12:
            raise HypothesisRegionError(
                f"{entry.lemma_id}: {axis} range [{rng[0]}, {rng[1]}] leaves the stated region [{lo}, {hi}]")


def _audit_quotients(entry: Entry, grid: GridSpec) -> AuditReport:
    _, Xs, Ys = grid.axes()
    worst = (math.inf, {})
    comps: Dict[str, float] = {}
    nodes = 0
    for kind, (_, _, ok, _) in QUOTIENT_KINDS.items():
        ks = (1,) if kind in ("L2b_3", "L2c_1") else range(1, 6)
        best = math.inf
        for X in Xs:
            if not ok(float(X)):
                continue
            for k in ks:
                q = quotient_bound_check(kind, float(X), k, Ys)
                # the envelopes are sharp as Y -> 0; rounding-level ties count as equality
                m = (q.bound * (1 + ULP_SLACK) - q.worst_quotient) / q.bound
                nodes += len(Ys)
                if m < best:
                    best = m
                if m < worst[0]:
                    worst = (m, {"X": float(X), "Y": q.worst_Y, "k": float(k)})
        comps[kind] = best
    if nodes == 0:
        raise HypothesisRegionError("quotient_bounds: no X node lies in any envelope's range")
    m, pt = worst
    return AuditReport(entry.lemma_id, grid, m, pt, entry.claimed_bound, m > 0, entry.claim,
                       comps, nodes, entry.truncation)


def audit(lemma_id: str, grid: Optional[GridSpec] = None) -> AuditReport:
    if lemma_id not in CATALOGUE:
        raise KeyError(f"unknown lemma id {lemma_id!r}; known: {', '.join(LEMMA_IDS)}")
    entry = CATALOGUE[lemma_id]
    grid = grid or entry.default_grid
    _check_region(entry, grid)
    if entry.evaluate is None:
        return _audit_quotients(entry, grid)
    alphas, xs, ys = grid.axes()
    with ThreadPoolExecutor(max_workers=_threads()) as ex:
        cols = list(ex.map(lambda a: entry.evaluate(float(a), xs, ys), alphas))
    margin = np.stack([np.broadcast_to(c[0], (len(xs), len(ys))) for c in cols])
    if np.all(np.isnan(margin)):
        raise HypothesisRegionError(f"{lemma_id}: every grid node violates the coupled constraints")
    i, j, k = np.unravel_index(np.nanargmin(margin), margin.shape)
    comps = {}
    for name in cols[0][1]:
        arr = np.stack([np.broadcast_to(c[1][name], (len(xs), len(ys))) for c in cols])
        comps[name] = float(np.nanmin(arr))
    worst = {"alpha": float(alphas[i])}
    if grid.x_range[2] > 1:
        worst["x"] = float(xs[j])
    if grid.y_range[2] > 1:
        worst["y"] = float(ys[k])
    m = float(margin[i, j, k])
    return AuditReport(lemma_id, grid, m, worst, entry.claimed_bound, m > 0, entry.claim, comps,
                       int(np.count_nonzero(~np.isnan(margin))), entry.truncation)


def audit_all(ids=None) -> list:
    return [audit(i) for i in (ids or LEMMA_IDS)]
