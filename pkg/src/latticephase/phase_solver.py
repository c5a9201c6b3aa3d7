"""Minimizers of lattice energies over shapes and the transition thresholds.

Two minimization routes: ``TheoryGuided`` compares the two boundary curves of
the fundamental domain (the imaginary axis above i and the unit arc), and
``FullScan`` grids the whole truncated fundamental domain with no structural
assumption.  They are meant to cross-check each other.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .halfplane import HEXAGONAL, SQUARE, HalfPlanePoint, reduce_to_fundamental
from .lattice_energy import (
    PI,
    M_SPEC,
    PotentialSpec,
    axis_to_arc,
    energy,
    energy_dx_expansion,
    grid_energy,
    w_derivative,
    w_sum,
)

SNAP_TOL = 1e-6
TIE_TOL = 1e-10
Y0_DEFAULT = 2.0  # height used by the minimum-principle argument; kept as a config default


class BracketError(RuntimeError):
    """No sign change where one was expected.  ``table`` holds the scanned (alpha, value) pairs."""

    def __init__(self, msg: str, table: Sequence[tuple] = ()):
        super().__init__(msg)
        self.table = list(table)


class PhaseKind(str, Enum):
    RECTANGULAR = "Rectangular"
    SQUARE = "Square"
    HEXAGONAL = "Hexagonal"
    INTERIOR = "Interior"


@dataclass(frozen=True)
class PhaseLabel:
    kind: PhaseKind
    point: HalfPlanePoint

    @property
    def y(self) -> Optional[float]:
        return self.point.y if self.kind is PhaseKind.RECTANGULAR else None

    def __str__(self) -> str:
        return self.kind.value


def classify(p: HalfPlanePoint, snap: float = SNAP_TOL) -> PhaseLabel:
    if p.distance(SQUARE) <= snap:
        return PhaseLabel(PhaseKind.SQUARE, SQUARE)
    if p.distance(HEXAGONAL) <= snap:
        return PhaseLabel(PhaseKind.HEXAGONAL, HEXAGONAL)
    if abs(p.x) <= snap and p.y > 1:
        return PhaseLabel(PhaseKind.RECTANGULAR, HalfPlanePoint(0.0, p.y))
    return PhaseLabel(PhaseKind.INTERIOR, p)


class Mode(str, Enum):
    GUIDED = "TheoryGuided"
    FULL = "FullScan"

    @classmethod
    def parse(cls, text) -> "Mode":
        if isinstance(text, Mode):
            return text
        t = str(text).lower()
        if t in ("guided", "theoryguided"):
            return cls.GUIDED
        if t in ("full", "fullscan"):
            return cls.FULL
        raise ValueError(f"unknown mode {text!r}")


class MinimizeResult(NamedTuple):
    label: PhaseLabel
    point: HalfPlanePoint
    value: float
    co_minimizers: tuple = ()
    y_max_hit: bool = False
    x_resolved: bool = True


@dataclass(frozen=True)
class ThresholdReport:
    name: str
    value: float
    residual: float
    bracket: tuple
    iterations: int
    residual_form: str
    trace: tuple = ()
    cross_check: Optional[float] = None
    notes: str = ""

    def __post_init__(self):
        lo, hi = self.bracket
        if not lo < self.value < hi:
            raise ValueError(f"{self.name}={self.value} outside bracket {self.bracket}")


@dataclass(frozen=True)
class PhaseDiagramRow:
    alpha: float
    label: PhaseLabel
    minimizer: HalfPlanePoint
    energy: float
    co_minimizers: tuple = field(default=())


def _E(spec: PotentialSpec, alpha: float, z) -> float:
    return energy(spec, alpha, z).value


def _dE(spec: PotentialSpec, alpha: float, z, dx: int, dy: int) -> float:
    d = w_derivative(spec.k, alpha, z, dx, dy)
    if spec.gamma:
        d += spec.gamma * w_derivative(0, alpha, z, dx, dy)
    return d


# ------------------------------------------------------------ 1D boundary scans

def _scan_min(f: Callable[[float], float], lo: float, hi: float, step: float, snap: float = SNAP_TOL):
    ys = np.linspace(lo, hi, max(3, int(round((hi - lo) / step)) + 1))
    vals = np.array([f(v) for v in ys])
    i = int(np.argmin(vals))
    a, b = ys[max(i - 1, 0)], ys[min(i + 1, len(ys) - 1)]
    res = minimize_scalar(f, bounds=(a, b), method="bounded", options={"xatol": 1e-10})
    y, v = float(res.x), float(res.fun)
    # endpoints stay exact; bounded Brent never evaluates them
    for e, fe in ((lo, vals[0]), (hi, vals[-1])):
        if fe <= v or abs(y - e) <= snap:
            y, v = e, float(fe)
    return y, v


class GammaAResult(NamedTuple):
    y_star: float
    value: float
    y_max_hit: bool


def minimize_gamma_a(spec: PotentialSpec, alpha: float, y_max: float = 4.0, step: float = 0.01) -> GammaAResult:
    """Minimum of y -> E(alpha, iy) on [1, y_max]; flags a minimum sitting at y_max."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if y_max < 2:
        raise ValueError("y_max must be >= 2")
    y, v = _scan_min(lambda t: _E(spec, alpha, (0.0, t)), 1.0, y_max, step)
    if y > 1 and abs(y - 1) > SNAP_TOL:
        y = _polish_line(spec, alpha, 0.0, y)
        v = _E(spec, alpha, (0.0, y))
    return GammaAResult(y, v, y >= y_max - step)


def minimize_gamma_b(spec: PotentialSpec, alpha: float, step: float = 0.005) -> tuple[HalfPlanePoint, float]:
    """Minimum over the arc between i and e^{i pi/3}, computed on the equivalent
    segment 1/2 + iy, y in [1/2, sqrt(3)/2], and mapped back to the arc."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    y, v = _scan_min(lambda t: _E(spec, alpha, (0.5, t)), 0.5, math.sqrt(3) / 2, step)
    if y == 0.5:
        return SQUARE, v
    if y == math.sqrt(3) / 2:
        return HEXAGONAL, v
    return axis_to_arc(y), v


# ----------------------------------------------------------- global minimizer

def _threads() -> int:
    try:
        n = int(os.environ.get("LATTICEPHASE_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else min(4, os.cpu_count() or 1)


def _grid_argmin(spec, alpha, y_max, dx=0.01):
    xs = np.arange(0.0, 0.5 + dx / 2, dx)
    ys = np.arange(math.sqrt(3) / 2, y_max + dx / 2, dx)
    X, Y = np.meshgrid(xs, ys)
    inside = X * X + Y * Y >= 1 - 1e-12
    # the arc itself is sampled exactly
    arc_x = xs
    arc_y = np.sqrt(1 - arc_x ** 2)
    Xs = np.concatenate([X[inside], arc_x])
    Ys = np.concatenate([Y[inside], arc_y])
    vals = grid_energy(spec, alpha, Xs, Ys)
    i = int(np.argmin(vals))
    return float(Xs[i]), float(Ys[i]), float(vals[i])


def _coordinate_descent(f, x, y, step=0.01, min_step=1e-8):
    fx = f(x, y)
    while step >= min_step:
        moved = False
        for ddx, ddy in ((step, 0), (-step, 0), (0, step), (0, -step)):
            nx, ny = x + ddx, y + ddy
            if ny <= 0:
                continue
            fn = f(nx, ny)
            if fn < fx:
                x, y, fx, moved = nx, ny, fn, True
                break
        if not moved:
            step /= 2
    return x, y, fx


def _newton_polish(spec, alpha, x, y, max_move=1e-4):
    """Gradient-based finish; value-based descent stalls at ~1e-8 on flat minima."""
    x0, y0 = x, y
    for _ in range(6):
        gx = _dE(spec, alpha, (x, y), 1, 0)
        gy = _dE(spec, alpha, (x, y), 0, 1)
        hxx = _dE(spec, alpha, (x, y), 2, 0)
        hyy = _dE(spec, alpha, (x, y), 0, 2)
        hxy = _dE(spec, alpha, (x, y), 1, 1)
        det = hxx * hyy - hxy * hxy
        if not (det > 0 and hxx > 0):
            break
        sx = (hyy * gx - hxy * gy) / det
        sy = (hxx * gy - hxy * gx) / det
        nx, ny = x - sx, y - sy
        if math.hypot(nx - x0, ny - y0) > max_move:
            break
        x, y = nx, ny
        if math.hypot(sx, sy) < 1e-15:
            break
    return x, y


def _full_scan(spec, alpha, y_max):
    hit = False
    while True:
        gx, gy, _ = _grid_argmin(spec, alpha, y_max)
        if gy < y_max - 0.02:
            break
        hit = True
        y_max *= 2
        if y_max > 256:
            raise BracketError(f"minimizer escapes to y > 256 at alpha={alpha}")
    f = lambda x, y: _E(spec, alpha, (x, y))
    x, y, _ = _coordinate_descent(f, gx, gy)
    x, y = _newton_polish(spec, alpha, x, y)
    p, _ = reduce_to_fundamental(HalfPlanePoint(x, y))
    label = classify(p)
    resolved = True
    if label.kind is PhaseKind.INTERIOR and _x_flat(spec, alpha, p):
        p, resolved = _settle_flat_x(spec, alpha, p)
        label = classify(p)
    point = label.point if label.kind is not PhaseKind.INTERIOR else p
    value = _E(spec, alpha, point)
    co = _ties(spec, alpha, point, value)
    return MinimizeResult(label, point, value, co, hit, resolved)


def _x_flat(spec, alpha, p, rel=1e-13):
    """True when E(., y) is constant in x to rounding, so values cannot locate x."""
    e = _E(spec, alpha, p)
    return all(abs(_E(spec, alpha, (xx, p.y)) - e) <= rel * abs(e) for xx in (0.0, 0.5))


def _settle_flat_x(spec, alpha, p):
    """Decide x from the sign of dE/dx (theta expansion, relative precision).

    Returns the settled point and whether the decision was possible.
    """
    if spec.k == 2:
        return p, False
    signs = {np.sign(energy_dx_expansion(spec, alpha, xx, p.y)) for xx in (0.05, 0.15, 0.25, 0.35, 0.45)}
    if signs == {1.0}:
        x = 0.0
    elif signs == {-1.0}:
        x = 0.5
    else:
        return p, False
    y = _polish_line(spec, alpha, x, p.y)
    return HalfPlanePoint(x, y), True


def _polish_line(spec, alpha, x, y):
    """Newton on dE/dy along a vertical line (derivatives by direct summation)."""
    for _ in range(8):
        g = _dE(spec, alpha, (x, y), 0, 1)
        h = _dE(spec, alpha, (x, y), 0, 2)
        if h <= 0:
            break
        dy = g / h
        if abs(dy) > 1e-3:
            break
        y -= dy
        if abs(dy) < 1e-14 * y:
            break
    return y


def _ties(spec, alpha, point, value):
    """Other corner shapes whose energy matches the minimum to TIE_TOL."""
    co = []
    for c in (SQUARE, HEXAGONAL):
        if c.distance(point) > SNAP_TOL and abs(_E(spec, alpha, c) - value) <= TIE_TOL * max(1.0, abs(value)):
            co.append(c)
    return tuple(co)


def _guided(spec, alpha, y_max):
    if spec != M_SPEC:
        raise ValueError("TheoryGuided mode only applies to the M energy; use FullScan")
    if alpha > 1:
        return MinimizeResult(PhaseLabel(PhaseKind.HEXAGONAL, HEXAGONAL), HEXAGONAL, _E(spec, alpha, HEXAGONAL))
    hit = False
    while True:
        ra = minimize_gamma_a(spec, alpha, y_max)
        if not ra.y_max_hit:
            break
        hit = True
        y_max *= 2
        if y_max > 256:
            raise BracketError(f"axis minimizer escapes to y > 256 at alpha={alpha}")
    pb, vb = minimize_gamma_b(spec, alpha)
    pa = HalfPlanePoint(0.0, ra.y_star)
    if ra.value <= vb:
        point, value, other, ov = pa, ra.value, pb, vb
    else:
        point, value, other, ov = pb, vb, pa, ra.value
    co = ()
    if other.distance(point) > SNAP_TOL and abs(ov - value) <= TIE_TOL * max(1.0, abs(value)):
        co = (other,)
    label = classify(point)
    return MinimizeResult(label, label.point if label.kind is not PhaseKind.INTERIOR else point, value, co, hit)


def global_minimize(spec: PotentialSpec, alpha: float, mode=Mode.GUIDED, y_max: float = 4.0) -> MinimizeResult:
    """Minimizer of ``spec`` over lattice shapes, reported in the fundamental domain."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if y_max < 2:
        raise ValueError("y_max must be >= 2")
    mode = Mode.parse(mode)
    if mode is Mode.GUIDED:
        return _guided(spec, alpha, y_max)
    return _full_scan(spec, alpha, y_max)


def phase_diagram(spec: PotentialSpec, alphas: Sequence[float], mode=None, y_max: float = 4.0) -> list:
    """One row per alpha, in input order.  Default mode: guided for M, full scan otherwise."""
    if any(not a > 0 for a in alphas):
        raise ValueError("all alphas must be positive")
    if mode is None:
        mode = Mode.GUIDED if spec == M_SPEC else Mode.FULL

    def row(a):
        r = global_minimize(spec, a, mode, y_max)
        return PhaseDiagramRow(float(a), r.label, r.point, r.value, r.co_minimizers)

    with ThreadPoolExecutor(max_workers=_threads()) as ex:
        return list(ex.map(row, alphas))


# ------------------------------------------------------------- root finders

def _bisect_secant(g, lo, hi, width=1e-6, resid=1e-12, max_iter=200):
    """Bisection to ``width`` then secant refinement; returns (root, residual, iterations, trace)."""
    glo, ghi = g(lo), g(hi)
    trace = [(lo, glo), (hi, ghi)]
    if glo == 0:
        return lo, 0.0, 0, trace
    if ghi == 0:
        return hi, 0.0, 0, trace
    if np.sign(glo) == np.sign(ghi):
        raise BracketError(f"no sign change on [{lo}, {hi}]", trace)
    it = 0
    a, b, ga, gb = lo, hi, glo, ghi
    while b - a > width and it < max_iter:
        c = 0.5 * (a + b)
        gc = g(c)
        trace.append((c, gc))
        it += 1
        if gc == 0:
            return c, 0.0, it, trace
        if np.sign(gc) == np.sign(ga):
            a, ga = c, gc
        else:
            b, gb = c, gc
    x0, x1, g0, g1 = a, b, ga, gb
    best = (x0, g0) if abs(g0) < abs(g1) else (x1, g1)
    for _ in range(30):
        if g1 == g0:
            break
        x2 = x1 - g1 * (x1 - x0) / (g1 - g0)
        if not a - width <= x2 <= b + width:
            break
        g2 = g(x2)
        it += 1
        trace.append((x2, g2))
        if abs(g2) < abs(best[1]):
            best = (x2, g2)
        if abs(g2) < resid or x2 == x1:
            break
        x0, g0, x1, g1 = x1, g1, x2, g2
    return best[0], abs(best[1]), it, trace


def _energy_gap(spec: PotentialSpec):
    return lambda a: _E(spec, a, SQUARE) - _E(spec, a, HEXAGONAL)


def _half_axis_gap(beta: float) -> float:
    """(theta - pi beta M) at 1/2 + i/2 minus the same at the hexagonal point."""
    def d(z):
        return w_sum(0, beta, z).value - PI * beta * w_sum(1, beta, z).value
    return d((0.5, 0.5)) - d(HEXAGONAL)


@lru_cache(maxsize=None)
def solve_alpha_b() -> ThresholdReport:
    """Root of M(alpha, i) = M(alpha, e^{i pi/3}) on [5/6, 1]."""
    br = (5 / 6, 1.0)
    x, r, it, tr = _bisect_secant(_energy_gap(M_SPEC), *br)
    beta, _, _, _ = _bisect_secant(_half_axis_gap, 1.0, 1.2)
    if abs(1 / x - beta) > 1e-7:
        raise BracketError(f"reciprocal cross-check failed: 1/alpha_b={1 / x}, half-axis root={beta}")
    return ThresholdReport("alpha_b", x, r, br, it, "ValueMatch", tuple(tr), beta)


def second_y_derivatives_at_i(beta: float) -> tuple[float, float]:
    """(theta_yy, M_yy) at z = i by direct summation."""
    return w_derivative(0, beta, SQUARE, 0, 2), w_derivative(1, beta, SQUARE, 0, 2)


def _h_second_deriv(beta: float) -> float:
    tyy, myy = second_y_derivatives_at_i(beta)
    return tyy - PI * beta * myy


def series_ratio_residual(beta: float, radius: int = 12) -> float:
    """(2/(pi b)) sum(2m^2 - pi b (n^2-m^2)^2) e / sum(n^4 + 3m^4 - pi b (n^4-m^4)(n^2-m^2)) e - 1."""
    r = np.arange(-radius, radius + 1, dtype=float)
    n, m = np.meshgrid(r, r, indexing="ij")
    E = np.exp(-PI * beta * (n * n + m * m))
    num = np.sum((2 * m * m - PI * beta * (n * n - m * m) ** 2) * E)
    den = np.sum((n ** 4 + 3 * m ** 4 - PI * beta * (n ** 4 - m ** 4) * (n * n - m * m)) * E)
    return 2 / (PI * beta) * num / den - 1


@lru_cache(maxsize=None)
def solve_alpha_a() -> ThresholdReport:
    """alpha_a = 1/beta with theta_yy(beta, i) = pi beta M_yy(beta, i), beta in [1, 9/8]."""
    br = (1.0, 9 / 8)
    beta, r, it, tr = _bisect_secant(_h_second_deriv, *br)
    beta2, _, _, _ = _bisect_secant(series_ratio_residual, *br)
    if abs(beta - beta2) > 1e-9:
        raise BracketError(f"second-derivative root {beta} and series-ratio root {beta2} disagree")
    a = 1 / beta
    return ThresholdReport("alpha_a", a, r, (1 / br[1], 1 / br[0]), it, "SecondDerivMatch", tuple(tr), beta2,
                           notes=f"beta={beta!r}")


def y_alpha(alpha: float, cap: float = 1e4) -> float:
    """The minimizing y > 1 of M(alpha, iy) for alpha below alpha_a (bisection on dM/dy)."""
    aa = solve_alpha_a().value
    if not 0 < alpha < aa:
        raise ValueError(f"y_alpha needs 0 < alpha < alpha_a = {aa}")
    g = lambda y: w_derivative(1, alpha, (0.0, y), 0, 1)
    lo = None
    for d in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7):
        if g(1 + d) < 0:
            lo = 1 + d
            break
    if lo is None:
        raise BracketError(f"dM/dy not negative just above y=1 at alpha={alpha}")
    hi = 4.0
    while g(hi) <= 0:
        lo, hi = hi, hi * 2
        if hi > cap:
            raise BracketError(f"no sign change of dM/dy below y={cap} at alpha={alpha}")
    y, _, _, _ = _bisect_secant(g, lo, hi, width=1e-10, resid=1e-15)
    return y


# ------------------------------------------------------- gamma family

def _scan_bracket(g, grid):
    table = [(float(a), float(g(a))) for a in grid]
    for (a0, g0), (a1, g1) in zip(table, table[1:]):
        if g0 * g1 < 0:
            return (a0, a1), table
    raise BracketError("no sign change on the scanned alpha grid", table)


class GammaThresholds(NamedTuple):
    alpha_g1: ThresholdReport
    alpha_g2: ThresholdReport


def thresholds_for_gamma(gamma: float) -> GammaThresholds:
    """Transition values for the weight (r + gamma) e^{-pi alpha r}.

    alpha_g2 equates the energies at i and e^{i pi/3}.  alpha_g1 is where the
    square stops being stable along the rectangular axis: E_yy(alpha, i) = 0,
    which for gamma = 0 is the alpha_a criterion (via the duality).
    """
    if not (math.isfinite(gamma) and gamma >= 0):
        raise ValueError("gamma must be finite and >= 0")
    spec = PotentialSpec(1, float(gamma))
    # below ~0.2 both energy gaps are exponentially small and drown in rounding
    grid = np.round(np.arange(0.2, 1.0 + 1e-9, 0.025), 6)
    g2 = _energy_gap(spec)
    g1 = lambda a: _dE(spec, a, SQUARE, 0, 2)
    br2, _ = _scan_bracket(g2, grid)
    br1, _ = _scan_bracket(g1, grid)
    x2, r2, it2, tr2 = _bisect_secant(g2, *br2)
    x1, r1, it1, tr1 = _bisect_secant(g1, *br1)
    note = "stability criterion E_yy(alpha, i) = 0 generalizes the gamma = 0 definition"
    a1 = ThresholdReport("alpha_gamma1", x1, r1, br1, it1, "SecondDerivMatch", tuple(tr1), notes=note)
    a2 = ThresholdReport("alpha_gamma2", x2, r2, br2, it2, "ValueMatch", tuple(tr2))
    if not x1 < x2:
        raise BracketError(f"expected alpha_g1 < alpha_g2, got {x1} >= {x2}")
    return GammaThresholds(a1, a2)
