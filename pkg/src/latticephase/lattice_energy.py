"""Lattice sums over unit-density lattices and their analytic expansions.

For z = x + iy and (m, n) in Z^2 write Q = |mz + n|^2 / y = m^2 y + (mx + n)^2 / y.
The energies are

    W_k(alpha, z) = sum Q^k exp(-pi alpha Q),    k = 0, 1, 2,

so W_0 is the lattice theta function and W_1 = M.  Two independent evaluation
routes are provided: a certified direct box sum, and the reduction to a single
sum of one-dimensional theta functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.special import gamma as _gamma, gammaincc

from .halfplane import HalfPlanePoint, PointLike, as_point
from .jacobi_theta import (
    DEFAULT_BUDGET,
    BudgetExhausted,
    SeriesValue,
    TruncationBudget,
    theta_array,
)

PI = math.pi
SQRT3_2 = math.sqrt(3) / 2

# below this alpha, M and theta are evaluated through the duality at 1/alpha
DUALITY_SWITCH = 0.3


class Method(str, Enum):
    AUTO = "auto"
    DIRECT = "Direct"
    REDUCED = "Reduced1D"


class FDMethod(str, Enum):
    EXPANSION = "Expansion"
    FINITE_DIFFERENCE = "FiniteDifference"


@dataclass(frozen=True)
class PotentialSpec:
    """Weight (r^k + gamma) exp(-pi alpha r) with r = |P|^2."""

    k: int = 1
    gamma: float = 0.0

    def __post_init__(self):
        if self.k not in (0, 1, 2):
            raise ValueError(f"k must be 0, 1 or 2, got {self.k}")
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ValueError(f"gamma must be finite and >= 0, got {self.gamma}")
        if self.gamma != 0 and self.k != 1:
            raise ValueError("gamma is only meaningful with k=1")

    @classmethod
    def parse(cls, text: str) -> "PotentialSpec":
        t = text.strip().lower()
        if t == "theta":
            return cls(0)
        if t == "m":
            return cls(1)
        if t == "w2":
            return cls(2)
        if t.startswith("gamma:"):
            return cls(1, float(t.split(":", 1)[1]))
        raise ValueError(f"unknown potential spec {text!r}; expected theta|m|w2|gamma:<g>")

    @property
    def name(self) -> str:
        if self.gamma:
            return f"gamma:{self.gamma:g}"
        return ("theta", "m", "w2")[self.k]


THETA = PotentialSpec(0)
M_SPEC = PotentialSpec(1)
W2 = PotentialSpec(2)


@dataclass(frozen=True)
class EnergyEval:
    alpha: float
    z: HalfPlanePoint
    value: SeriesValue
    method: Method


# ---------------------------------------------------------------- direct sums

def _q_terms(k: int, c: float, Q):
    """g(Q) = Q^k e^{-cQ} and its first two Q-derivatives."""
    E = np.exp(-c * Q)
    if k == 0:
        return E, -c * E, c * c * E
    if k == 1:
        return Q * E, (1 - c * Q) * E, (c * c * Q - 2 * c) * E
    return Q * Q * E, (2 * Q - c * Q * Q) * E, (2 - 4 * c * Q + c * c * Q * Q) * E


def _cell_diameter(x: float, y: float) -> float:
    s = 1 / math.sqrt(y)
    w1 = complex(s, 0)
    w2 = complex(s * x, s * y)
    return max(abs(w1), abs(w2), abs(w1 + w2), abs(w1 - w2))


def _gauss_tail(k: int, c: float, R: float, D: float) -> float:
    """Bound on sum over |P| > R of |P|^{2k} e^{-c|P|^2} for a covolume-1 lattice.

    Uses #{|P| <= t} <= pi (t + D)^2 with D the cell diameter, then
    Stieltjes integration by parts.  Valid once R^2 >= k / c.
    """
    R2 = R * R
    head = PI * (R + D) ** 2 * R2 ** k * math.exp(-c * R2)
    s1, s2 = k + 1.0, k + 0.5
    body = PI * gammaincc(s1, c * R2) * _gamma(s1) / c ** s1
    body += PI * D * gammaincc(s2, c * R2) * _gamma(s2) / c ** s2
    return head + body


def _box(x: float, y: float, R: float):
    sy = math.sqrt(y)
    mmax = int(math.floor(R / sy))
    m = np.arange(-mmax, mmax + 1)
    nmax = int(math.ceil(mmax * abs(x) + R * sy)) + 1
    n = np.arange(-nmax, nmax + 1)
    M, N = np.meshgrid(m, n, indexing="ij")
    return M.ravel().astype(float), N.ravel().astype(float), mmax


def _direct(k: int, alpha: float, x: float, y: float, budget: TruncationBudget) -> SeriesValue:
    c = PI * alpha
    D = _cell_diameter(x, y)
    R2 = max(k / c, (math.log(1 / budget.abs_tol) + 2) / c)
    while True:
        R = math.sqrt(R2)
        m, n, mmax = _box(x, y, R)
        if 2 * mmax + 1 > budget.max_terms:
            raise BudgetExhausted(f"direct sum needs {2 * mmax + 1} rows (> {budget.max_terms})")
        Q = m * m * y + (m * x + n) ** 2 / y
        val = float(np.sum(_q_terms(k, c, Q)[0]))
        tail = _gauss_tail(k, c, R, D)
        if tail <= budget.target(val):
            return SeriesValue(val, tail, m.size)
        R2 *= 1.25


def w_sum_bruteforce(k: int, alpha: float, z: PointLike, radius: int) -> float:
    """Plain double loop over |m|, |n| <= radius.  Test oracle only."""
    if radius < 1:
        raise ValueError("radius must be >= 1")
    p = as_point(z)
    total = 0.0
    for m in range(-radius, radius + 1):
        for n in range(-radius, radius + 1):
            q = ((m * p.x + n) ** 2 + (m * p.y) ** 2) / p.y
            total += q ** k * math.exp(-PI * alpha * q)
    return total


def w_derivative(k: int, alpha: float, z: PointLike, dx: int = 0, dy: int = 0, radius_tol: float = 1e-18) -> float:
    """Partial derivative of W_k in x and/or y (total order <= 2) by direct summation."""
    if dx + dy > 2 or min(dx, dy) < 0:
        raise ValueError("only derivatives of total order <= 2 are supported")
    p = as_point(z)
    x, y, c = p.x, p.y, PI * alpha
    R = math.sqrt((math.log(1 / radius_tol) + 12) / c + (k + 2) / c)
    m, n, _ = _box(x, y, R)
    b = (m * x + n) ** 2
    a = m * m
    Q = a * y + b / y
    g0, g1, g2 = _q_terms(k, c, Q)
    if (dx, dy) == (0, 0):
        return float(np.sum(g0))
    Qx = 2 * m * (m * x + n) / y
    Qy = a - b / y ** 2
    if (dx, dy) == (1, 0):
        return float(np.sum(g1 * Qx))
    if (dx, dy) == (0, 1):
        return float(np.sum(g1 * Qy))
    if (dx, dy) == (2, 0):
        return float(np.sum(g2 * Qx * Qx + g1 * 2 * a / y))
    if (dx, dy) == (0, 2):
        return float(np.sum(g2 * Qy * Qy + g1 * 2 * b / y ** 3))
    return float(np.sum(g2 * Qx * Qy - g1 * 2 * m * (m * x + n) / y ** 2))


def grid_energy(spec: PotentialSpec, alpha: float, X, Y, tol: float = 1e-16) -> np.ndarray:
    """Direct summation of ``spec`` over arrays of points, one fixed index box.

    The box covers every |P| <= R at every point, with R chosen from the
    worst-case cell so that the Gaussian tail bound is below ``tol`` relative.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    X, Y = np.broadcast_arrays(X, Y)
    c = PI * alpha
    ymin, ymax = float(Y.min()), float(Y.max())
    xmax = float(np.abs(X).max())
    D = max(_cell_diameter(xmax, ymin), _cell_diameter(xmax, ymax))
    R2 = max(spec.k / c, (math.log(1 / tol) + 2) / c)
    while _gauss_tail(spec.k, c, math.sqrt(R2), D) > tol * 0.5:
        R2 *= 1.25
    R = math.sqrt(R2)
    mmax = int(math.floor(R / math.sqrt(ymin)))
    nmax = int(math.ceil(mmax * xmax + R * math.sqrt(ymax))) + 1
    out = np.zeros(X.shape)
    for m in range(-mmax, mmax + 1):
        # exp underflows harmlessly for rows outside the disc
        n = np.arange(-nmax, nmax + 1, dtype=float)[:, None]
        Q = (m * m) * Y.ravel()[None, :] + (m * X.ravel()[None, :] + n) ** 2 / Y.ravel()[None, :]
        E = np.exp(-c * Q)
        if spec.k == 0:
            w = E
        elif spec.k == 1:
            w = (Q + spec.gamma) * E
        else:
            w = Q * Q * E
        out += w.sum(axis=0).reshape(X.shape)
    return out


# ---------------------------------------------------------- reduced (1D) sums

_THETA_N = 8


def _outer_count(c_y: float, tol: float) -> int:
    # e^{-pi alpha y n^2} n^2 < tol for n > N
    N = 1
    while math.exp(-c_y * (N + 1) ** 2) * (N + 1) ** 4 > tol:
        N += 1
    return N


def _reduced(k: int, alpha: float, x: float, y: float, budget: TruncationBudget) -> SeriesValue:
    X = y / alpha
    c_y = PI * alpha * y
    N = _outer_count(c_y, budget.abs_tol * 1e-3)
    if 2 * N + 1 > budget.max_terms:
        raise BudgetExhausted(f"reduced sum needs {2 * N + 1} outer terms")
    n = np.arange(-N, N + 1, dtype=float)
    E = np.exp(-c_y * n * n)
    th, t0 = theta_array(X, n * x, (0, 0), _THETA_N)
    pref = math.sqrt(X)
    if k == 0:
        terms = pref * E * th
        inner_tail = float(np.sum(pref * E * t0))
    else:
        thx, t1 = theta_array(X, n * x, (1, 0), _THETA_N)
        terms = pref / PI * E * (th / (2 * alpha) + PI * y * n * n * th + y / alpha ** 2 * thx)
        inner_tail = float(np.sum(pref / PI * E * ((1 / (2 * alpha) + PI * y * n * n) * t0 + y / alpha ** 2 * t1)))
    val = float(np.sum(terms))
    # outer tail: |theta| <= theta(X;0), |theta_X| <= -theta_X(X;0)
    th0 = float(theta_array(X, 0.0)[0])
    thx0 = -float(theta_array(X, 0.0, (1, 0))[0])
    j = N + 1
    r = math.exp(-c_y * (2 * j + 1)) * ((j + 1) / j) ** 2
    if k == 0:
        first = pref * math.exp(-c_y * j * j) * th0
    else:
        first = pref / PI * math.exp(-c_y * j * j) * (th0 / (2 * alpha) + PI * y * j * j * th0 + y / alpha ** 2 * thx0)
    outer_tail = 2 * first / (1 - r)
    tail = outer_tail + inner_tail
    if tail > budget.target(val):
        raise BudgetExhausted(f"reduced sum tail {tail:.3g} above target at alpha={alpha}, z={x}+{y}i")
    return SeriesValue(val, tail, int(n.size))


def w_sum(k: int, alpha: float, z: PointLike, budget: TruncationBudget = DEFAULT_BUDGET,
          method: Method | str = Method.AUTO) -> SeriesValue:
    """W_k(alpha, z).

    ``Direct`` sums over a certified index box.  ``Reduced1D`` (k in {0, 1})
    uses the reduction to one-dimensional theta functions; for alpha below
    ``DUALITY_SWITCH`` it evaluates at 1/alpha through the duality identities.
    ``auto`` means Reduced1D for k <= 1 and Direct for k = 2.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if k not in (0, 1, 2):
        raise ValueError("k must be 0, 1 or 2")
    p = as_point(z)
    method = Method(method)
    if method is Method.AUTO:
        method = Method.DIRECT if k == 2 else Method.REDUCED
    if method is Method.DIRECT:
        return _direct(k, alpha, p.x, p.y, budget)
    if k == 2:
        raise ValueError("W_2 has no reduced form; use Direct")
    if alpha < DUALITY_SWITCH:
        b = 1 / alpha
        t = _reduced(0, b, p.x, p.y, budget)
        if k == 0:
            # theta(alpha) = theta(1/alpha) / alpha
            return SeriesValue(t.value / alpha, t.tail_bound / alpha, t.terms_used)
        m = _reduced(1, b, p.x, p.y, budget)
        val = (t.value - PI * b * m.value) / (PI * alpha * alpha)
        tail = (t.tail_bound + PI * b * m.tail_bound) / (PI * alpha * alpha)
        return SeriesValue(val, tail, t.terms_used + m.terms_used)
    return _reduced(k, alpha, p.x, p.y, budget)


def evaluate(k: int, alpha: float, z: PointLike, budget: TruncationBudget = DEFAULT_BUDGET,
             method: Method | str = Method.AUTO) -> EnergyEval:
    method = Method(method)
    if method is Method.AUTO:
        method = Method.DIRECT if k == 2 else Method.REDUCED
    return EnergyEval(alpha, as_point(z), w_sum(k, alpha, z, budget, method), method)


def energy(spec: PotentialSpec, alpha: float, z: PointLike, budget: TruncationBudget = DEFAULT_BUDGET,
           method: Method | str = Method.AUTO) -> SeriesValue:
    """W_k + gamma * W_0 with the tail bounds added."""
    w = w_sum(spec.k, alpha, z, budget, method)
    if not spec.gamma:
        return w
    t = w_sum(0, alpha, z, budget, method)
    return SeriesValue(w.value + spec.gamma * t.value, w.tail_bound + spec.gamma * t.tail_bound,
                       w.terms_used + t.terms_used)


def energy_value(spec: PotentialSpec, alpha: float, z: PointLike) -> float:
    return energy(spec, alpha, z).value


# ------------------------------------------------------------------- duality

def dual_gap(alpha: float, z: PointLike) -> float:
    """theta(alpha, z) - pi alpha M(alpha, z)."""
    return w_sum(0, alpha, z).value - PI * alpha * w_sum(1, alpha, z).value


def m_via_duality(alpha_small: float, z: PointLike) -> float:
    """M(a, z) = (b^2 / pi) (theta(b, z) - pi b M(b, z)) with b = 1/a >= 1."""
    if not 0 < alpha_small <= 1:
        raise ValueError("alpha_small must lie in (0, 1]")
    b = 1 / alpha_small
    p = as_point(z)
    budget = DEFAULT_BUDGET
    t = _reduced(0, b, p.x, p.y, budget).value
    m = _reduced(1, b, p.x, p.y, budget).value
    return b * b / PI * (t - PI * b * m)


# --------------------------------------------------- derivative expansions

def _th(X, Y, d=(0, 0)):
    return theta_array(X, Y, d, _THETA_N)[0]


def _outer_n(alpha: float, y: float, tol: float = 1e-22) -> np.ndarray:
    return np.arange(1, _outer_count(PI * alpha * y, tol) + 2, dtype=float)


def P_n(alpha: float, x: float, y: float, n) -> np.ndarray:
    """Terms of the single-sum identity for d/dy M (before the positive prefactor)."""
    n = np.asarray(n, dtype=float)
    X = y / alpha
    Y = n * x
    poly = alpha ** 4 * PI ** 2 * y * y * n ** 4 - PI * alpha ** 3 * y * n * n - alpha ** 2 / 4
    return (2 * alpha * y * _th(X, Y, (1, 0)) + y * y * _th(X, Y, (2, 0)) - poly * _th(X, Y)) \
        * np.exp(-PI * alpha * y * n * n)


def dy_prefactor(alpha: float, y: float) -> float:
    return 1 / (PI * math.sqrt(y / alpha) * alpha ** 4)


def P_mn(alpha: float, x, y, m, n) -> np.ndarray:
    """Terms of the double-sum identity for (d_yy + (2/y) d_y) M."""
    s = m + n * x
    u = n * n - s * s / (y * y)
    v = y * n * n + s * s / y
    pa = PI * alpha
    return (pa ** 2 * u * u * v + 2 * n * n / y - 2 * pa * u * u - 2 * pa / y * n * n * v) * np.exp(-pa * v)


def _pmn_box(alpha: float, y: float, tol: float = 1e-22):
    N = _outer_count(PI * alpha * y, tol) + 1
    Mx = int(math.ceil(math.sqrt((math.log(1 / tol) + 10) * y / (PI * alpha)))) + N
    m = np.arange(-Mx, Mx + 1, dtype=float)
    n = np.arange(-N, N + 1, dtype=float)
    mm, nn = np.meshgrid(m, n, indexing="ij")
    return mm.ravel(), nn.ravel()


def pa_pb(alpha: float, x: float, y: float) -> tuple[float, float]:
    """(P_A, P_B): the |m|,|n| <= 2 block and the remainder of the double sum."""
    m, n = _pmn_box(alpha, y)
    t = P_mn(alpha, x, y, m, n)
    inner = (np.abs(m) <= 2) & (np.abs(n) <= 2)
    return float(t[inner].sum()), float(t[~inner].sum())


def ma_mb(alpha: float, x: float, y: float) -> tuple[float, float]:
    """Major (n = 1, 2) and error (n >= 3) parts of the factored d_xy M.

    d_xy M = 2 / (pi sqrt(y/alpha) alpha^2) (-theta_Y(y/alpha; x)) e^{-pi alpha y} (M_A + M_B).
    Undefined where theta_Y(y/alpha; x) = 0, i.e. x in Z/2.
    """
    X = y / alpha
    n = _outer_n(alpha, y)
    den = _th(X, x, (0, 1))
    r1 = _th(X, n * x, (0, 1)) / den
    r2 = _th(X, n * x, (1, 1)) / den
    r3 = _th(X, n * x, (2, 1)) / den
    terms = ((alpha ** 2 * n ** 5 * PI ** 2 * y * y - PI * alpha * y * n ** 3 - n / 4) * r1
             - 2 * X * n * r2 - X * X * n * r3) * np.exp(-PI * alpha * y * (n * n - 1))
    return float(terms[:2].sum()), float(terms[2:].sum())


def L_terms(alpha: float, x: float, y: float) -> np.ndarray:
    X = y / alpha
    n = _outer_n(alpha, y)
    den = _th(X, x, (0, 1))
    rY = _th(X, n * x, (0, 1)) / den
    rXY = _th(X, n * x, (1, 1)) / (-den)
    return (2 * PI * y * alpha ** 2 * n ** 3 * rY - 2 * y * n * rXY - alpha * n * rY) \
        * np.exp(-PI * alpha * y * (n * n - 1))


def L_value(alpha: float, x: float, y: float) -> float:
    """L(alpha, x, y), the full series.

    Removable singularity where theta_Y(y/alpha; x) = 0 (x in Z/2); there the
    limit is taken by evaluating at a point 1e-7 inside.
    """
    if not (alpha > 0 and y > 0):
        raise ValueError("alpha and y must be positive")
    x = _off_half_integer(x)
    return float(L_terms(alpha, x, y).sum())


def L_main(alpha: float, x: float, y: float) -> float:
    """2 pi y alpha^2 - alpha - 2 y theta_XY / (-theta_Y), the n = 1 term of L."""
    x = _off_half_integer(x)
    X = y / alpha
    return 2 * PI * y * alpha ** 2 - alpha - 2 * y * float(_th(X, x, (1, 1)) / -_th(X, x, (0, 1)))


def L_prefactor(alpha: float, x: float, y: float) -> float:
    """sqrt(y) alpha^{-3/2} (-theta_Y(y/alpha; x)) e^{-pi alpha y} >= 0 on [0, 1/2]."""
    return math.sqrt(y) * alpha ** -1.5 * float(-_th(y / alpha, x, (0, 1))) * math.exp(-PI * alpha * y)


def _off_half_integer(x: float, h: float = 1e-7) -> float:
    r = 2 * x - round(2 * x)
    if abs(r) < 2 * h:
        # step toward the interior of [0, 1/2] (mod 1/2 symmetry of the limit)
        base = round(2 * x) / 2
        frac = base - math.floor(base)
        return base + (h if frac == 0 else -h)
    return x


def R_n(alpha: float, y: float, n) -> np.ndarray:
    X = y / alpha
    n = np.asarray(n, dtype=float)
    return (alpha ** 2 * (PI ** 2 * n ** 4 * alpha ** 2 * y * y - 2 * PI * alpha * y * n * n + 0.25) * _th(X, 0.0)
            - alpha * y * _th(X, 0.0, (1, 0)) - y * y * _th(X, 0.0, (2, 0)))


def m_dx_expansion(alpha: float, x: float, y: float) -> float:
    X = y / alpha
    n = _outer_n(alpha, y)
    E = np.exp(-PI * alpha * y * n * n)
    tY = _th(X, n * x, (0, 1))
    tXY = _th(X, n * x, (1, 1))
    s = (math.sqrt(y) * alpha ** -1.5 * np.sum(n * E * tY)
         + 2 * PI * y ** 1.5 * alpha ** -0.5 * np.sum(n ** 3 * E * tY)
         + 2 * y ** 1.5 * alpha ** -2.5 * np.sum(n * E * tXY))
    return float(s / PI)


def theta_dx_expansion(alpha: float, x: float, y: float) -> float:
    X = y / alpha
    n = _outer_n(alpha, y)
    E = np.exp(-PI * alpha * y * n * n)
    return 2 * math.sqrt(X) * float(np.sum(n * E * _th(X, n * x, (0, 1))))


def energy_dx_expansion(spec: PotentialSpec, alpha: float, x: float, y: float) -> float:
    """d/dx of W_k + gamma W_0 from the theta-function expansion (k <= 1).

    Keeps full relative precision when the x-dependence is far below the
    rounding level of the energy itself (large y / alpha).
    """
    if spec.k == 2:
        raise ValueError("no x-derivative expansion for k=2")
    if spec.k == 0:
        return theta_dx_expansion(alpha, x, y)
    d = m_dx_expansion(alpha, x, y)
    if spec.gamma:
        d += spec.gamma * theta_dx_expansion(alpha, x, y)
    return d


def m_dy_expansion(alpha: float, x: float, y: float) -> float:
    N = _outer_count(PI * alpha * y, 1e-22) + 1
    n = np.arange(-N, N + 1, dtype=float)
    return dy_prefactor(alpha, y) * float(np.sum(P_n(alpha, x, y, n)))


def m_dyy_plus_expansion(alpha: float, x: float, y: float) -> float:
    m, n = _pmn_box(alpha, y)
    return float(np.sum(P_mn(alpha, x, y, m, n)))


def m_dxy_expansion(alpha: float, x: float, y: float) -> float:
    """Single-sum identity for d_xy M (valid for every x)."""
    X = y / alpha
    n = _outer_n(alpha, y)
    E = np.exp(-PI * alpha * y * n * n)
    a = alpha
    terms = ((PI * a ** 3 * y * n ** 3 + a * a * n / 4 - a ** 4 * n ** 5 * PI ** 2 * y * y) * _th(X, n * x, (0, 1))
             + 2 * a * y * n * _th(X, n * x, (1, 1)) + y * y * n * _th(X, n * x, (2, 1))) * E
    return 2 / (PI * math.sqrt(X) * a ** 4) * float(terms.sum())


class FDStepUnderflow(ArithmeticError):
    pass


def _richardson(f, h: float) -> float:
    return (4 * f(h / 2) - f(h)) / 3


def m_partials(alpha: float, z: PointLike, which: str, method: FDMethod | str = FDMethod.EXPANSION,
               h: float = 1e-3) -> float:
    """A partial derivative of M: ``dx``, ``dy``, ``dyy_plus`` = (d_yy + (2/y) d_y) M, or ``dxy``."""
    p = as_point(z)
    x, y = p.x, p.y
    method = FDMethod(method)
    if method is FDMethod.EXPANSION:
        fn = {"dx": m_dx_expansion, "dy": m_dy_expansion,
              "dyy_plus": m_dyy_plus_expansion, "dxy": m_dxy_expansion}.get(which)
        if fn is None:
            raise ValueError(f"unknown derivative {which!r}")
        return fn(alpha, x, y)
    if not (h > 0 and y - 2 * h > 0 and h > 1e-8 * max(1.0, y)):
        raise FDStepUnderflow(f"step {h} unusable at y={y}")

    def M(xx, yy):
        return w_sum(1, alpha, (xx, yy)).value

    if which == "dx":
        return _richardson(lambda s: (M(x + s, y) - M(x - s, y)) / (2 * s), h)
    if which == "dy":
        return _richardson(lambda s: (M(x, y + s) - M(x, y - s)) / (2 * s), h)
    if which == "dyy_plus":
        def d2(s):
            f0, fp, fm = M(x, y), M(x, y + s), M(x, y - s)
            return (fp - 2 * f0 + fm) / (s * s) + 2 / y * (fp - fm) / (2 * s)
        return _richardson(d2, h)
    if which == "dxy":
        return _richardson(lambda s: (M(x + s, y + s) - M(x + s, y - s) - M(x - s, y + s) + M(x - s, y - s))
                           / (4 * s * s), h)
    raise ValueError(f"unknown derivative {which!r}")


# ----------------------------------------------------- boundary profiles

class AxisSums(NamedTuple):
    Xa: float
    Xb: float
    dXa: float
    dXb: float
    ddXa: float
    ddXb: float
    dddXa: float
    dddXb: float


def _axis_terms(alpha: float, y: float, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rows (Q'E, QQ'E) and their first three y-derivatives for Q = a y + b / y."""
    k = PI * alpha
    Q = a * y + b / y
    Q1 = a - b / y ** 2
    Q2 = 2 * b / y ** 3
    Q3 = -6 * b / y ** 4
    Q4 = 24 * b / y ** 5
    E = np.exp(-k * Q)
    xa = Q1 * E
    xb = Q * Q1 * E
    dxa = (Q2 - k * Q1 ** 2) * E
    dxb = (Q1 ** 2 + Q * Q2 - k * Q * Q1 ** 2) * E
    ddxa = (Q3 - 3 * k * Q1 * Q2 + k * k * Q1 ** 3) * E
    ddxb = (3 * Q1 * Q2 + Q * Q3 - 2 * k * Q1 ** 3 - 3 * k * Q * Q1 * Q2 + k * k * Q * Q1 ** 3) * E
    dddxa = (Q4 - 3 * k * Q2 ** 2 - 4 * k * Q1 * Q3 + 6 * k * k * Q1 ** 2 * Q2 - k ** 3 * Q1 ** 4) * E
    dddxb = (3 * Q2 ** 2 + 4 * Q1 * Q3 + Q * Q4 - 12 * k * Q1 ** 2 * Q2 - 3 * k * Q * Q2 ** 2
             - 4 * k * Q * Q1 * Q3 + 3 * k * k * Q1 ** 4 + 6 * k * k * Q * Q1 ** 2 * Q2 - k ** 3 * Q * Q1 ** 4) * E
    return np.stack([xa, xb, dxa, dxb, ddxa, ddxb, dddxa, dddxb])


def _index_box(alpha: float, y: float, scale_a: float, scale_b: float, tol: float = 1e-24):
    L = math.log(1 / tol) + 12
    Na = int(math.ceil(math.sqrt(L / (PI * alpha * y * scale_a)))) + 1
    Nb = int(math.ceil(math.sqrt(L * y / (PI * alpha * scale_b)))) + 1
    i = np.arange(-Na, Na + 1, dtype=float)
    j = np.arange(-Nb, Nb + 1, dtype=float)
    I, J = np.meshgrid(i, j, indexing="ij")
    return I.ravel(), J.ravel()


def _sqrt_axis(alpha: float, y: float, split: bool):
    n, m = _index_box(alpha, y, 1.0, 1.0)
    t = _axis_terms(alpha, y, n * n, m * m)
    total = AxisSums(*t.sum(axis=1))
    if not split:
        return total, None
    dom = (n * n + m * m) <= 2
    return total, AxisSums(*t[:, dom].sum(axis=1))


@dataclass(frozen=True)
class GammaAProfile:
    Xa: float
    Xb: float
    dXa: float
    dXb: float
    Aa: float
    Ae: float
    Ba: float
    Be: float
    ddXa: float = 0.0
    ddXb: float = 0.0
    dAa: float = 0.0
    dBa: float = 0.0
    ddAa: float = 0.0
    ddBa: float = 0.0
    dddXa: float = 0.0
    dddXb: float = 0.0
    dddAa: float = 0.0
    dddBa: float = 0.0

    @property
    def dAe(self) -> float:
        return self.dXa - self.dAa

    @property
    def dBe(self) -> float:
        return self.dXb - self.dBa

    @property
    def ddAe(self) -> float:
        return self.ddXa - self.ddAa

    @property
    def ddBe(self) -> float:
        return self.ddXb - self.ddBa


def gamma_a_profile(alpha: float, y: float) -> GammaAProfile:
    """X_a = sum (n^2 - m^2/y^2) e^{-pi alpha (y n^2 + m^2/y)}, X_b = sum (y n^4 - m^4/y^3) e^{...},
    their y-derivatives, and the split into the n^2 + m^2 <= 2 block and the rest."""
    if not (alpha > 0 and y >= 1):
        raise ValueError("gamma_a_profile needs alpha > 0 and y >= 1")
    tot, dom = _sqrt_axis(alpha, y, True)
    return GammaAProfile(tot.Xa, tot.Xb, tot.dXa, tot.dXb,
                         dom.Xa, tot.Xa - dom.Xa, dom.Xb, tot.Xb - dom.Xb,
                         tot.ddXa, tot.ddXb, dom.dXa, dom.dXb, dom.ddXa, dom.ddXb,
                         tot.dddXa, tot.dddXb, dom.dddXa, dom.dddXb)


def Aa_closed(alpha: float, y: float) -> float:
    k = PI * alpha
    return 2 * math.exp(-k * y) - 2 / y ** 2 * math.exp(-k / y) + 4 * (1 - 1 / y ** 2) * math.exp(-k * (y + 1 / y))


def Ba_closed(alpha: float, y: float) -> float:
    k = PI * alpha
    return 2 * y * math.exp(-k * y) - 2 / y ** 3 * math.exp(-k / y) + 4 * (y - 1 / y ** 3) * math.exp(-k * (y + 1 / y))


class EndpointConstants(NamedTuple):
    A: float
    B: float
    C: float
    D: float


def endpoint_constants(alpha: float) -> EndpointConstants:
    """A, B in closed form; C, D as the n^2 + m^2 >= 3 lattice sums."""
    k = PI * alpha
    e = math.exp(-k)
    A = 4 * e * (k - 1 - 2 * e)
    B = 4 * e * (k - 2 - 4 * e)
    N = int(math.ceil(math.sqrt(70 / k))) + 2
    r = np.arange(-N, N + 1, dtype=float)
    n, m = np.meshgrid(r, r, indexing="ij")
    n, m = n.ravel(), m.ravel()
    far = n * n + m * m >= 3
    n, m = n[far], m[far]
    E = np.exp(-k * (n * n + m * m))
    C = float(np.sum((k * (n * n - m * m) ** 2 - 2 * m * m) * E))
    D = float(np.sum((k * (n ** 4 - m ** 4) * (n * n - m * m) - (n ** 4 + 3 * m ** 4)) * E))
    return EndpointConstants(A, B, C, D)


@dataclass(frozen=True)
class GammaCProfile:
    Ya: float
    Yb: float
    Yap: float
    Ybp: float
    Papprox: float
    dYa: float = 0.0
    dYb: float = 0.0
    ddYa: float = 0.0
    ddYb: float = 0.0
    dddYa: float = 0.0
    dddYb: float = 0.0


_APPROX_PQ = np.array([(1, 1), (1, -1), (-1, 1), (-1, -1), (2, 0), (-2, 0), (0, 2), (0, -2)], dtype=float)


def gamma_c_profile(alpha: float, y: float) -> GammaCProfile:
    """Sums on the line Re z = 1/2 reindexed over p = q (mod 2):

    Y_a = sum (p^2 - q^2/(4y^2)) e^{-pi alpha (p^2 y + q^2/(4y))},
    Y_b = sum y (p^4 - q^4/(16 y^4)) e^{...}.
    """
    if not (alpha > 0 and 0.4 <= y <= 1.0):
        raise ValueError("gamma_c_profile needs alpha > 0 and y in [0.4, 1]")
    p, q = _index_box(alpha, y, 1.0, 0.25)
    keep = (p - q) % 2 == 0
    p, q = p[keep], q[keep]
    t = _axis_terms(alpha, y, p * p, q * q / 4).sum(axis=1)
    ap = _axis_terms(alpha, y, _APPROX_PQ[:, 0] ** 2, _APPROX_PQ[:, 1] ** 2 / 4).sum(axis=1)
    # Y_ap and Y_bp both vanish at y = 1/2; P takes its limit there
    P = ap[1] / ap[0] if abs(y - 0.5) > 1e-9 else ap[3] / ap[2]
    return GammaCProfile(float(t[0]), float(t[1]), float(ap[0]), float(ap[1]), float(P),
                         *(float(v) for v in t[2:]))


def P_approx(alpha: float, y: float) -> float:
    k = PI * alpha
    e1 = math.exp(-k * (y - 3 / (4 * y)))
    e2 = math.exp(-k * (4 * y - 1 / y))
    num = 2 * y * (1 - 1 / (16 * y ** 4)) * e1 - 1 / y ** 3 + 16 * y * e2
    den = 2 * (1 - 1 / (4 * y * y)) * e1 - 1 / y ** 2 + 4 * e2
    return num / den


def arc_to_axis(u: float) -> HalfPlanePoint:
    """u + i sqrt(1 - u^2) on the unit arc -> the point on Re z = 1/2 with equal energy."""
    if not -1 < u < 1:
        raise ValueError("u must lie in (-1, 1)")
    return HalfPlanePoint(0.5, 0.5 * math.sqrt((1 + u) / (1 - u)))


def axis_to_arc(y: float) -> HalfPlanePoint:
    s2 = (2 * y) ** 2
    u = (s2 - 1) / (s2 + 1)
    return HalfPlanePoint(u, math.sqrt(max(0.0, 1 - u * u)))
