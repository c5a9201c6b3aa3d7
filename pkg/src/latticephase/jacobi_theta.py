"""One-dimensional Jacobi theta function and its partial derivatives.

    theta(X; Y) = sum_n exp(-pi n^2 X) exp(2 pi i n Y)
                = X^{-1/2} sum_n exp(-pi (n - Y)^2 / X)

The direct series is used for X >= 1 and the Poisson-transformed series for
X < 1.  Derivatives are taken term by term in whichever form is active, and
every scalar evaluation carries a closed-form bound on the omitted tail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

PI = math.pi

__all__ = [
    "TruncationBudget",
    "SeriesValue",
    "DerivOrder",
    "BudgetExhausted",
    "RangeError",
    "SUPPORTED_ORDERS",
    "theta1",
    "theta_array",
    "mu",
    "nu",
    "QuotientAudit",
    "QUOTIENT_KINDS",
    "quotient_bound",
    "quotient_bound_check",
]


class BudgetExhausted(RuntimeError):
    """A series did not reach its tolerance within the allowed number of terms."""


class RangeError(ValueError):
    """An argument lies outside the hypothesis region of the requested check."""


@dataclass(frozen=True)
class TruncationBudget:
    abs_tol: float = 1e-15
    rel_tol: float = 1e-14
    max_terms: int = 400

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        if self.max_terms < 8:
            raise ValueError("max_terms must be at least 8")

    def target(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


DEFAULT_BUDGET = TruncationBudget()


@dataclass(frozen=True)
class SeriesValue:
    """A truncated sum and an upper bound on the absolute value of what was dropped."""

    value: float
    tail_bound: float
    terms_used: int

    def __float__(self) -> float:
        return float(self.value)


class DerivOrder(NamedTuple):
    dX: int = 0
    dY: int = 0


# relative slack for comparisons that are exact equalities in a limit
ULP_SLACK = 64 * np.finfo(float).eps

SUPPORTED_ORDERS = frozenset({(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (2, 1)})


def _check_order(d) -> DerivOrder:
    d = DerivOrder(*d)
    if (d.dX, d.dY) not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported derivative order {tuple(d)}")
    return d


# ---------------------------------------------------------------------------
# term sums (vectorised; trailing axis runs over the summation index)


def _direct_sum(X, Y, dX, dY, N):
    n = np.arange(1, N + 1, dtype=float)
    Xe = np.asarray(X, dtype=float)[..., None]
    Ye = np.asarray(Y, dtype=float)[..., None]
    w = 2.0 * (-PI * n * n) ** dX * np.exp(-PI * n * n * Xe)
    if dY == 0:
        t = w * np.cos(2 * PI * n * Ye)
    else:
        t = w * (-2 * PI * n) * np.sin(2 * PI * n * Ye)
    s = t.sum(axis=-1)
    if dX == 0 and dY == 0:
        s = s + 1.0
    return s


def _poisson_factor(s, u, X, dX, dY):
    if (dX, dY) == (0, 0):
        return np.ones_like(s)
    if (dX, dY) == (1, 0):
        return (s - 0.5) / X
    if (dX, dY) == (0, 1):
        return 2 * PI * u / X
    if (dX, dY) == (2, 0):
        return (s * s - 3 * s + 0.75) / X**2
    if (dX, dY) == (1, 1):
        return 2 * PI * u * (s - 1.5) / X**2
    return 2 * PI * u * (s * s - 5 * s + 3.75) / X**3


def _poisson_envelope(s, u, X, dX, dY):
    # |factor| with every polynomial coefficient replaced by its absolute value
    au = np.abs(u)
    if (dX, dY) == (0, 0):
        return np.ones_like(s)
    if (dX, dY) == (1, 0):
        return (s + 0.5) / X
    if (dX, dY) == (0, 1):
        return 2 * PI * au / X
    if (dX, dY) == (2, 0):
        return (s * s + 3 * s + 0.75) / X**2
    if (dX, dY) == (1, 1):
        return 2 * PI * au * (s + 1.5) / X**2
    return 2 * PI * au * (s * s + 5 * s + 3.75) / X**3


def _poisson_sum(X, Y, dX, dY, N):
    n = np.arange(-N, N + 2, dtype=float)
    Xe = np.asarray(X, dtype=float)[..., None]
    u = n - np.asarray(Y, dtype=float)[..., None]
    s = PI * u * u / Xe
    g = np.exp(-s) / np.sqrt(Xe)
    return (g * _poisson_factor(s, u, Xe, dX, dY)).sum(axis=-1)


def _direct_tail(X, dX, dY, N):
    p = 2 * dX + dY
    n1 = N + 1
    first = 2.0 * (PI * n1 * n1) ** dX * (2 * PI * n1) ** dY * np.exp(-PI * n1 * n1 * X)
    r = ((N + 2) / (N + 1)) ** p * np.exp(-PI * (2 * N + 3) * X)
    with np.errstate(divide="ignore"):
        return np.where(r < 1, first / (1 - r), np.inf)


def _poisson_tail(X, dX, dY, N):
    p = 2 * dX + dY
    u = float(N + 1)
    s = PI * u * u / X
    first = np.exp(-s) / np.sqrt(X) * _poisson_envelope(s, u, X, dX, dY)
    r = ((N + 2) / (N + 1)) ** p * np.exp(-PI * (2 * N + 3) / X)
    with np.errstate(divide="ignore"):
        return np.where(r < 1, 2 * first / (1 - r), np.inf)


def _reduce_Y(Y):
    Y = np.asarray(Y, dtype=float)
    return Y - np.floor(Y)


def theta_array(X, Y, d=(0, 0), N: int = 6, switch: float = 1.0):
    """Vectorised evaluation with a fixed index range.

    Returns ``(values, tail_bounds)`` broadcast over ``X`` and ``Y``.  With the
    default switch at X = 1, ``N = 6`` keeps the tail below 1e-60 for every
    X > 0.  A lower ``switch`` needs a larger ``N``.
    """
    dX, dY = _check_order(d)
    X = np.asarray(X, dtype=float)
    if np.any(X <= 0):
        raise ValueError("theta requires X > 0")
    Y = _reduce_Y(Y)
    X, Y = np.broadcast_arrays(X, Y)
    direct = X >= switch
    out = np.empty(X.shape)
    tail = np.empty(X.shape)
    if direct.any():
        out[direct] = _direct_sum(X[direct], Y[direct], dX, dY, N)
        tail[direct] = _direct_tail(X[direct], dX, dY, N)
    pois = ~direct
    if pois.any():
        out[pois] = _poisson_sum(X[pois], Y[pois], dX, dY, N)
        tail[pois] = _poisson_tail(X[pois], dX, dY, N)
    return out, tail


def theta1(X: float, Y: float, d=(0, 0), budget: TruncationBudget = DEFAULT_BUDGET,
           form: str | None = None) -> SeriesValue:
    """Certified scalar evaluation of d^a/dX^a d^b/dY^b theta(X; Y).

    ``form`` forces ``"direct"`` or ``"poisson"``; by default the direct series
    is used when X >= 1.
    """
    dX, dY = _check_order(d)
    if not (X > 0 and math.isfinite(X)):
        raise ValueError(f"theta requires finite X > 0, got {X!r}")
    Y = float(_reduce_Y(Y))
    if form is None:
        form = "direct" if X >= 1.0 else "poisson"
    if form == "direct":
        summ, tailf = _direct_sum, _direct_tail
    elif form == "poisson":
        summ, tailf = _poisson_sum, _poisson_tail
    else:
        raise ValueError(f"unknown form {form!r}")
    N = 2
    while N <= budget.max_terms:
        value = float(summ(X, Y, dX, dY, N))
        tb = float(tailf(X, dX, dY, N))
        if tb <= budget.target(value):
            terms = N + 1 if form == "direct" else 2 * N + 2
            return SeriesValue(value, tb, terms)
        N = N + 1 if N < 16 else int(N * 1.5)
    raise BudgetExhausted(f"theta{(dX, dY)} at X={X}, Y={Y}: tail bound did not close "
                          f"within {budget.max_terms} terms")


def _envelope_series(X: float, power: int) -> float:
    s = 0.0
    n = 2
    while True:
        t = n**power * math.exp(-PI * (n * n - 1) * X)
        s += t
        if t < 1e-17 * s or t == 0.0:
            return s
        n += 1


def mu(X: float) -> float:
    """sum_{n>=2} n^2 exp(-pi (n^2 - 1) X)."""
    if X <= 0:
        raise ValueError("mu requires X > 0")
    return _envelope_series(X, 2)


def nu(X: float) -> float:
    """sum_{n>=2} n^4 exp(-pi (n^2 - 1) X)."""
    if X <= 0:
        raise ValueError("nu requires X > 0")
    return _envelope_series(X, 4)


# ---------------------------------------------------------------------------
# quotient envelopes


@dataclass(frozen=True)
class QuotientAudit:
    kind: str
    X: float
    k: int
    worst_quotient: float
    worst_Y: float
    bound: float
    passed: bool

    @property
    def margin(self) -> float:
        return self.bound - self.worst_quotient


# kind -> (numerator order, denominator order, X-range predicate, description)
QUOTIENT_KINDS = {
    "L2a_1": ((0, 1), (0, 1), lambda X: X > 0.2, "X > 1/5"),
    "L2a_2": ((0, 1), (0, 1), lambda X: X < PI / (PI + 2), "X < pi/(pi+2)"),
    "L2b_1": ((1, 1), (1, 1), lambda X: X >= 0.3, "X >= 3/10"),
    "L2b_2": ((1, 1), (0, 1), lambda X: X >= 0.2, "X >= 1/5"),
    "L2b_3": ((1, 1), (0, 1), lambda X: X >= 0.2, "X >= 1/5, k = 1"),
    "L2c_1": ((1, 1), (0, 1), lambda X: 0 < X <= 0.5, "X <= 1/2, k = 1"),
    "L2c_2": ((1, 1), (0, 1), lambda X: 0 < X <= 0.5, "X <= 1/2"),
}


def quotient_bound(kind: str, X: float, k: int) -> float:
    """Right-hand side of the quotient envelope ``kind`` at (X, k)."""
    if kind not in QUOTIENT_KINDS:
        raise ValueError(f"unknown quotient kind {kind!r}")
    if kind == "L2a_1":
        m = mu(X)
        return k * (1 + m) / (1 - m)
    if kind == "L2a_2":
        return k / PI * math.exp(PI / (4 * X))
    if kind == "L2b_1":
        v = nu(X)
        return k * (1 + v) / (1 - v)
    if kind == "L2b_2":
        return k * PI * (1 + nu(X)) / (1 - mu(X))
    if kind == "L2b_3":
        # denominator 1 + mu(X) as stated, not the 1 - mu(X) of its neighbours
        return PI * (1 + nu(X)) / (1 + mu(X))
    if kind == "L2c_1":
        return 1.5 / X * (1 + PI / (6 * X))
    return 3 * k / (2 * PI) / X * (1 + PI / (6 * X)) * math.exp(PI / (4 * X))


def _nudge_half_integers(Y, h=1e-6):
    # theta_Y vanishes at every half-integer; the quotients there are removable
    Y = _reduce_Y(Y)
    Y = np.where(Y < h, h, Y)
    Y = np.where(np.abs(Y - 0.5) < h, 0.5 - h, Y)
    return np.where(Y > 1 - h, 1 - h, Y)


def quotient_bound_check(kind: str, X: float, k: int, Y_grid: Sequence[float]) -> QuotientAudit:
    """Evaluate |num(X; kY) / den(X; Y)| on ``Y_grid`` against the envelope ``kind``."""
    if kind not in QUOTIENT_KINDS:
        raise ValueError(f"unknown quotient kind {kind!r}")
    num, den, ok, desc = QUOTIENT_KINDS[kind]
    if not ok(X):
        raise RangeError(f"{kind} requires {desc}; got X={X}")
    if k < 1 or int(k) != k:
        raise RangeError("k must be a positive integer")
    if kind in ("L2b_3", "L2c_1") and k != 1:
        raise RangeError(f"{kind} is stated for k = 1 only")
    Y = _nudge_half_integers(np.asarray(Y_grid, dtype=float))
    # the direct series has no cancellation as Y -> 0, where several envelopes are sharp
    top, _ = theta_array(X, k * Y, num, N=24, switch=0.2)
    bot, _ = theta_array(X, Y, den, N=24, switch=0.2)
    q = np.abs(top / bot)
    i = int(np.argmax(q))
    bound = quotient_bound(kind, X, k)
    return QuotientAudit(kind, float(X), int(k), float(q[i]), float(Y[i]), bound,
                         bool(q[i] <= bound * (1 + ULP_SLACK)))
