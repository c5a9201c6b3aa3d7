"""Upper half-plane geometry for lattice shapes.

A unit-density Bravais lattice is sqrt(1/y) (Z + zZ) with z = x + iy, y > 0.
Shapes related by z -> z + 1, z -> -1/z and z -> -conj(z) are the same
lattice, so every shape has a representative in

    D = {z : |z| >= 1, 0 <= Re z <= 1/2}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Union

__all__ = [
    "HalfPlanePoint",
    "Translate",
    "Invert",
    "Reflect",
    "ModularMove",
    "ModularWord",
    "ReductionError",
    "Reduction",
    "CauchyGreenTensor",
    "InvalidTensor",
    "LatticeBasis",
    "SQUARE",
    "HEXAGONAL",
    "as_point",
    "apply_move",
    "reduce_to_fundamental",
    "in_fundamental_domain",
    "cauchy_green_to_point",
    "point_to_basis",
]


@dataclass(frozen=True)
class HalfPlanePoint:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")
        if not self.y > 0:
            raise ValueError(f"point must lie in the upper half-plane, got y={self.y}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    def distance(self, other: "HalfPlanePoint") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def __str__(self) -> str:
        return f"{self.x:.10g},{self.y:.10g}"


PointLike = Union[HalfPlanePoint, complex, tuple]

SQUARE = HalfPlanePoint(0.0, 1.0)
HEXAGONAL = HalfPlanePoint(0.5, math.sqrt(3) / 2)


def as_point(z: PointLike) -> HalfPlanePoint:
    if isinstance(z, HalfPlanePoint):
        return z
    if isinstance(z, tuple):
        return HalfPlanePoint(float(z[0]), float(z[1]))
    z = complex(z)
    return HalfPlanePoint(z.real, z.imag)


@dataclass(frozen=True)
class Translate:
    k: int

    def __str__(self) -> str:
        return f"T({self.k})"


@dataclass(frozen=True)
class Invert:
    def __str__(self) -> str:
        return "S"


@dataclass(frozen=True)
class Reflect:
    def __str__(self) -> str:
        return "R"


ModularMove = Union[Translate, Invert, Reflect]


def apply_move(move: ModularMove, z: PointLike) -> HalfPlanePoint:
    """z -> z + k, z -> -1/z, or z -> -conj(z)."""
    p = as_point(z)
    if isinstance(move, Translate):
        return HalfPlanePoint(p.x + move.k, p.y)
    if isinstance(move, Invert):
        r2 = p.x * p.x + p.y * p.y
        return HalfPlanePoint(-p.x / r2, p.y / r2)
    if isinstance(move, Reflect):
        return HalfPlanePoint(-p.x, p.y)
    raise TypeError(f"not a modular move: {move!r}")


@dataclass(frozen=True)
class ModularWord:
    moves: tuple = field(default_factory=tuple)

    def apply(self, z: PointLike) -> HalfPlanePoint:
        p = as_point(z)
        for m in self.moves:
            p = apply_move(m, p)
        return p

    def __len__(self) -> int:
        return len(self.moves)

    def __iter__(self):
        return iter(self.moves)

    def __str__(self) -> str:
        return " ".join(str(m) for m in self.moves)


class ReductionError(RuntimeError):
    pass


class Reduction(NamedTuple):
    point: HalfPlanePoint
    word: ModularWord


_EPS = 4 * 2.220446049250313e-16


def reduce_to_fundamental(z: PointLike, max_moves: int = 256) -> Reduction:
    """Map ``z`` into D and return the point with the word of moves used.

    Translate x into (-1/2, 1/2], invert while |z| < 1, repeat; finally reflect
    if x < 0.  Points already on the boundary of D are left where they are.
    """
    p = as_point(z)
    moves: list = []
    while True:
        if len(moves) > max_moves:
            raise ReductionError(f"reduction of {z!r} did not terminate within {max_moves} moves")
        k = -math.ceil(p.x - 0.5)
        if k != 0:
            moves.append(Translate(k))
            p = apply_move(moves[-1], p)
        if p.x * p.x + p.y * p.y < 1.0 - _EPS:
            moves.append(Invert())
            p = apply_move(moves[-1], p)
            continue
        break
    if p.x < 0:
        moves.append(Reflect())
        p = apply_move(moves[-1], p)
    return Reduction(p, ModularWord(tuple(moves)))


def in_fundamental_domain(z: PointLike, tol: float = 1e-12) -> bool:
    p = as_point(z)
    return (p.x * p.x + p.y * p.y >= (1 - tol) ** 2) and (-tol <= p.x <= 0.5 + tol)


class InvalidTensor(ValueError):
    pass


@dataclass(frozen=True)
class CauchyGreenTensor:
    c11: float
    c12: float
    c22: float

    def __post_init__(self):
        if not (self.c11 > 0 and self.c11 * self.c22 - self.c12 ** 2 > 0):
            raise InvalidTensor(f"tensor ({self.c11}, {self.c12}, {self.c22}) is not positive definite")

    @property
    def det(self) -> float:
        return self.c11 * self.c22 - self.c12 ** 2

    def unimodular(self) -> "CauchyGreenTensor":
        s = 1.0 / math.sqrt(self.det)
        return CauchyGreenTensor(self.c11 * s, self.c12 * s, self.c22 * s)


def cauchy_green_to_point(C: CauchyGreenTensor) -> HalfPlanePoint:
    """z = (C12 + i sqrt(det C)) / C11; depends only on the unimodular part of C."""
    if not isinstance(C, CauchyGreenTensor):
        C = CauchyGreenTensor(*C)
    return HalfPlanePoint(C.c12 / C.c11, math.sqrt(C.det) / C.c11)


@dataclass(frozen=True)
class LatticeBasis:
    w1: tuple
    w2: tuple
    density: float = 1.0

    def __post_init__(self):
        if not self.density > 0:
            raise ValueError("density must be positive")
        det = self.w1[0] * self.w2[1] - self.w1[1] * self.w2[0]
        if abs(abs(det) - self.density) > 1e-12 * self.density:
            raise ValueError(f"|det(w1, w2)| = {abs(det)} does not match density {self.density}")
        if self.ratio().imag <= 0:
            raise ValueError("w2/w1 must lie in the upper half-plane")

    def ratio(self) -> complex:
        return complex(*self.w2) / complex(*self.w1)

    def to_point(self) -> HalfPlanePoint:
        return as_point(self.ratio())

    def vectors(self, radius: int) -> Iterable[tuple[float, float]]:
        for m in range(-radius, radius + 1):
            for n in range(-radius, radius + 1):
                yield (m * self.w2[0] + n * self.w1[0], m * self.w2[1] + n * self.w1[1])


def point_to_basis(z: PointLike, rho: float = 1.0) -> LatticeBasis:
    """Basis sqrt(rho/y) * ((1, 0), (x, y)) of the lattice with shape z and density rho."""
    p = as_point(z)
    if not rho > 0:
        raise ValueError("density must be positive")
    s = math.sqrt(rho / p.y)
    return LatticeBasis((s, 0.0), (s * p.x, s * p.y), rho)
