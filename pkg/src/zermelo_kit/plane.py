"""Exact planar vector and matrix algebra for the navigation equations.

Deliberately small: the solvers only ever need 2-D values, the perpendicular
operator and a handful of identities built on it. Heavy array work happens in
numpy inside the integrators; these types are the precise, unit-carrying
currency at module boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ZeroSpeed


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} components must be finite, got {values}")


@dataclass(frozen=True)
class Vec2:
    """Planar vector; used for positions, velocities and costates."""

    x1: float
    x2: float

    def __post_init__(self):
        _require_finite("Vec2", self.x1, self.x2)

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x1 + other.x1, self.x2 + other.x2)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x1 - other.x1, self.x2 - other.x2)

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x1, -self.x2)

    def __mul__(self, scalar: float) -> "Vec2":
        return Vec2(self.x1 * scalar, self.x2 * scalar)

    __rmul__ = __mul__

    def dot(self, other: "Vec2") -> float:
        return self.x1 * other.x1 + self.x2 * other.x2

    def norm(self) -> float:
        return math.hypot(self.x1, self.x2)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x1, self.x2)


@dataclass(frozen=True)
class Mat2:
    """2x2 matrix; used for current Jacobians."""

    m11: float
    m12: float
    m21: float
    m22: float

    def __post_init__(self):
        _require_finite("Mat2", self.m11, self.m12, self.m21, self.m22)

    def matvec(self, v: Vec2) -> Vec2:
        return Vec2(self.m11 * v.x1 + self.m12 * v.x2,
                    self.m21 * v.x1 + self.m22 * v.x2)

    def tmatvec(self, v: Vec2) -> Vec2:
        """Transpose-times-vector, without materializing the transpose."""
        return Vec2(self.m11 * v.x1 + self.m21 * v.x2,
                    self.m12 * v.x1 + self.m22 * v.x2)

    def transpose(self) -> "Mat2":
        return Mat2(self.m11, self.m21, self.m12, self.m22)

    @staticmethod
    def zero() -> "Mat2":
        return Mat2(0.0, 0.0, 0.0, 0.0)

    @staticmethod
    def identity() -> "Mat2":
        return Mat2(1.0, 0.0, 0.0, 1.0)


def perp(a: Vec2) -> Vec2:
    """Rotate a quarter turn counterclockwise: (a1, a2) -> (-a2, a1)."""
    return Vec2(-a.x2, a.x1)


def cross(a: Vec2, b: Vec2) -> float:
    """Scalar cross product a1*b2 - a2*b1 = <perp(a), b>."""
    return a.x1 * b.x2 - a.x2 * b.x1


def curvature(u_prime: Vec2, u_second: Vec2) -> float:
    """Curvature of a planar curve from its first two derivatives.

    Raises ZeroSpeed when the parametrization is singular (|u'| = 0).
    """
    speed = u_prime.norm()
    if speed == 0.0:
        raise ZeroSpeed("curvature undefined where |u'| = 0")
    num = abs(u_second.x1 * u_prime.x2 - u_prime.x1 * u_second.x2)
    return num / speed**3
