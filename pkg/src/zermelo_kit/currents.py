"""Current fields, their Jacobians, and reachability diagnostics.

Constant and affine fields carry exact Jacobians; analytic fields fall back
to central finite differences unless a Jacobian callable is supplied. The two
diagnostics quantify when the drift is weak enough to guarantee a route
(weak-current margin) and whether the vehicle can hold position at the target
(permanence).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .convex import ControlSet, Region
from .errors import OriginOutside
from .plane import Mat2, Vec2


class CurrentField:
    """Drift velocity s(x) with spatial Jacobian ds_i/dx_j."""

    def velocity_xy(self, x1: float, x2: float) -> tuple[float, float]:
        raise NotImplementedError

    def jacobian_xy(self, x1: float, x2: float) -> tuple[float, float, float, float]:
        """Entries (s11, s12, s21, s22) with s_ij = ds_i/dx_j."""
        raise NotImplementedError

    def at(self, x: Vec2) -> Vec2:
        return Vec2(*self.velocity_xy(x.x1, x.x2))

    def jacobian(self, x: Vec2) -> Mat2:
        return Mat2(*self.jacobian_xy(x.x1, x.x2))


@dataclass(frozen=True)
class Constant(CurrentField):
    b: Vec2

    def velocity_xy(self, x1, x2):
        return self.b.x1, self.b.x2

    def jacobian_xy(self, x1, x2):
        return 0.0, 0.0, 0.0, 0.0


@dataclass(frozen=True)
class Affine(CurrentField):
    """s(x) = D x + b."""

    D: Mat2
    b: Vec2

    def velocity_xy(self, x1, x2):
        d = self.D
        return (d.m11 * x1 + d.m12 * x2 + self.b.x1,
                d.m21 * x1 + d.m22 * x2 + self.b.x2)

    def jacobian_xy(self, x1, x2):
        d = self.D
        return d.m11, d.m12, d.m21, d.m22


@dataclass(frozen=True)
class Analytic(CurrentField):
    """Arbitrary smooth field given as a callable, Jacobian optional.

    `box` declares the region the field will be evaluated on;
    `sampled_lipschitz` estimates the Lipschitz constant there, which is the
    caller's evidence that trajectories stay well-posed.
    """

    fn: Callable[[float, float], tuple[float, float]]
    jac: Optional[Callable[[float, float], tuple[float, float, float, float]]] = None
    box: Optional["RegionBox"] = None

    def sampled_lipschitz(self, n: int = 256) -> float:
        if self.box is None:
            raise ValueError("declare a sampling box first")
        side = max(2, math.ceil(math.sqrt(n)))
        lo, hi = self.box.lower, self.box.upper
        worst = 0.0
        for i in range(side):
            for j in range(side):
                x1 = lo.x1 + (hi.x1 - lo.x1) * i / (side - 1)
                x2 = lo.x2 + (hi.x2 - lo.x2) * j / (side - 1)
                j11, j12, j21, j22 = self.jacobian_xy(x1, x2)
                # operator norm bounded by the Frobenius norm
                worst = max(worst, math.sqrt(j11 * j11 + j12 * j12
                                             + j21 * j21 + j22 * j22))
        return worst

    def velocity_xy(self, x1, x2):
        return self.fn(x1, x2)

    def jacobian_xy(self, x1, x2):
        if self.jac is not None:
            return self.jac(x1, x2)
        # central differences; step balances truncation against roundoff
        h = 1e-6 * (1.0 + math.hypot(x1, x2))
        sxp = self.fn(x1 + h, x2)
        sxm = self.fn(x1 - h, x2)
        syp = self.fn(x1, x2 + h)
        sym = self.fn(x1, x2 - h)
        inv = 0.5 / h
        return ((sxp[0] - sxm[0]) * inv, (syp[0] - sym[0]) * inv,
                (sxp[1] - sxm[1]) * inv, (syp[1] - sym[1]) * inv)


@dataclass(frozen=True)
class RegionBox:
    """Axis-aligned navigation area used by the weak-current check."""

    lower: Vec2
    upper: Vec2

    def __post_init__(self):
        if not (self.lower.x1 < self.upper.x1 and self.lower.x2 < self.upper.x2):
            raise ValueError("lower must be strictly below upper componentwise")


@dataclass(frozen=True)
class WeakCurrentReport:
    epsilon: float   # inradius of the velocity set about the origin
    delta: float     # max sampled drift magnitude over the box
    ok: bool

    @property
    def margin(self) -> float:
        return self.epsilon - self.delta


def weak_current_check(field: CurrentField, control_set: ControlSet,
                       region: RegionBox, n: int = 256) -> WeakCurrentReport:
    """Compare the set's inradius with the largest drift over the box.

    A positive margin guarantees the vehicle can make headway in every
    direction everywhere in the box. Connectivity of the navigation area is
    assumed, not checked.
    """
    if n < 100:
        raise ValueError("need at least 100 sample points")
    if control_set.contains(Vec2(0.0, 0.0)) is not Region.INSIDE:
        raise OriginOutside("origin must be interior to the velocity set")
    n_dirs = n + (-n) % 4  # multiple of 4 so the axes are sampled exactly
    epsilon = math.inf
    for k in range(n_dirs):
        ang = 2.0 * math.pi * k / n_dirs
        d = Vec2(math.cos(ang), math.sin(ang))
        epsilon = min(epsilon, control_set.gauge_along(d))
    side = max(2, math.ceil(math.sqrt(n)))
    delta = 0.0
    for i in range(side):
        for j in range(side):
            x1 = region.lower.x1 + (region.upper.x1 - region.lower.x1) * i / (side - 1)
            x2 = region.lower.x2 + (region.upper.x2 - region.lower.x2) * j / (side - 1)
            delta = max(delta, math.hypot(*field.velocity_xy(x1, x2)))
    # require a margin beyond gauge-bisection noise so the exact boundary
    # case epsilon == delta is flagged, not passed
    ok = epsilon - delta > 1e-9 * max(epsilon, delta)
    return WeakCurrentReport(epsilon, delta, ok)


def permanence_check(field: CurrentField, control_set: ControlSet,
                     target_points: Sequence[Vec2]) -> bool:
    """True when the vehicle can cancel the drift at every target point."""
    for x in target_points:
        s1, s2 = field.velocity_xy(x.x1, x.x2)
        if control_set.contains(Vec2(-s1, -s2)) is Region.OUTSIDE:
            return False
    return True
