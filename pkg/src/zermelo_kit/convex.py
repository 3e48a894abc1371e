"""Strictly convex compact velocity sets.

Every set exposes the same small surface: support function, the unique
support maximizer, membership classification through the gauge, the largest
scale factor along a ray, and a boundary chart (point and two derivatives in
the chart parameter) with the curvature margin that certifies strict
convexity. Disks and ellipses get closed forms; polar curves run a guarded
Newton iteration with a golden-section fallback; shifted sets wrap a base set
lazily so that U + s stays exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Callable

from .errors import RayMisses, StrictConvexityViolated, ZeroCostate
from .plane import Vec2

_TWO_PI = 2.0 * math.pi


class Region(Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class BoundaryChart:
    """Boundary point with chart derivatives at a parameter angle."""

    theta: float
    point: Vec2
    velocity: Vec2        # d(point)/d(theta)
    acceleration: Vec2    # d^2(point)/d(theta)^2
    delta: float          # curvature margin indicator <perp(u_t), u_tt>


@dataclass(frozen=True)
class ConvexityReport:
    min_abs_delta: float
    ok: bool
    sign_change: bool


class ControlSet:
    """Common operations; subclasses provide the scalar fast paths."""

    # -- scalar fast paths (floats in, floats out; hot inside integrators) --

    def support_xy(self, p1: float, p2: float) -> float:
        raise NotImplementedError

    def maximizer_xy(self, p1: float, p2: float) -> tuple[float, float]:
        raise NotImplementedError

    def classify_xy(self, u1: float, u2: float) -> float:
        """Gauge-style membership indicator: <1 inside, =1 boundary, >1 outside."""
        raise NotImplementedError

    def chart_xy(self, theta: float) -> tuple[float, float, float, float, float, float]:
        """Boundary point and first two chart derivatives (u1,u2,t1,t2,tt1,tt2)."""
        raise NotImplementedError

    def chart_angle_xy(self, u1: float, u2: float) -> float:
        """Chart parameter of the boundary point nearest in angle to u."""
        raise NotImplementedError

    # -- public API -----------------------------------------------------

    def support(self, p: Vec2) -> float:
        return self.support_xy(p.x1, p.x2)

    def maximizer(self, p: Vec2) -> Vec2:
        if p.x1 == 0.0 and p.x2 == 0.0:
            raise ZeroCostate("maximizer is not unique for p = 0")
        return Vec2(*self.maximizer_xy(p.x1, p.x2))

    def contains(self, u: Vec2, tol: float = 1e-9) -> Region:
        if tol <= 0.0:
            raise ValueError("tol must be positive")
        g = self.classify_xy(u.x1, u.x2)
        if g < 1.0 - tol:
            return Region.INSIDE
        if g <= 1.0 + tol:
            return Region.BOUNDARY
        return Region.OUTSIDE

    def boundary_radius_bound(self, n: int = 64) -> float:
        """Cheap over-approximation of max |boundary point| plus one."""
        r = 0.0
        for k in range(n):
            u1, u2, *_ = self.chart_xy(_TWO_PI * k / n)
            r = max(r, math.hypot(u1, u2))
        return r + 1.0

    def gauge_along(self, d: Vec2, tol_scale: float = 1e-12) -> float:
        """Largest lam >= 0 with lam*d in the set, for a unit direction d.

        Bisection between a point known inside and the radius bound. Returns
        0.0 when the set only touches the origin along this ray; raises
        RayMisses when the positive ray never meets the set.
        """
        if abs(d.norm() - 1.0) > 1e-9:
            raise ValueError("direction must be a unit vector")
        r_max = self.boundary_radius_bound()
        tol = tol_scale * r_max
        lam_in = None
        if self.classify_xy(0.0, 0.0) < 1.0:
            lam_in = 0.0
        else:
            # origin not interior: scan for any point of the ray inside
            for k in range(1, 257):
                lam = r_max * k / 256.0
                if self.classify_xy(lam * d.x1, lam * d.x2) <= 1.0:
                    lam_in = lam
                    break
            if lam_in is None:
                g0 = self.classify_xy(0.0, 0.0)
                if g0 <= 1.0 + 1e-9:
                    return 0.0  # degenerate touch at the origin
                raise RayMisses("ray from origin never enters the set")
        lo, hi = lam_in, r_max
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self.classify_xy(mid * d.x1, mid * d.x2) <= 1.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def polar_data(self, theta: float) -> BoundaryChart:
        u1, u2, t1, t2, tt1, tt2 = self.chart_xy(theta)
        if math.hypot(t1, t2) == 0.0:
            raise ValueError("singular boundary parametrization")
        delta = -t2 * tt1 + t1 * tt2  # <perp(u_t), u_tt>
        return BoundaryChart(theta, Vec2(u1, u2), Vec2(t1, t2),
                             Vec2(tt1, tt2), delta)

    def verify_strict_convexity(self, n_samples: int = 256) -> ConvexityReport:
        if n_samples < 64:
            raise ValueError("need at least 64 samples")
        min_abs = math.inf
        pos = neg = False
        scale = 0.0
        for k in range(n_samples):
            chart = self.polar_data(_TWO_PI * k / n_samples)
            min_abs = min(min_abs, abs(chart.delta))
            pos |= chart.delta > 0.0
            neg |= chart.delta < 0.0
            scale = max(scale, chart.point.norm())
        sign_change = pos and neg
        ok = (min_abs > 1e-9 * scale * scale) and not sign_change
        return ConvexityReport(min_abs, ok, sign_change)

    def fenchel_residual(self, u: Vec2, p: Vec2) -> float:
        """Support gap sigma(p) - <p,u>; zero exactly when p is normal at u."""
        return self.support_xy(p.x1, p.x2) - (p.x1 * u.x1 + p.x2 * u.x2)

    def outward_normal(self, theta: float) -> Vec2:
        """Unit outward normal at the boundary point of the chart angle."""
        _, _, t1, t2, _, _ = self.chart_xy(theta)
        n = math.hypot(t1, t2)
        return Vec2(t2 / n, -t1 / n)

    @cached_property
    def convexity_report(self) -> ConvexityReport:
        return self.verify_strict_convexity()

    def require_strictly_convex(self) -> None:
        if not self.convexity_report.ok:
            raise StrictConvexityViolated(
                f"curvature margin check failed: {self.convexity_report}")


@dataclass(frozen=True)
class Disk(ControlSet):
    """All headings at top speed V: the classical round velocity set."""

    V: float

    def __post_init__(self):
        if not (self.V > 0.0 and math.isfinite(self.V)):
            raise ValueError("V must be positive and finite")

    def support_xy(self, p1, p2):
        return self.V * math.hypot(p1, p2)

    def maximizer_xy(self, p1, p2):
        r = math.hypot(p1, p2)
        return self.V * p1 / r, self.V * p2 / r

    def classify_xy(self, u1, u2):
        return math.hypot(u1, u2) / self.V

    def chart_xy(self, theta):
        c, s = math.cos(theta), math.sin(theta)
        v = self.V
        return v * c, v * s, -v * s, v * c, -v * c, -v * s

    def chart_angle_xy(self, u1, u2):
        return math.atan2(u2, u1)


@dataclass(frozen=True)
class Ellipse(ControlSet):
    """Axis-aligned ellipse with semi-axes r1, r2."""

    r1: float
    r2: float

    def __post_init__(self):
        if not (self.r1 > 0.0 and self.r2 > 0.0):
            raise ValueError("semi-axes must be positive")

    def support_xy(self, p1, p2):
        return math.hypot(self.r1 * p1, self.r2 * p2)

    def maximizer_xy(self, p1, p2):
        sigma = math.hypot(self.r1 * p1, self.r2 * p2)
        return self.r1 * self.r1 * p1 / sigma, self.r2 * self.r2 * p2 / sigma

    def classify_xy(self, u1, u2):
        return math.hypot(u1 / self.r1, u2 / self.r2)

    def chart_xy(self, theta):
        c, s = math.cos(theta), math.sin(theta)
        r1, r2 = self.r1, self.r2
        return r1 * c, r2 * s, -r1 * s, r2 * c, -r1 * c, -r2 * s

    def chart_angle_xy(self, u1, u2):
        return math.atan2(u2 / self.r2, u1 / self.r1)


@dataclass(frozen=True)
class PolarCurve(ControlSet):
    """Set bounded by a polar curve r = V(theta) with supplied derivatives.

    The boundary must be strictly convex (delta = V^2 + 2 V'^2 - V V'' of one
    sign); construction does not enforce it, verify_strict_convexity does.
    """

    V: Callable[[float], float]
    dV: Callable[[float], float]
    d2V: Callable[[float], float]

    def chart_xy(self, theta):
        c, s = math.cos(theta), math.sin(theta)
        v, vp, vpp = self.V(theta), self.dV(theta), self.d2V(theta)
        return (v * c, v * s,
                vp * c - v * s, vp * s + v * c,
                (vpp - v) * c - 2.0 * vp * s, (vpp - v) * s + 2.0 * vp * c)

    def classify_xy(self, u1, u2):
        return math.hypot(u1, u2) / self.V(math.atan2(u2, u1))

    def chart_angle_xy(self, u1, u2):
        return math.atan2(u2, u1)

    def _argmax_angle(self, p1, p2):
        """Angle of the boundary point maximizing <p, u(theta)>.

        Newton on the stationarity condition <p, u_theta> = 0 from the
        costate angle; falls back to a coarse scan plus golden section when
        Newton leaves the concave basin (possible for eccentric curves).
        """
        theta = math.atan2(p2, p1)
        ok = False
        for _ in range(50):
            _, _, t1, t2, tt1, tt2 = self.chart_xy(theta)
            g = p1 * t1 + p2 * t2
            gp = p1 * tt1 + p2 * tt2
            if gp == 0.0:
                break
            step = g / gp
            theta -= step
            if abs(step) < 1e-14:
                ok = gp < 0.0  # stationary point must be the maximum
                break
        if ok:
            return theta
        # Fallback: bracket the global maximum on a 64-point grid.
        best_k, best_v = 0, -math.inf
        for k in range(64):
            th = _TWO_PI * k / 64.0
            u1, u2, *_ = self.chart_xy(th)
            val = p1 * u1 + p2 * u2
            if val > best_v:
                best_k, best_v = k, val
        lo = _TWO_PI * (best_k - 1) / 64.0
        hi = _TWO_PI * (best_k + 1) / 64.0
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        a, b = lo, hi
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc = self._support_at(p1, p2, c)
        fd = self._support_at(p1, p2, d)
        while b - a > 1e-13:
            if fc > fd:
                b, d, fd = d, c, fc
                c = b - invphi * (b - a)
                fc = self._support_at(p1, p2, c)
            else:
                a, c, fc = c, d, fd
                d = a + invphi * (b - a)
                fd = self._support_at(p1, p2, d)
        return 0.5 * (a + b)

    def _support_at(self, p1, p2, theta):
        u1, u2, *_ = self.chart_xy(theta)
        return p1 * u1 + p2 * u2

    def support_xy(self, p1, p2):
        if p1 == 0.0 and p2 == 0.0:
            return 0.0
        return self._support_at(p1, p2, self._argmax_angle(p1, p2))

    def maximizer_xy(self, p1, p2):
        u1, u2, *_ = self.chart_xy(self._argmax_angle(p1, p2))
        return u1, u2


@dataclass(frozen=True)
class Shifted(ControlSet):
    """Base set translated by a fixed offset; realizes U + s exactly."""

    base: ControlSet
    offset: Vec2

    def support_xy(self, p1, p2):
        return (self.base.support_xy(p1, p2)
                + p1 * self.offset.x1 + p2 * self.offset.x2)

    def maximizer_xy(self, p1, p2):
        u1, u2 = self.base.maximizer_xy(p1, p2)
        return u1 + self.offset.x1, u2 + self.offset.x2

    def classify_xy(self, u1, u2):
        return self.base.classify_xy(u1 - self.offset.x1, u2 - self.offset.x2)

    def chart_xy(self, theta):
        u1, u2, t1, t2, tt1, tt2 = self.base.chart_xy(theta)
        return u1 + self.offset.x1, u2 + self.offset.x2, t1, t2, tt1, tt2

    def chart_angle_xy(self, u1, u2):
        return self.base.chart_angle_xy(u1 - self.offset.x1,
                                        u2 - self.offset.x2)

    def verify_strict_convexity(self, n_samples: int = 256) -> ConvexityReport:
        return self.base.verify_strict_convexity(n_samples)


def egg(v0: float, e: float) -> PolarCurve:
    """Smooth fore-aft asymmetric set: V(theta) = v0 (1 + e cos theta).

    Eccentricities up to about one half keep the boundary strictly convex;
    construction verifies and rejects anything flatter.
    """
    if v0 <= 0.0:
        raise ValueError("v0 must be positive")
    if e < 0.0:
        raise ValueError("eccentricity must be nonnegative")
    curve = PolarCurve(
        V=lambda th: v0 * (1.0 + e * math.cos(th)),
        dV=lambda th: -v0 * e * math.sin(th),
        d2V=lambda th: -v0 * e * math.cos(th),
    )
    curve.require_strictly_convex()
    return curve
