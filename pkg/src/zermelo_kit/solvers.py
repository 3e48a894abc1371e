"""Top-level minimum-time solution strategies.

Four independent routes to the same answer, used to cross-check each other:

* ``shoot``            -- costate-angle scan + bisection on the signed
                          cross-track miss, full first-order machinery.
* ``constant_current_route`` -- geometric ray construction for constant
                          drift, where optimal trajectories are straight.
* ``affine_elliptic_example`` -- closed forms for the elliptic set under the
                          anisotropic linear drift (both signs).
* ``brute_force_min_time`` -- semi-Lagrangian value iteration on a grid,
                          a slow but assumption-free oracle.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field as dataclass_field
from typing import Optional, Union

import numpy as np

from .convex import ControlSet, Shifted
from .currents import Affine, Constant, CurrentField, RegionBox
from .dynamics import (Diagnostics, PmpTrajectory, TerminalEvent,
                       compute_diagnostics, integrate_pmp, pmp_rhs,
                       solve_to_target, _sample_grid)
from .errors import (NoHit, NoRoot, NotConverged, RayMisses,
                     StartOutsideGrid, TargetUnreachable, Unreachable)
from .plane import Vec2

BIG = 1e8  # value-iteration placeholder for "not yet reached"

log = logging.getLogger("zermelo.solvers")


# ----------------------------------------------------------------------
# scenario data model
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class PointStart:
    point: Vec2


@dataclass(frozen=True)
class SegmentStart:
    a: Vec2
    b: Vec2

    def at(self, sigma: float) -> Vec2:
        return Vec2(self.a.x1 + sigma * (self.b.x1 - self.a.x1),
                    self.a.x2 + sigma * (self.b.x2 - self.a.x2))


Start = Union[PointStart, SegmentStart]


@dataclass(frozen=True)
class Target:
    point: Vec2
    radius: float = 1e-6


@dataclass(frozen=True)
class Tolerances:
    n_scan_angles: int = 720
    angle_tol: float = 1e-12
    scan_rtol: float = 1e-6
    scan_atol: float = 1e-9


@dataclass(frozen=True)
class Scenario:
    start: Start
    target: Target
    control_set: ControlSet
    field: CurrentField
    horizon: float
    tolerances: Tolerances = Tolerances()
    name: str = ""

    def __post_init__(self):
        if self.horizon <= 0.0:
            raise ValueError("horizon must be positive")
        if isinstance(self.start, PointStart):
            gap = (self.start.point - self.target.point).norm()
        else:
            gap = _point_segment_distance(self.target.point,
                                          self.start.a, self.start.b)
        if gap <= self.target.radius:
            raise ValueError("start and target must be disjoint")


def _point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> float:
    ab = b - a
    denom = ab.dot(ab)
    sigma = 0.0 if denom == 0.0 else max(0.0, min(1.0, (p - a).dot(ab) / denom))
    closest = Vec2(a.x1 + sigma * ab.x1, a.x2 + sigma * ab.x2)
    return (p - closest).norm()


@dataclass
class SolveResult:
    t_f: float
    trajectory: PmpTrajectory
    diagnostics: Diagnostics
    solver_id: str
    candidates: list = dataclass_field(default_factory=list)
    transversality: float = 0.0
    t_f_slack: float = 0.0  # one-sided bias from stopping at the ball edge


# ----------------------------------------------------------------------
# costate-angle shooting
# ----------------------------------------------------------------------

def _probe(control_set, field, x0: Vec2, phi: float, horizon: float,
           target: Vec2, radius: float, rtol: float, atol: float):
    """One scan integration: (miss, signed cross-track, hit time or None).

    The signed cross-track is the component of the miss vector at closest
    approach perpendicular to the net velocity; it changes sign as the
    trajectory family sweeps past the target, which is what the angle
    bisection needs.
    """
    mx = control_set.maximizer_xy
    vel = field.velocity_xy
    bx, by = target.x1, target.x2
    rhs = pmp_rhs(control_set, field)
    y0 = (x0.x1, x0.x2, math.cos(phi), math.sin(phi))
    sol, hit_time = solve_to_target(rhs, y0, horizon, target, radius,
                                    rtol, atol)
    t_end = hit_time if hit_time is not None else float(sol.t[-1])

    ts = np.linspace(0.0, t_end, 400)
    xy = sol.sol(ts)[:2]
    d2 = (xy[0] - bx) ** 2 + (xy[1] - by) ** 2
    i = int(np.argmin(d2))

    # two parabola refinements of the closest-approach time
    t_star = ts[i]
    h = ts[1] - ts[0] if ts.size > 1 else t_end
    for _ in range(2):
        ta, tb, tc = max(t_star - h, 0.0), t_star, min(t_star + h, t_end)
        fa = float(np.sum((sol.sol(ta)[:2] - (bx, by)) ** 2))
        fb = float(np.sum((sol.sol(tb)[:2] - (bx, by)) ** 2))
        fc = float(np.sum((sol.sol(tc)[:2] - (bx, by)) ** 2))
        denom = (fa - 2.0 * fb + fc)
        if denom > 0.0:
            shift = 0.5 * (fa - fc) / denom * h
            t_star = min(max(tb + shift, 0.0), t_end)
        h *= 0.1

    y = sol.sol(t_star)
    u1, u2 = mx(y[2], y[3])
    s1, s2 = vel(y[0], y[1])
    v1, v2 = u1 + s1, u2 + s2
    vn = math.hypot(v1, v2) or 1.0
    m1, m2 = y[0] - bx, y[1] - by
    cross_track = (-v2 * m1 + v1 * m2) / vn
    return math.hypot(m1, m2), cross_track, hit_time


def shoot(scenario: Scenario, n_angles: Optional[int] = None) -> SolveResult:
    """Scan initial costate angles, bisect sign changes of the cross-track
    miss, and return the fastest trajectory that enters the target ball."""
    if isinstance(scenario.start, SegmentStart):
        return _shoot_segment(scenario, n_angles)
    x0 = scenario.start.point
    tol = scenario.tolerances
    n = n_angles or tol.n_scan_angles
    target, radius = scenario.target.point, scenario.target.radius
    cs, fld, horizon = scenario.control_set, scenario.field, scenario.horizon
    cs.require_strictly_convex()

    def probe(phi, precise):
        rtol = 1e-9 if precise else tol.scan_rtol
        atol = 1e-12 if precise else tol.scan_atol
        return _probe(cs, fld, x0, phi, horizon, target, radius, rtol, atol)

    phis = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    coarse = [probe(phi, precise=False) for phi in phis]

    candidates = []  # (phi, t_f)
    best_miss, best_angle = math.inf, float("nan")
    seen = []

    def add_candidate(phi):
        for prev in seen:
            if abs(phi - prev) < 1e-9:
                return
        miss, _, hit_time = probe(phi, precise=True)
        if hit_time is not None:
            seen.append(phi)
            candidates.append((phi, hit_time))

    for i in range(n):
        j = (i + 1) % n
        miss_i, ct_i, hit_i = coarse[i]
        miss_j, ct_j, _ = coarse[j]
        if miss_i < best_miss:
            best_miss, best_angle = miss_i, float(phis[i])
        if hit_i is not None:
            add_candidate(float(phis[i]))
        if ct_i == 0.0 or ct_i * ct_j >= 0.0:
            continue
        lo = float(phis[i])
        hi = float(phis[j]) if j != 0 else 2.0 * math.pi
        ct_lo = ct_i
        while hi - lo > tol.angle_tol:
            mid = 0.5 * (lo + hi)
            _, ct_mid, _ = probe(mid, precise=True)
            if ct_mid == 0.0:
                lo = hi = mid
            elif ct_lo * ct_mid < 0.0:
                hi = mid
            else:
                lo, ct_lo = mid, ct_mid
        add_candidate(0.5 * (lo + hi))

    if not candidates:
        raise NoHit(f"no costate angle reaches the target "
                    f"(best miss {best_miss:.3e})", best_miss, best_angle)
    candidates.sort(key=lambda c: c[1])
    phi_best = candidates[0][0]
    traj = integrate_pmp(cs, fld, x0, phi_best, horizon, target, radius)
    if not traj.event.hit:
        raise NoHit("refined angle no longer reaches the target",
                    best_miss, phi_best)
    diags = compute_diagnostics(traj, cs, fld)
    s_end = fld.velocity_xy(traj.x[-1, 0], traj.x[-1, 1])
    v_end = math.hypot(traj.u[-1, 0] + s_end[0], traj.u[-1, 1] + s_end[1])
    slack = radius / max(v_end, 1e-12)
    return SolveResult(traj.event.t_f, traj, diags, "shoot", candidates,
                       t_f_slack=slack)


def _shoot_segment(scenario: Scenario, n_angles: Optional[int]) -> SolveResult:
    """Outer golden-section over the start parameter, inner point shoot.

    Unimodality of t_f along the start segment is assumed after a coarse
    bracketing scan, mirroring the geometric construction used for constant
    currents.
    """
    seg = scenario.start

    def solve_from(sigma: float) -> SolveResult:
        inner = Scenario(PointStart(seg.at(sigma)), scenario.target,
                         scenario.control_set, scenario.field,
                         scenario.horizon, scenario.tolerances,
                         scenario.name)
        return shoot(inner, n_angles)

    def time_at(sigma: float) -> float:
        try:
            return solve_from(sigma).t_f
        except NoHit:
            return math.inf

    sigma_best = _golden_min(time_at, n_coarse=13, tol=1e-6)
    result = solve_from(sigma_best)
    p0 = Vec2(result.trajectory.p[0, 0], result.trajectory.p[0, 1])
    x0 = seg.at(sigma_best)
    result.transversality = transversality_residual(
        p0, seg, PointStart(scenario.target.point), x0, scenario.target.point)
    result.candidates = [(sigma_best, result.t_f)]
    return result


def _golden_min(f, n_coarse: int, tol: float, lo: float = 0.0,
                hi: float = 1.0) -> float:
    """Golden-section minimum of a scalar function on [lo, hi] after a coarse
    scan locates the bracketing interval."""
    grid = np.linspace(lo, hi, n_coarse)
    vals = [f(s) for s in grid]
    i = int(np.argmin(vals))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, n_coarse - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


# ----------------------------------------------------------------------
# constant-current geometric routing
# ----------------------------------------------------------------------

def _straight_route(control_set: ControlSet, s: Vec2, x0: Vec2,
                    target: Target):
    """Ray construction: scale the unit chord direction into U + s."""
    chord = target.point - x0
    dist = chord.norm()
    d = Vec2(chord.x1 / dist, chord.x2 / dist)
    shifted = Shifted(control_set, s)
    try:
        lam = shifted.gauge_along(d)
    except RayMisses as exc:
        raise Unreachable(f"net motion toward target impossible: {exc}") from exc
    if lam <= 0.0:
        raise Unreachable("drift cancels all speed along the chord")
    t_f = dist / lam
    u = Vec2(lam * d.x1 - s.x1, lam * d.x2 - s.x2)
    theta = control_set.chart_angle_xy(u.x1, u.x2)
    p = control_set.outward_normal(theta)
    return t_f, u, p


def _synthesize_straight(x0: Vec2, u: Vec2, s: Vec2, p: Vec2, t_f: float,
                         horizon: float, costate_angle: float) -> PmpTrajectory:
    ts = _sample_grid(t_f, horizon)
    v = Vec2(u.x1 + s.x1, u.x2 + s.x2)
    x = np.empty((ts.size, 2))
    x[:, 0] = x0.x1 + ts * v.x1
    x[:, 1] = x0.x2 + ts * v.x2
    pa = np.tile((p.x1, p.x2), (ts.size, 1))
    ua = np.tile((u.x1, u.x2), (ts.size, 1))
    traj = PmpTrajectory(ts, x, pa, ua, TerminalEvent(True, t_f),
                         costate_angle=costate_angle)
    traj.p0 = 0  # constant control: the detA classification is degenerate
    return traj


def constant_current_route(scenario: Scenario) -> SolveResult:
    """Optimal routing under a constant drift: straight runs at the boundary
    velocity whose shifted-set normal certifies optimality; segment starts
    are scanned with golden section and certified by transversality."""
    if not isinstance(scenario.field, Constant):
        raise ValueError("constant_current_route requires a constant field")
    s = scenario.field.b
    cs = scenario.control_set

    if isinstance(scenario.start, PointStart):
        x0 = scenario.start.point
        t_f, u, p = _straight_route(cs, s, x0, scenario.target)
        angle = math.atan2(p.x2, p.x1)
        traj = _synthesize_straight(x0, u, s, p, t_f, scenario.horizon, angle)
        diags = compute_diagnostics(traj, cs, scenario.field)
        return SolveResult(t_f, traj, diags, "constant", [(angle, t_f)])

    seg = scenario.start

    def time_at(sigma: float) -> float:
        try:
            t_f, _, _ = _straight_route(cs, s, seg.at(sigma),
                                        scenario.target)
            return t_f
        except Unreachable:
            return math.inf

    sigma_best = _golden_min(time_at, n_coarse=33, tol=1e-10)
    x0 = seg.at(sigma_best)
    t_f, u, p = _straight_route(cs, s, x0, scenario.target)
    if not math.isfinite(t_f):
        raise Unreachable("no start point on the segment can reach the target")
    angle = math.atan2(p.x2, p.x1)
    traj = _synthesize_straight(x0, u, s, p, t_f, scenario.horizon, angle)
    diags = compute_diagnostics(traj, cs, scenario.field)
    resid = transversality_residual(p, seg, PointStart(scenario.target.point),
                                    x0, scenario.target.point)
    return SolveResult(t_f, traj, diags, "constant",
                       [(sigma_best, t_f)], transversality=resid)


# ----------------------------------------------------------------------
# transversality
# ----------------------------------------------------------------------

def _cone_deviation(p: Vec2, desc: Start, x: Vec2) -> float:
    """Angular distance (radians) from p to the normal cone of the start or
    target descriptor at x. Points have normal cone R^2: deviation zero."""
    if isinstance(desc, PointStart):
        return 0.0
    ab = desc.b - desc.a
    length = ab.norm()
    if length == 0.0:
        return 0.0
    e = Vec2(ab.x1 / length, ab.x2 / length)
    pn = p.norm()
    if pn == 0.0:
        return 0.0
    ph = Vec2(p.x1 / pn, p.x2 / pn)
    sigma = (x - desc.a).dot(e) / length
    along = ph.dot(e)
    endpoint_tol = 1e-9
    if sigma <= endpoint_tol:       # at a: segment extends along +e
        inward = along
    elif sigma >= 1.0 - endpoint_tol:  # at b: segment extends along -e
        inward = -along
    else:
        return math.asin(min(1.0, abs(along)))
    # endpoint cone is the half-plane of directions not pointing inward
    return math.asin(min(1.0, max(0.0, inward)))


def transversality_residual(p: Vec2, start_desc: Start, end_desc: Start,
                            x0: Vec2, xf: Vec2) -> float:
    """Sum of angular deviations of the multiplier from the admissible
    normal cones at departure and arrival."""
    return (_cone_deviation(p, start_desc, x0)
            + _cone_deviation(-p, end_desc, xf))


# ----------------------------------------------------------------------
# elliptic closed-form example
# ----------------------------------------------------------------------

@dataclass
class ExampleResult:
    """Everything the closed-form elliptic construction produces."""

    eps: float
    a: float
    sign: str                      # "upstream" | "downstream"
    target: Vec2
    t_const: float
    u_const: Vec2
    roots_C: list
    E_values: list
    t_opt: float
    C_opt: Optional[float]
    feedback_samples: list

    def _expo(self, t):
        return math.exp(-self.eps * t) if self.sign == "upstream" \
            else math.exp(self.eps * t)

    def control(self, t: float) -> Vec2:
        """Time-parametrized optimal control."""
        if self.C_opt is None:
            return self.u_const
        ce = self.C_opt * self._expo(t)
        den = math.sqrt(1.0 + ce * ce)
        return Vec2(1.0 / den, ce / (self.a * den))

    def position(self, t: float) -> Vec2:
        if self.C_opt is None:
            return self.constant_position(t)
        C, eps, a = self.C_opt, self.eps, self.a
        r0 = math.sqrt(1.0 + C * C)
        ce = C * self._expo(t)
        rt = math.sqrt(1.0 + ce * ce)
        if self.sign == "upstream":
            x1 = (rt - math.exp(-eps * t) * r0) / eps
            x2 = (math.asinh(C) - math.asinh(ce)) / (a * eps)
        else:
            x1 = (math.exp(eps * t) * r0 - rt) / eps
            x2 = (math.asinh(ce) - math.asinh(C)) / (a * eps)
        return Vec2(x1, x2)

    def constant_position(self, t: float) -> Vec2:
        u1, u2 = self.u_const.x1, self.u_const.x2
        eps = self.eps
        if self.sign == "upstream":
            return Vec2(u1 / eps * (-math.expm1(-eps * t)), u2 * t)
        return Vec2(u1 / eps * math.expm1(eps * t), u2 * t)

    def feedback_control(self, x2: float) -> Vec2:
        """Feedback form of the optimal control as a function of altitude."""
        C = self.C_opt
        if C is None:
            return self.u_const
        w = self.a * self.eps * x2
        r0 = math.sqrt(1.0 + C * C)
        if self.sign == "upstream":
            h = C * math.cosh(w) - r0 * math.sinh(w)
        else:
            h = C * math.cosh(w) + r0 * math.sinh(w)
        den = math.sqrt(1.0 + h * h)
        return Vec2(1.0 / den, h / (self.a * den))

    def costate(self, t: float) -> Vec2:
        """Adjoint consistent with the optimal control, |p(0)| = 1."""
        C, a = self.C_opt, self.a
        if C is None:
            raise ValueError("constant branch has no distinguished adjoint")
        norm0 = math.hypot(1.0, a * C)
        decay = math.exp(self.eps * t) if self.sign == "upstream" \
            else math.exp(-self.eps * t)
        return Vec2(decay / norm0, a * C / norm0)

    def optimal_trajectory(self, horizon: Optional[float] = None) -> PmpTrajectory:
        horizon = horizon or self.t_opt
        ts = _sample_grid(self.t_opt, horizon)
        x = np.empty((ts.size, 2))
        p = np.empty_like(x)
        u = np.empty_like(x)
        for k, t in enumerate(ts):
            x[k] = self.position(t).as_tuple()
            u[k] = self.control(t).as_tuple()
            if self.C_opt is not None:
                p[k] = self.costate(t).as_tuple()
        if self.C_opt is None:
            p[:] = (float("nan"), float("nan"))
        traj = PmpTrajectory(ts, x, p, u, TerminalEvent(True, self.t_opt))
        if self.C_opt is not None:
            angle = math.atan2(p[0, 1], p[0, 0])
            traj.costate_angle = angle
        return traj

    def constant_trajectory(self) -> PmpTrajectory:
        ts = _sample_grid(self.t_const, self.t_const)
        x = np.empty((ts.size, 2))
        for k, t in enumerate(ts):
            x[k] = self.constant_position(t).as_tuple()
        u = np.tile(self.u_const.as_tuple(), (ts.size, 1))
        p = np.full_like(x, float("nan"))
        return PmpTrajectory(ts, x, p, u, TerminalEvent(True, self.t_const))


def _bisect(f, lo: float, hi: float, tol: float, max_iter: int = 200) -> float:
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise NoRoot(f"no sign change on [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0 or hi - lo < tol:
            return mid
        if flo * fmid < 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def affine_elliptic_example(eps: float, a: float, sign: str,
                            target: Vec2) -> ExampleResult:
    """Closed-form minimum-time candidates for the elliptic velocity set
    u1^2 + a^2 u2^2 <= 1 under the drift (-eps*x1, 0) ("upstream") or
    (+eps*x1, 0) ("downstream"), from the origin to `target`.

    Produces the unique constant-control candidate, all non-constant
    candidates obtained from the exponential heading family, and the minimum
    over both branches.
    """
    if not (0.0 < eps < 1.0):
        raise NoRoot("eps must lie in (0, 1)")
    if a <= 0.0:
        raise NoRoot("a must be positive")
    if sign not in ("upstream", "downstream"):
        raise ValueError("sign must be 'upstream' or 'downstream'")
    b1, b2 = target.x1, target.x2
    if b1 <= 0.0 or b2 <= 0.0:
        raise TargetUnreachable("target must lie in the open first quadrant")
    up = sign == "upstream"
    if up and eps * b1 >= 1.0:
        raise TargetUnreachable("drift equilibrium closer than the target")

    # constant-control candidate: one positive root by monotone bisection
    def g(t):
        denom = -math.expm1(-eps * t) if up else math.expm1(eps * t)
        return (eps * b1 / denom) ** 2 + (a * b2 / t) ** 2 - 1.0

    t_const = _bisect(g, 1e-6, 1e3, 1e-9)
    denom = -math.expm1(-eps * t_const) if up else math.expm1(eps * t_const)
    u_const = Vec2(eps * b1 / denom, b2 / t_const)

    # non-constant candidates: roots of the target condition in C
    w = a * eps * b2
    ch, sh = math.cosh(w), math.sinh(w)

    def E(C):
        r = math.sqrt(1.0 + C * C) / C
        return ch - r * sh if up else ch + r * sh

    two_eb = 2.0 * eps * b1
    quad_c = eps * eps * b1 * b1 - 1.0

    def F(C):
        r = math.sqrt(1.0 + C * C)
        G = C * ch - r * sh if up else C * ch + r * sh
        if up:
            return G * G + two_eb * C * G * r + quad_c * C * C
        return G * G - two_eb * C * G * r + quad_c * C * C

    grid = np.concatenate([-np.logspace(3.0, -6.0, 4096),
                           np.logspace(-6.0, 3.0, 4096)])
    vals = np.array([F(c) for c in grid])
    roots = []
    for i in range(grid.size - 1):
        if grid[i] < 0.0 < grid[i + 1]:
            continue
        if vals[i] == 0.0:
            roots.append(float(grid[i]))
        elif vals[i] * vals[i + 1] < 0.0:
            roots.append(_bisect(F, float(grid[i]), float(grid[i + 1]), 1e-12))
    dedup = []
    for r in sorted(roots):
        if not dedup or abs(r - dedup[-1]) > 1e-9:
            dedup.append(r)
    roots = dedup
    if len(roots) != 2:
        log.warning("target condition has %d roots (expected 2): %s",
                    len(roots), roots)
    E_values = [E(r) for r in roots]

    candidates = []  # (t, C)
    for C, Ev in zip(roots, E_values):
        if up and 0.0 < Ev < 1.0:
            t_cand = -math.log(Ev) / eps
        elif (not up) and Ev > 1.0:
            t_cand = math.log(Ev) / eps
        else:
            continue
        probe = ExampleResult(eps, a, sign, target, t_const, u_const,
                              roots, E_values, t_cand, C, [])
        endpoint = probe.position(t_cand)
        if (endpoint - target).norm() <= 1e-8 * (1.0 + target.norm()):
            candidates.append((t_cand, C))

    t_opt, C_opt = t_const, None
    for t_cand, C in candidates:
        if t_cand < t_opt:
            t_opt, C_opt = t_cand, C

    result = ExampleResult(eps, a, sign, target, t_const, u_const,
                           roots, E_values, t_opt, C_opt, [])
    n_fb = 33
    for k in range(n_fb):
        t = t_opt * k / (n_fb - 1)
        x2 = result.position(t).x2
        result.feedback_samples.append((x2, result.feedback_control(x2)))
    return result


# ----------------------------------------------------------------------
# value-iteration oracle
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    nx: int = 201
    ny: int = 201
    n_controls: int = 64
    dt: float = 5e-3
    bounds: Optional[RegionBox] = None


@dataclass(frozen=True)
class BruteForceResult:
    estimate: float
    lower: float
    upper: float
    sweeps: int


_SWEEP = None


def _sweep_kernel():
    """Lazily compiled Jacobi sweep over the value grid (parallel, still
    deterministic: every cell reads only the previous iterate)."""
    global _SWEEP
    if _SWEEP is None:
        # skip the TBB probe (old TBB in some images triggers a warning)
        os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")
        from numba import njit, prange

        @njit(cache=True, parallel=True)
        def sweep(T, Tn, idx, w, tmask, dt, stride):
            N, K = idx.shape
            change = 0.0
            for i in prange(N):
                if tmask[i]:
                    Tn[i] = 0.0
                    continue
                best = BIG
                for k in range(K):
                    j = idx[i, k]
                    if j < 0:  # displaced point left the grid
                        continue
                    v = (w[i, k, 0] * T[j] + w[i, k, 1] * T[j + 1]
                         + w[i, k, 2] * T[j + stride]
                         + w[i, k, 3] * T[j + stride + 1])
                    if v < best:
                        best = v
                cand = dt + best
                if cand > T[i]:
                    cand = T[i]
                Tn[i] = cand
                change = max(change, T[i] - cand)
            return change

        _SWEEP = sweep
    return _SWEEP


def _auto_bounds(scenario: Scenario) -> RegionBox:
    pts = [scenario.target.point]
    if isinstance(scenario.start, PointStart):
        pts.append(scenario.start.point)
    else:
        pts.extend([scenario.start.a, scenario.start.b])
    xs = [p.x1 for p in pts]
    ys = [p.x2 for p in pts]
    span = max(max(xs) - min(xs), max(ys) - min(ys), 1.0)
    margin = max(0.5 * span, 0.75)
    return RegionBox(Vec2(min(xs) - margin, min(ys) - margin),
                     Vec2(max(xs) + margin, max(ys) + margin))


def brute_force_min_time(scenario: Scenario,
                         grid: GridSpec = GridSpec()) -> BruteForceResult:
    """Semi-Lagrangian value iteration for the minimum-time function.

    Controls are sampled on the set boundary (maximizer directions), one
    per uniformly spaced costate angle. Returns the interpolated time at the
    start point with a conservative error bracket.
    """
    if not isinstance(scenario.start, PointStart):
        raise ValueError("value iteration needs a point start")
    x0 = scenario.start.point
    B = scenario.target.point
    bounds = grid.bounds or _auto_bounds(scenario)
    nx, ny, K, dt = grid.nx, grid.ny, grid.n_controls, grid.dt
    lo, hi = bounds.lower, bounds.upper
    hx = (hi.x1 - lo.x1) / (nx - 1)
    hy = (hi.x2 - lo.x2) / (ny - 1)

    for label, p in (("start", x0), ("target", B)):
        if not (lo.x1 + hx <= p.x1 <= hi.x1 - hx
                and lo.x2 + hy <= p.x2 <= hi.x2 - hy):
            raise StartOutsideGrid(f"{label} point {p} outside grid interior")

    xs = lo.x1 + hx * np.arange(nx)
    ys = lo.x2 + hy * np.arange(ny)
    X, Y = np.meshgrid(xs, ys)          # shape (ny, nx)
    Xf, Yf = X.ravel(), Y.ravel()
    N = Xf.size

    S = np.empty((N, 2))
    if isinstance(scenario.field, (Constant, Affine)):
        j = scenario.field
        if isinstance(j, Constant):
            S[:, 0], S[:, 1] = j.b.x1, j.b.x2
        else:
            S[:, 0] = j.D.m11 * Xf + j.D.m12 * Yf + j.b.x1
            S[:, 1] = j.D.m21 * Xf + j.D.m22 * Yf + j.b.x2
    else:
        for i in range(N):
            S[i] = scenario.field.velocity_xy(Xf[i], Yf[i])

    controls = np.empty((K, 2))
    for k in range(K):
        ang = 2.0 * math.pi * k / K
        controls[k] = scenario.control_set.maximizer_xy(
            math.cos(ang), math.sin(ang))

    speed = np.linalg.norm(controls[None, :, :] + S[:, None, :], axis=2)
    if dt * float(speed.max()) >= min(hx, hy):
        raise ValueError("dt * max speed must stay below the cell size")

    # cell-major layout keeps the inner control loop on contiguous memory
    idx = np.empty((N, K), dtype=np.int32)
    w = np.empty((N, K, 4), dtype=np.float32)
    for k in range(K):
        px = Xf + dt * (controls[k, 0] + S[:, 0])
        py = Yf + dt * (controls[k, 1] + S[:, 1])
        fx = (px - lo.x1) / hx
        fy = (py - lo.x2) / hy
        ix = np.floor(fx).astype(np.int64)
        iy = np.floor(fy).astype(np.int64)
        bad = (ix < 0) | (ix > nx - 2) | (iy < 0) | (iy > ny - 2)
        ix = np.clip(ix, 0, nx - 2)
        iy = np.clip(iy, 0, ny - 2)
        wx = fx - ix
        wy = fy - iy
        flat = (iy * nx + ix).astype(np.int32)
        flat[bad] = -1
        idx[:, k] = flat
        w[:, k, 0] = (1.0 - wx) * (1.0 - wy)
        w[:, k, 1] = wx * (1.0 - wy)
        w[:, k, 2] = (1.0 - wx) * wy
        w[:, k, 3] = wx * wy

    cell_diag = math.hypot(hx, hy)
    tmask = ((Xf - B.x1) ** 2 + (Yf - B.x2) ** 2
             <= max(scenario.target.radius, cell_diag) ** 2)
    if not tmask.any():
        raise StartOutsideGrid("target ball covers no grid cell")

    T = np.full(N, BIG)
    T[tmask] = 0.0
    Tn = np.empty_like(T)
    sweep = _sweep_kernel()
    sweeps = 0
    max_sweeps = 100_000
    while True:
        change = sweep(T, Tn, idx, w, tmask, dt, nx)
        T, Tn = Tn, T
        sweeps += 1
        if change < 1e-6:
            break
        if sweeps >= max_sweeps:
            raise NotConverged(f"value iteration still moving after {sweeps} sweeps")

    fx = (x0.x1 - lo.x1) / hx
    fy = (x0.x2 - lo.x2) / hy
    ix, iy = int(fx), int(fy)
    wx, wy = fx - ix, fy - iy
    i0 = iy * nx + ix
    estimate = float((1 - wx) * (1 - wy) * T[i0] + wx * (1 - wy) * T[i0 + 1]
                     + (1 - wx) * wy * T[i0 + nx] + wx * wy * T[i0 + nx + 1])
    if estimate >= 0.5 * BIG:
        raise NotConverged("start point never reached by the value front")

    sub = np.linspace(0, N - 1, 81, dtype=np.int64)
    min_net_speed = float(np.min(np.max(
        np.linalg.norm(controls[None, :, :] + S[sub, None, :], axis=2), axis=1)))
    err = dt + 2.0 * cell_diag / max(min_net_speed, 1e-12)
    return BruteForceResult(estimate, estimate - err, estimate + err, sweeps)
