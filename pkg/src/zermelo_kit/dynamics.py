"""State/adjoint integration with maximizing feedback, the heading ODE on the
velocity-set boundary, and the residual diagnostics that certify a trajectory
against the first-order optimality conditions.

Trajectories are sampled on a uniform grid fine enough (spacing capped at
1e-3) that the centered finite differences used by the residuals stay well
below the acceptance thresholds.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp, trapezoid

from .convex import ControlSet
from .currents import Affine, Constant, CurrentField
from .errors import DegenerateCurvature, NonFiniteState
from .plane import Mat2, Vec2

RTOL = 1e-9
ATOL = 1e-12
SPACING_CAP = 1e-3  # upper bound on the sample spacing, in seconds


class Normality(Enum):
    NORMAL = "normal"
    ABNORMAL = "abnormal"
    MIXED = "mixed"


@dataclass(frozen=True)
class TerminalEvent:
    hit: bool
    t_f: float


@dataclass
class PmpTrajectory:
    """Uniformly sampled (t, x, p, u) with the terminal event.

    The multiplier sign p0 is assigned after integration from the detA
    classification: 0 on the degenerate branch, -1 otherwise.
    """

    t: np.ndarray   # (n,)
    x: np.ndarray   # (n, 2)
    p: np.ndarray   # (n, 2)
    u: np.ndarray   # (n, 2)
    event: TerminalEvent
    p0: int = -1
    costate_angle: Optional[float] = None

    def __len__(self) -> int:
        return self.t.size


@dataclass
class ZneTrajectory:
    t: np.ndarray       # (n,)
    x: np.ndarray       # (n, 2)
    theta: np.ndarray   # (n,)
    u: np.ndarray       # (n, 2)
    event: TerminalEvent

    def __len__(self) -> int:
        return self.t.size


@dataclass(frozen=True)
class Diagnostics:
    max_hamiltonian_residual: float
    max_orthogonality_residual: float
    max_boundary_residual: float
    max_zne_residual: float
    min_abs_detA: float
    abnormal: bool
    normality: str = "normal"


def _sample_grid(t_end: float, horizon: float) -> np.ndarray:
    spacing = min(1e-2 * horizon, SPACING_CAP)
    n = max(int(math.ceil(t_end / spacing)), 8)
    return np.linspace(0.0, t_end, n + 1)


def _field_fast_paths(field: CurrentField):
    vel = field.velocity_xy
    if isinstance(field, (Constant, Affine)):
        j = field.jacobian_xy(0.0, 0.0)
        jac = lambda x1, x2: j
    else:
        jac = field.jacobian_xy
    return vel, jac


def pmp_rhs(control_set: ControlSet, field: CurrentField):
    """Right-hand side of the coupled state/adjoint system on raw floats."""
    mx = control_set.maximizer_xy
    vel, jac = _field_fast_paths(field)

    def rhs(t, y):
        x1, x2, p1, p2 = y
        u1, u2 = mx(p1, p2)
        s1, s2 = vel(x1, x2)
        j11, j12, j21, j22 = jac(x1, x2)
        return (u1 + s1, u2 + s2,
                -(j11 * p1 + j21 * p2), -(j12 * p1 + j22 * p2))

    return rhs


def solve_to_target(rhs, y0, horizon: float, target: Optional[Vec2],
                    radius: float, rtol: float, atol: float):
    """Integrate with robust target-ball detection.

    A terminal event on |x - B| = radius alone misses balls smaller than an
    integration step, so a second, non-terminal event records every closest
    approach (zero of <x - B, x'> from below); the entering time is then
    located by bisection on the dense output to 1e-10 * horizon.

    Returns (solution, hit_time_or_None).
    """
    events = None
    if target is not None:
        bx, by = target.x1, target.x2

        def ball(t, y):
            return math.hypot(y[0] - bx, y[1] - by) - radius
        ball.terminal = True
        ball.direction = -1

        def closing(t, y):
            d = rhs(t, y)
            return (y[0] - bx) * d[0] + (y[1] - by) * d[1]
        closing.terminal = False
        closing.direction = 1

        events = [ball, closing]

    try:
        sol = solve_ivp(rhs, (0.0, horizon), y0, method="RK45",
                        rtol=rtol, atol=atol, dense_output=True,
                        events=events)
    except (ZeroDivisionError, FloatingPointError, OverflowError) as exc:
        raise NonFiniteState(f"integration blew up: {exc}") from exc
    if not sol.success:
        raise NonFiniteState(f"integration failed: {sol.message}")
    if target is None:
        return sol, None

    def dist(t):
        y = sol.sol(t)
        return math.hypot(y[0] - bx, y[1] - by)

    if sol.t_events[0].size:
        return sol, float(sol.t_events[0][0])

    def locate(lo, hi):
        tol = 1e-10 * horizon
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if dist(mid) > radius:
                lo = mid
            else:
                hi = mid
        return hi

    prev = 0.0
    passes = [float(t) for t in sol.t_events[1]]
    t_end = float(sol.t[-1])
    if not passes or passes[-1] < t_end:
        passes.append(t_end)  # monotone approach ending at the horizon
    for t_star in passes:
        if dist(t_star) <= radius:
            return sol, locate(prev, t_star)
        prev = t_star
    return sol, None


def integrate_pmp(control_set: ControlSet, field: CurrentField, x0: Vec2,
                  costate_angle: float, horizon: float,
                  target: Optional[Vec2] = None, target_radius: float = 0.0,
                  _dense: bool = True) -> PmpTrajectory:
    """Integrate x' = v(p) + s(x), p' = -(grad s)^T p from |p(0)| = 1.

    v is the unique support maximizer of the (strictly convex) velocity set.
    Integration stops at the target ball when a target is given, otherwise at
    the horizon.
    """
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    if target_radius < 0.0:
        raise ValueError("target_radius must be nonnegative")
    control_set.require_strictly_convex()

    rhs = pmp_rhs(control_set, field)
    y0 = (x0.x1, x0.x2, math.cos(costate_angle), math.sin(costate_angle))
    sol, t_hit = solve_to_target(rhs, y0, horizon, target, target_radius,
                                 RTOL, ATOL)
    hit = t_hit is not None
    t_end = t_hit if hit else float(sol.t[-1])
    event = TerminalEvent(hit, t_end)

    ts = _sample_grid(t_end, horizon) if _dense else np.linspace(
        0.0, t_end, min(512, max(int(t_end / SPACING_CAP), 8) + 1))
    ys = sol.sol(ts)
    if not np.all(np.isfinite(ys)):
        raise NonFiniteState("non-finite samples in integrated trajectory")
    x = ys[0:2].T.copy()
    p = ys[2:4].T.copy()
    mx = control_set.maximizer_xy
    u = np.empty_like(p)
    for k in range(ts.size):
        u[k] = mx(p[k, 0], p[k, 1])
    traj = PmpTrajectory(ts, x, p, u, event, costate_angle=costate_angle)
    traj.p0 = 0 if abnormality_detector(traj, control_set, field) is Normality.ABNORMAL else -1
    return traj


def integrate_zne(control_set: ControlSet, field: CurrentField, x0: Vec2,
                  theta0: float, horizon: float,
                  target: Optional[Vec2] = None,
                  target_radius: float = 0.0) -> ZneTrajectory:
    """Integrate the heading ODE coupled with the state equation.

    theta' = <perp(u_t), (grad s) u_t> / <perp(u_t), u_tt> on the boundary
    chart, x' = u(theta) + s(x). The heading is kept as a continuous real, so
    no angle wrapping ever occurs.
    """
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    control_set.require_strictly_convex()
    chart = control_set.chart_xy
    vel, jac = _field_fast_paths(field)

    def rhs(t, y):
        x1, x2, th = y
        u1, u2, t1, t2, tt1, tt2 = chart(th)
        s1, s2 = vel(x1, x2)
        j11, j12, j21, j22 = jac(x1, x2)
        den = -t2 * tt1 + t1 * tt2
        if abs(den) < 1e-12 * (t1 * t1 + t2 * t2):
            raise DegenerateCurvature(f"flat boundary chart at theta={th}")
        num = -t2 * (j11 * t1 + j12 * t2) + t1 * (j21 * t1 + j22 * t2)
        return (u1 + s1, u2 + s2, num / den)

    y0 = (x0.x1, x0.x2, theta0)
    sol, t_hit = solve_to_target(rhs, y0, horizon, target, target_radius,
                                 RTOL, ATOL)
    hit = t_hit is not None
    t_end = t_hit if hit else float(sol.t[-1])
    ts = _sample_grid(t_end, horizon)
    ys = sol.sol(ts)
    if not np.all(np.isfinite(ys)):
        raise NonFiniteState("non-finite samples in integrated trajectory")
    x = ys[0:2].T.copy()
    theta = ys[2].copy()
    u = np.empty_like(x)
    for k in range(ts.size):
        u1, u2, *_ = chart(theta[k])
        u[k] = (u1, u2)
    return ZneTrajectory(ts, x, theta, u, TerminalEvent(hit, t_end))


# ----------------------------------------------------------------------
# heading ODE right-hand sides
# ----------------------------------------------------------------------

def classical_zne_rhs(theta: float, jac: Mat2) -> float:
    """Heading rate for a round velocity set under current gradient `jac`."""
    s, c = math.sin(theta), math.cos(theta)
    return (jac.m21 * s * s + (jac.m11 - jac.m22) * s * c - jac.m12 * c * c)


def generic_zne_theta_rhs(control_set: ControlSet, theta: float,
                          jac: Mat2) -> float:
    """Heading rate for any strictly convex boundary chart.

    Derived by differentiating the maximizer stationarity condition along the
    adjoint flow; reduces exactly to classical_zne_rhs for a disk.
    """
    u1, u2, t1, t2, tt1, tt2 = control_set.chart_xy(theta)
    den = -t2 * tt1 + t1 * tt2
    if abs(den) < 1e-12 * (t1 * t1 + t2 * t2):
        raise DegenerateCurvature(f"flat boundary chart at theta={theta}")
    num = (-t2 * (jac.m11 * t1 + jac.m12 * t2)
           + t1 * (jac.m21 * t1 + jac.m22 * t2))
    return num / den


def polar_curve_heading_rhs(V, dV, d2V, theta: float, jac: Mat2) -> float:
    """Explicit trigonometric heading rate for a polar-curve boundary.

    Independent expansion used to cross-check generic_zne_theta_rhs: written
    directly in V, V', V'' with the curvature margin in the denominator.
    """
    c, s = math.cos(theta), math.sin(theta)
    v, vp, vpp = V(theta), dV(theta), d2V(theta)
    delta = v * v + 2.0 * vp * vp - v * vpp
    a1 = vp * c - v * s   # first chart-velocity component
    a2 = vp * s + v * c   # second chart-velocity component
    return (jac.m21 * a1 * a1 - jac.m12 * a2 * a2
            - (jac.m11 - jac.m22) * a1 * a2) / delta


# ----------------------------------------------------------------------
# residual diagnostics
# ----------------------------------------------------------------------

def _finite_differences(t: np.ndarray, f: np.ndarray):
    """Centered first and second derivatives on a uniform grid (interior)."""
    h = t[1] - t[0]
    fp = (f[2:] - f[:-2]) / (2.0 * h)
    fpp = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)
    return fp, fpp  # both aligned with f[1:-1]


def _drift_samples(traj, field: CurrentField) -> np.ndarray:
    s = np.empty_like(traj.x)
    for k in range(traj.t.size):
        s[k] = field.velocity_xy(traj.x[k, 0], traj.x[k, 1])
    return s


def hamiltonian_residual(traj: PmpTrajectory, control_set: ControlSet,
                         field: CurrentField) -> float:
    """Deviation of p0 + <p, u + s> from zero under the realizable scaling.

    The multiplier is rescaled so the time average of <p, u+s> equals one
    (realizing p0 = -1) whenever that average is meaningfully nonzero;
    otherwise the raw magnitude is reported, which is the degenerate branch
    where <p, u+s> should vanish identically.
    """
    if traj.t.size == 0:
        raise ValueError("empty trajectory")
    s = _drift_samples(traj, field)
    m = np.einsum("ij,ij->i", traj.p, traj.u + s)
    if traj.t.size == 1:
        mbar = float(m[0])
    else:
        mbar = float(trapezoid(m, traj.t) / (traj.t[-1] - traj.t[0]))
    scale = float(np.max(np.linalg.norm(traj.p, axis=1)
                         * np.linalg.norm(traj.u + s, axis=1)))
    if abs(mbar) > 1e-8 * scale:
        return float(np.max(np.abs(m / mbar - 1.0)))
    return float(np.max(np.abs(m)))


def _fd_noise_floor(traj) -> float:
    """Magnitude below which a finite-difference u' is pure roundoff.

    Sampling u from the dense output rounds each component at machine
    precision, so differences smaller than ~eps*|u|/h carry no directional
    information; a comfortable multiple keeps genuinely constant controls
    (where u' vanishes identically up to roundoff) out of the residuals.
    """
    h = float(traj.t[1] - traj.t[0]) if traj.t.size > 1 else 1.0
    umax = float(np.max(np.linalg.norm(traj.u, axis=1)))
    return 1e3 * np.finfo(float).eps * umax / h


def orthogonality_residual(traj: PmpTrajectory) -> float:
    """Normalized |<p, u'>| with u' from centered differences; samples where
    u' is below the finite-difference noise floor contribute zero."""
    if traj.t.size < 3:
        raise ValueError("need at least 3 samples")
    up, _ = _finite_differences(traj.t, traj.u)
    p_mid = traj.p[1:-1]
    up_norm = np.linalg.norm(up, axis=1)
    num = np.abs(np.einsum("ij,ij->i", p_mid, up))
    den = np.linalg.norm(p_mid, axis=1) * up_norm + 1e-30
    ratio = np.where(up_norm >= _fd_noise_floor(traj), num / den, 0.0)
    return float(np.max(ratio))


def det_a_series(traj, field: CurrentField) -> np.ndarray:
    """-<perp(u'), u + s(x)> on the interior sample grid."""
    up, _ = _finite_differences(traj.t, traj.u)
    s = _drift_samples(traj, field)[1:-1]
    w = traj.u[1:-1] + s
    # -<perp(u'), w> = u2'*w1 - u1'*w2
    return up[:, 1] * w[:, 0] - up[:, 0] * w[:, 1]


def abnormality_detector(traj, control_set: ControlSet,
                         field: CurrentField) -> Normality:
    """Classify by detA = -<perp(u'), u+s>: identically zero means the
    degenerate multiplier branch, bounded away from zero the regular one."""
    if traj.t.size < 3:
        raise ValueError("need at least 3 samples")
    det_a = det_a_series(traj, field)
    up, _ = _finite_differences(traj.t, traj.u)
    s = _drift_samples(traj, field)
    speed = float(np.max(np.linalg.norm(traj.u + s, axis=1)))
    duration = float(traj.t[-1] - traj.t[0]) or 1.0
    scale = speed * max(float(np.max(np.linalg.norm(up, axis=1))),
                        speed / duration)
    tol = 1e-8 * scale
    if float(np.max(np.abs(det_a))) < tol:
        return Normality.ABNORMAL
    if float(np.min(np.abs(det_a))) > tol:
        return Normality.NORMAL
    return Normality.MIXED


def zne_residual(traj, field: CurrentField) -> float:
    """Residual of the component-form heading equation along a trajectory.

    Evaluates u1''u2' - u1'u2'' + u1'^2 s21 - u1'u2'(s11 - s22) - u2'^2 s12
    with finite-difference derivatives, each sample normalized by its largest
    constituent term.
    """
    if traj.t.size < 5:
        raise ValueError("need at least 5 samples")
    up, upp = _finite_differences(traj.t, traj.u)
    n = up.shape[0]
    jac = np.empty((n, 4))
    for k in range(n):
        jac[k] = field.jacobian_xy(traj.x[k + 1, 0], traj.x[k + 1, 1])
    s11, s12, s21, s22 = jac.T
    t1 = upp[:, 0] * up[:, 1]
    t2 = -up[:, 0] * upp[:, 1]
    t3 = up[:, 0] ** 2 * s21
    t4 = -up[:, 0] * up[:, 1] * (s11 - s22)
    t5 = -up[:, 1] ** 2 * s12
    expr = t1 + t2 + t3 + t4 + t5
    biggest = np.max(np.abs(np.stack([t1, t2, t3, t4, t5])), axis=0)
    live = np.linalg.norm(up, axis=1) >= _fd_noise_floor(traj)
    ratio = np.where(live, np.abs(expr) / (biggest + 1e-30), 0.0)
    return float(np.max(ratio))


def compute_diagnostics(traj: PmpTrajectory, control_set: ControlSet,
                        field: CurrentField) -> Diagnostics:
    normality = abnormality_detector(traj, control_set, field)
    det_a = det_a_series(traj, field)
    fenchel = np.empty(traj.t.size)
    for k in range(traj.t.size):
        p = Vec2(traj.p[k, 0], traj.p[k, 1])
        fenchel[k] = (control_set.fenchel_residual(
            Vec2(traj.u[k, 0], traj.u[k, 1]), p) / (1.0 + p.norm()))
    return Diagnostics(
        max_hamiltonian_residual=hamiltonian_residual(traj, control_set, field),
        max_orthogonality_residual=orthogonality_residual(traj),
        max_boundary_residual=float(np.max(np.abs(fenchel))),
        max_zne_residual=zne_residual(traj, field),
        min_abs_detA=float(np.min(np.abs(det_a))),
        abnormal=normality is Normality.ABNORMAL,
        normality=normality.value,
    )


# ----------------------------------------------------------------------
# trajectory CSV export / import (17 significant digits, RFC 4180)
# ----------------------------------------------------------------------

_PMP_HEADER = ["t", "x1", "x2", "p1", "p2", "u1", "u2"]
_ZNE_HEADER = ["t", "x1", "x2", "theta", "u1", "u2"]


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_pmp_csv(traj: PmpTrajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_PMP_HEADER)
        for k in range(traj.t.size):
            w.writerow([_fmt(traj.t[k]), _fmt(traj.x[k, 0]), _fmt(traj.x[k, 1]),
                        _fmt(traj.p[k, 0]), _fmt(traj.p[k, 1]),
                        _fmt(traj.u[k, 0]), _fmt(traj.u[k, 1])])


def write_zne_csv(traj: ZneTrajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_ZNE_HEADER)
        for k in range(traj.t.size):
            w.writerow([_fmt(traj.t[k]), _fmt(traj.x[k, 0]), _fmt(traj.x[k, 1]),
                        _fmt(traj.theta[k]),
                        _fmt(traj.u[k, 0]), _fmt(traj.u[k, 1])])


def read_pmp_csv(path) -> PmpTrajectory:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != _PMP_HEADER:
        raise ValueError(f"not a state/adjoint trajectory file: {path}")
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    return PmpTrajectory(t=data[:, 0], x=data[:, 1:3], p=data[:, 3:5],
                         u=data[:, 5:7],
                         event=TerminalEvent(False, float(data[-1, 0])))


def read_zne_csv(path) -> ZneTrajectory:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != _ZNE_HEADER:
        raise ValueError(f"not a heading trajectory file: {path}")
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    return ZneTrajectory(t=data[:, 0], x=data[:, 1:3], theta=data[:, 3],
                         u=data[:, 4:6],
                         event=TerminalEvent(False, float(data[-1, 0])))
