"""Solver reports (canonical JSON) and the deterministic SVG scene plot.

Reports are emitted with sorted keys and no timestamps so identical runs are
byte-identical. The SVG is written by hand: polylines for the trajectories,
the velocity-set outline anchored at the departure point, the drift-shifted
outline with the chord intersection marker, and a grid of drift arrows.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict
from typing import Optional

import numpy as np

from .config import scenario_hash
from .convex import ControlSet, Shifted
from .errors import ReportInvalid
from .plane import Vec2
from .solvers import BruteForceResult, PointStart, Scenario, SolveResult

REPORT_SCHEMA = "zermelo-report/1"


def make_report(cfg: dict, solver_id: str,
                result: Optional[SolveResult] = None,
                bracket: Optional[BruteForceResult] = None) -> dict:
    report = {
        "schema": REPORT_SCHEMA,
        "scenario_hash": scenario_hash(cfg),
        "solver_id": solver_id,
        "seed": cfg.get("seed", 0),
    }
    if result is not None:
        report["t_f"] = result.t_f
        report["t_f_slack"] = result.t_f_slack
        report["diagnostics"] = asdict(result.diagnostics)
        report["candidates"] = [list(c) for c in result.candidates]
        report["transversality"] = result.transversality
    if bracket is not None:
        report["t_f"] = bracket.estimate
        report["bracket"] = [bracket.lower, bracket.upper]
        report["sweeps"] = bracket.sweeps
        report["diagnostics"] = None
        report["candidates"] = []
    return report


def write_report(path, report: dict) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_report(path) -> dict:
    try:
        with open(path) as fh:
            report = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ReportInvalid(f"cannot read report {path}: {exc}") from exc
    if not isinstance(report, dict) or report.get("schema") != REPORT_SCHEMA:
        raise ReportInvalid(f"{path} is not a solver report")
    for key in ("scenario_hash", "solver_id", "t_f"):
        if key not in report:
            raise ReportInvalid(f"{path} is missing field {key!r}")
    return report


# ----------------------------------------------------------------------
# SVG scene
# ----------------------------------------------------------------------

_VIEW = 720.0
_MARGIN = 48.0


def _fmt(v: float) -> str:
    return f"{v:.6g}"


class _Mapper:
    def __init__(self, xlo, xhi, ylo, yhi):
        span = max(xhi - xlo, yhi - ylo, 1e-9)
        # center the world box in the viewport, y axis flipped
        self.scale = (_VIEW - 2 * _MARGIN) / span
        self.cx = 0.5 * (xlo + xhi)
        self.cy = 0.5 * (ylo + yhi)

    def pt(self, x, y):
        px = _VIEW / 2 + (x - self.cx) * self.scale
        py = _VIEW / 2 - (y - self.cy) * self.scale
        return px, py

    def poly(self, xs, ys):
        return " ".join(f"{_fmt(px)},{_fmt(py)}"
                        for px, py in (self.pt(x, y) for x, y in zip(xs, ys)))


def _set_outline(control_set: ControlSet, anchor: Vec2, n: int = 128):
    xs, ys = [], []
    for k in range(n + 1):
        u1, u2, *_ = control_set.chart_xy(2.0 * math.pi * k / n)
        xs.append(anchor.x1 + u1)
        ys.append(anchor.x2 + u2)
    return xs, ys


def write_scene_svg(path, scenario: Scenario, results: list) -> None:
    """results: list of (solver_id, trajectory, extra_polyline_or_None)."""
    target = scenario.target.point
    solved = [r for r in results if r[1] is not None]
    if solved:
        first = min(solved, key=lambda r: r[1].t[-1])[1]
        x0 = Vec2(float(first.x[0, 0]), float(first.x[0, 1]))
    elif isinstance(scenario.start, PointStart):
        x0 = scenario.start.point
    else:
        x0 = scenario.start.at(0.5)

    xs_all = [x0.x1, target.x1]
    ys_all = [x0.x2, target.x2]
    for _, traj, extra in results:
        if traj is not None:
            xs_all.extend(traj.x[:, 0])
            ys_all.extend(traj.x[:, 1])
        if extra is not None:
            xs_all.extend(extra[:, 0])
            ys_all.extend(extra[:, 1])
    outline = _set_outline(scenario.control_set, x0)
    xs_all.extend(outline[0])
    ys_all.extend(outline[1])
    pad = 0.08 * max(max(xs_all) - min(xs_all), max(ys_all) - min(ys_all), 1.0)
    m = _Mapper(min(xs_all) - pad, max(xs_all) + pad,
                min(ys_all) - pad, max(ys_all) + pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_VIEW:.0f}" height="{_VIEW:.0f}" '
        f'viewBox="0 0 {_VIEW:.0f} {_VIEW:.0f}">',
        f'<rect width="{_VIEW:.0f}" height="{_VIEW:.0f}" fill="white"/>',
    ]

    # drift arrows on a 12 x 12 grid
    s_my = scenario.field
    gx = np.linspace(min(xs_all), max(xs_all), 12)
    gy = np.linspace(min(ys_all), max(ys_all), 12)
    smax = max(max(math.hypot(*s_my.velocity_xy(x, y))
                   for x in gx for y in gy), 1e-12)
    alen = 0.45 * min(gx[1] - gx[0], gy[1] - gy[0]) / smax
    arrows = []
    for x in gx:
        for y in gy:
            s1, s2 = s_my.velocity_xy(x, y)
            if math.hypot(s1, s2) < 1e-12:
                continue
            x1, y1 = m.pt(x, y)
            x2, y2 = m.pt(x + alen * s1, y + alen * s2)
            arrows.append(f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" '
                          f'x2="{_fmt(x2)}" y2="{_fmt(y2)}"/>')
            hx, hy = m.pt(x + alen * s1 * 0.75 - alen * s2 * 0.12,
                          y + alen * s2 * 0.75 + alen * s1 * 0.12)
            arrows.append(f'<line x1="{_fmt(x2)}" y1="{_fmt(y2)}" '
                          f'x2="{_fmt(hx)}" y2="{_fmt(hy)}"/>')
    parts.append('<g stroke="#9ecae1" stroke-width="1">' + "".join(arrows)
                 + "</g>")

    # velocity set at the start point and its drift-shifted copy
    parts.append(f'<polyline points="{m.poly(*outline)}" fill="none" '
                 f'stroke="#bbbbbb" stroke-width="1.2"/>')
    s0 = Vec2(*scenario.field.velocity_xy(x0.x1, x0.x2))
    shifted = Shifted(scenario.control_set, s0)
    sh_outline = _set_outline(shifted, x0)
    parts.append(f'<polyline points="{m.poly(*sh_outline)}" fill="none" '
                 f'stroke="#888888" stroke-width="1.2" stroke-dasharray="6 4"/>')

    # chord to the target and its intersection with the shifted boundary
    chord = target - x0
    dist = chord.norm()
    if dist > 0.0:
        d = Vec2(chord.x1 / dist, chord.x2 / dist)
        parts.append('<polyline points="{}" fill="none" stroke="#cccccc" '
                     'stroke-width="1" stroke-dasharray="2 4"/>'.format(
                         m.poly([x0.x1, target.x1], [x0.x2, target.x2])))
        try:
            lam = shifted.gauge_along(d)
            xs_, ys_ = m.pt(x0.x1 + lam * d.x1, x0.x2 + lam * d.x2)
            parts.append(f'<circle cx="{_fmt(xs_)}" cy="{_fmt(ys_)}" r="4" '
                         f'fill="#e07a00"/>')
        except Exception:
            pass

    # trajectories: fastest black, alternates green, remainder blue
    ordered = sorted([r for r in results if r[1] is not None],
                     key=lambda r: r[1].t[-1])
    palette = ["#000000", "#2ca02c", "#1f77b4", "#9467bd"]
    for i, (solver_id, traj, extra) in enumerate(ordered):
        color = palette[min(i, len(palette) - 1)]
        parts.append(f'<polyline points="{m.poly(traj.x[:, 0], traj.x[:, 1])}" '
                     f'fill="none" stroke="{color}" stroke-width="2">'
                     f'<title>{solver_id}</title></polyline>')
        if extra is not None:
            parts.append(f'<polyline points="{m.poly(extra[:, 0], extra[:, 1])}" '
                         f'fill="none" stroke="#2ca02c" stroke-width="1.6" '
                         f'stroke-dasharray="8 3"/>')

    for pt, color in ((x0, "#000000"), (target, "#d62728")):
        px, py = m.pt(pt.x1, pt.x2)
        parts.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="4" '
                     f'fill="{color}"/>')
    if not isinstance(scenario.start, PointStart):
        seg = scenario.start
        parts.append('<polyline points="{}" fill="none" stroke="#d62728" '
                     'stroke-width="1.5"/>'.format(
                         m.poly([seg.a.x1, seg.b.x1], [seg.a.x2, seg.b.x2])))

    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
