"""Batch command-line front end.

    zermelo run <config.json> [--out DIR] [--no-plot]
    zermelo compare <report.json> <report.json> ...
    zermelo examples [--write DIR]

Exit codes: 0 success, 1 comparison disagreement, 2 solver failure,
3 invalid configuration or report. Logging level via ZERMELO_LOG
(error | info | debug).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import report as report_mod
from .config import build_grid_spec, build_scenario, validate_config
from .dynamics import compute_diagnostics, write_pmp_csv
from .errors import ConfigInvalid, ReportInvalid, ZermeloError
from .scenarios import bundled_config, bundled_names
from .solvers import (SolveResult, affine_elliptic_example,
                      brute_force_min_time, constant_current_route, shoot)
from .plane import Vec2

log = logging.getLogger("zermelo")

BRUTE_PAIR_TOL = 1e-3
EXACT_PAIR_TOL = 1e-6


def _setup_logging() -> None:
    level = os.environ.get("ZERMELO_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO,
              "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s")


def _analytic_parameters(cfg: dict):
    """Extract (eps, a, sign) for the closed-form elliptic solver."""
    cset, cur = cfg["set"], cfg["current"]
    if cset["type"] != "ellipse" or abs(cset["r1"] - 1.0) > 1e-12:
        raise ZermeloError("analytic_example needs the ellipse set with r1 = 1")
    if cur["type"] != "affine":
        raise ZermeloError("analytic_example needs an affine current")
    d = cur["D"]
    if (d[0][1], d[1][0], d[1][1]) != (0.0, 0.0, 0.0) or any(cur["b"]):
        raise ZermeloError("analytic_example needs D = diag(d11, 0), b = 0")
    if cfg["start"].get("point") != [0.0, 0.0]:
        raise ZermeloError("analytic_example starts at the origin")
    d11 = float(d[0][0])
    if d11 == 0.0:
        raise ZermeloError("analytic_example needs a nonzero d11")
    return abs(d11), 1.0 / float(cset["r2"]), \
        ("upstream" if d11 < 0.0 else "downstream")


def _run_one_solver(solver_id: str, cfg: dict, scenario):
    """Returns (result_or_None, bracket_or_None, trajectory, extra_polyline)."""
    if solver_id == "shoot":
        res = shoot(scenario)
        return res, None, res.trajectory, None
    if solver_id == "constant":
        res = constant_current_route(scenario)
        return res, None, res.trajectory, None
    if solver_id == "analytic_example":
        eps, a, sign = _analytic_parameters(cfg)
        target = Vec2(*map(float, cfg["target"]["point"]))
        ex = affine_elliptic_example(eps, a, sign, target)
        traj = ex.optimal_trajectory(scenario.horizon)
        diags = compute_diagnostics(traj, scenario.control_set, scenario.field)
        candidates = [(float("nan"), ex.t_const)]
        for c, e in zip(ex.roots_C, ex.E_values):
            if sign == "upstream" and 0.0 < e < 1.0:
                candidates.append((c, -math.log(e) / eps))
            elif sign == "downstream" and e > 1.0:
                candidates.append((c, math.log(e) / eps))
        res = SolveResult(ex.t_opt, traj, diags, "analytic_example",
                          candidates)
        extra = ex.constant_trajectory().x
        return res, None, traj, extra
    if solver_id == "brute_force":
        bracket = brute_force_min_time(scenario, build_grid_spec(cfg))
        return None, bracket, None, None
    raise ZermeloError(f"unknown solver {solver_id!r}")


def cmd_run(args) -> int:
    _setup_logging()
    cfg_path = Path(args.config)
    try:
        cfg = json.loads(cfg_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    try:
        validate_config(cfg)
        scenario = build_scenario(cfg, name=cfg_path.stem)
    except (ConfigInvalid, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3

    out_dir = Path(args.out or "zermelo_out")
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = cfg_path.stem
    plot = cfg.get("plot", True) and not args.no_plot

    scene = []
    for solver_id in cfg["solvers"]:
        try:
            result, bracket, traj, extra = _run_one_solver(
                solver_id, cfg, scenario)
        except (ZermeloError, ValueError) as exc:
            print(f"solver {solver_id} failed: {exc}", file=sys.stderr)
            return 2
        rep = report_mod.make_report(cfg, solver_id, result, bracket)
        rep_path = out_dir / f"{stem}_{solver_id}.json"
        report_mod.write_report(rep_path, rep)
        if traj is not None:
            csv_path = out_dir / f"{stem}_{solver_id}.csv"
            write_pmp_csv(traj, csv_path)
            scene.append((solver_id, traj, extra))
        log.info("%s: t_f=%s -> %s", solver_id, rep.get("t_f"), rep_path)
        print(f"{solver_id}: t_f = {rep['t_f']:.9g}")

    if plot:
        report_mod.write_scene_svg(out_dir / f"{stem}.svg", scenario, scene)
    return 0


def _pair_agrees(ra: dict, rb: dict) -> tuple[bool, float]:
    """Agreement check and the |difference| actually compared."""
    a_br, b_br = ra.get("bracket"), rb.get("bracket")
    if a_br and b_br:
        lo = max(a_br[0], b_br[0])
        hi = min(a_br[1], b_br[1])
        return lo - BRUTE_PAIR_TOL <= hi, max(0.0, lo - hi)
    if a_br or b_br:
        br = a_br or b_br
        t = rb["t_f"] if a_br else ra["t_f"]
        inside = br[0] - BRUTE_PAIR_TOL <= t <= br[1] + BRUTE_PAIR_TOL
        gap = max(0.0, br[0] - t, t - br[1])
        return inside, gap
    diff = abs(ra["t_f"] - rb["t_f"])
    tol = (EXACT_PAIR_TOL + ra.get("t_f_slack", 0.0)
           + rb.get("t_f_slack", 0.0))
    return diff <= tol, diff


def cmd_compare(args) -> int:
    _setup_logging()
    try:
        reports = [report_mod.read_report(p) for p in args.reports]
    except ReportInvalid as exc:
        print(f"report error: {exc}", file=sys.stderr)
        return 3
    hashes = {r["scenario_hash"] for r in reports}
    if len(hashes) != 1:
        print("report error: reports describe different scenarios "
              f"(hashes {sorted(hashes)})", file=sys.stderr)
        return 3

    header = f"{'solver':<18}{'t_f':>14}{'H-resid':>11}{'orth':>11}" \
             f"{'bound':>11}{'zne':>11}{'abnormal':>10}"
    print(header)
    print("-" * len(header))
    for r in reports:
        d = r.get("diagnostics") or {}
        def cell(key):
            v = d.get(key)
            return f"{v:>11.2e}" if isinstance(v, float) else f"{'-':>11}"
        abn = str(d.get("abnormal", "-"))
        print(f"{r['solver_id']:<18}{r['t_f']:>14.9f}"
              + cell("max_hamiltonian_residual") + cell("max_orthogonality_residual")
              + cell("max_boundary_residual") + cell("max_zne_residual")
              + f"{abn:>10}")

    ok = True
    for i in range(len(reports)):
        for j in range(i + 1, len(reports)):
            agrees, gap = _pair_agrees(reports[i], reports[j])
            if not agrees:
                ok = False
                print(f"DISAGREE {reports[i]['solver_id']} vs "
                      f"{reports[j]['solver_id']}: gap {gap:.3e}")
    return 0 if ok else 1


def cmd_examples(args) -> int:
    _setup_logging()
    for name in bundled_names():
        cfg = bundled_config(name)
        print(f"{name:<24} set={cfg['set']['type']:<8} "
              f"current={cfg['current']['type']:<9} "
              f"solvers={','.join(cfg['solvers'])}")
    if args.write:
        out = Path(args.write)
        out.mkdir(parents=True, exist_ok=True)
        for name in bundled_names():
            path = out / f"{name}.json"
            path.write_text(json.dumps(bundled_config(name), indent=2,
                                       sort_keys=True) + "\n")
        print(f"wrote {len(bundled_names())} configs to {out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="zermelo",
        description="Minimum-time navigation solvers for strictly convex "
                    "velocity sets under planar currents.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the solvers of a scenario config")
    p_run.add_argument("config", help="path to a scenario JSON file")
    p_run.add_argument("--out", help="output directory (default zermelo_out)")
    p_run.add_argument("--no-plot", action="store_true",
                       help="skip the SVG scene")
    p_run.set_defaults(fn=cmd_run)

    p_cmp = sub.add_parser("compare", help="cross-check solver reports")
    p_cmp.add_argument("reports", nargs="+", help="report JSON files")
    p_cmp.set_defaults(fn=cmd_compare)

    p_ex = sub.add_parser("examples", help="list bundled scenarios")
    p_ex.add_argument("--write", help="also write the configs to a directory")
    p_ex.set_defaults(fn=cmd_examples)

    args = parser.parse_args(argv)
    if args.command == "compare" and len(args.reports) < 2:
        parser.error("compare needs at least two reports")
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
