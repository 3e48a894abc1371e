"""Scenario configuration: validation, construction, identity hashing.

The schema mirrors the domain types one to one:

    {"start":   {"point": [x, y]} | {"segment": [[..], [..]]},
     "target":  {"point": [x, y], "radius": r},
     "set":     {"type": "disk", "V": v} | {"type": "ellipse", "r1":, "r2":}
               | {"type": "polar", "v0":, "e":},
     "current": {"type": "constant", "b": [..]}
               | {"type": "affine", "D": [[..],[..]], "b": [..]},
     "horizon": T,
     "solvers": ["shoot" | "constant" | "analytic_example" | "brute_force"],
     "plot": bool, "seed": int,
     "brute_force": {"nx":, "ny":, "n_controls":, "dt":, "bounds": [[..],[..]]}}

Validation errors name the offending field with a dotted path rooted at
``scenario``.
"""

from __future__ import annotations

import hashlib
import json
import numbers

from .convex import Disk, Ellipse, egg
from .currents import Affine, Constant, RegionBox
from .errors import ConfigInvalid
from .plane import Mat2, Vec2
from .solvers import (GridSpec, PointStart, Scenario, SegmentStart, Target,
                      Tolerances)

SOLVER_IDS = ("shoot", "constant", "analytic_example", "brute_force")

_IDENTITY_KEYS = ("start", "target", "set", "current", "horizon")


def _need(cfg: dict, key: str, path: str):
    if key not in cfg:
        raise ConfigInvalid(f"{path}.{key}", "missing required field")
    return cfg[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ConfigInvalid(path, f"expected a number, got {value!r}")
    return float(value)


def _pair(value, path: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigInvalid(path, f"expected [x, y], got {value!r}")
    return _number(value[0], f"{path}[0]"), _number(value[1], f"{path}[1]")


def validate_config(cfg: dict) -> None:
    """Raise ConfigInvalid naming the first offending field."""
    if not isinstance(cfg, dict):
        raise ConfigInvalid("scenario", "configuration must be an object")
    root = "scenario"

    start = _need(cfg, "start", root)
    if not isinstance(start, dict) or len(set(start) & {"point", "segment"}) != 1:
        raise ConfigInvalid(f"{root}.start",
                            "needs exactly one of 'point' or 'segment'")
    if "point" in start:
        _pair(start["point"], f"{root}.start.point")
    else:
        seg = start["segment"]
        if not isinstance(seg, (list, tuple)) or len(seg) != 2:
            raise ConfigInvalid(f"{root}.start.segment",
                                "expected [[x,y],[x,y]]")
        _pair(seg[0], f"{root}.start.segment[0]")
        _pair(seg[1], f"{root}.start.segment[1]")

    target = _need(cfg, "target", root)
    if not isinstance(target, dict):
        raise ConfigInvalid(f"{root}.target", "expected an object")
    _pair(_need(target, "point", f"{root}.target"), f"{root}.target.point")
    radius = _number(target.get("radius", 1e-6), f"{root}.target.radius")
    if radius <= 0.0:
        raise ConfigInvalid(f"{root}.target.radius", "must be positive")

    cset = _need(cfg, "set", root)
    if not isinstance(cset, dict) or "type" not in cset:
        raise ConfigInvalid(f"{root}.set", "expected an object with 'type'")
    kind = cset["type"]
    if kind == "disk":
        v = _number(_need(cset, "V", f"{root}.set"), f"{root}.set.V")
        if v <= 0.0:
            raise ConfigInvalid(f"{root}.set.V", "must be positive")
    elif kind == "ellipse":
        for key in ("r1", "r2"):
            v = _number(_need(cset, key, f"{root}.set"), f"{root}.set.{key}")
            if v <= 0.0:
                raise ConfigInvalid(f"{root}.set.{key}", "must be positive")
    elif kind == "polar":
        v0 = _number(_need(cset, "v0", f"{root}.set"), f"{root}.set.v0")
        e = _number(_need(cset, "e", f"{root}.set"), f"{root}.set.e")
        if v0 <= 0.0:
            raise ConfigInvalid(f"{root}.set.v0", "must be positive")
        if not 0.0 <= e:
            raise ConfigInvalid(f"{root}.set.e", "must be nonnegative")
    else:
        raise ConfigInvalid(f"{root}.set.type",
                            f"unknown set type {kind!r} "
                            "(expected disk, ellipse or polar)")

    current = _need(cfg, "current", root)
    if not isinstance(current, dict) or "type" not in current:
        raise ConfigInvalid(f"{root}.current", "expected an object with 'type'")
    ckind = current["type"]
    if ckind == "constant":
        _pair(_need(current, "b", f"{root}.current"), f"{root}.current.b")
    elif ckind == "affine":
        d = _need(current, "D", f"{root}.current")
        if not isinstance(d, (list, tuple)) or len(d) != 2:
            raise ConfigInvalid(f"{root}.current.D", "expected [[a,b],[c,d]]")
        _pair(d[0], f"{root}.current.D[0]")
        _pair(d[1], f"{root}.current.D[1]")
        _pair(_need(current, "b", f"{root}.current"), f"{root}.current.b")
    else:
        raise ConfigInvalid(f"{root}.current.type",
                            f"unknown current type {ckind!r} "
                            "(expected constant or affine)")

    horizon = _number(_need(cfg, "horizon", root), f"{root}.horizon")
    if horizon <= 0.0:
        raise ConfigInvalid(f"{root}.horizon", "must be positive")

    solvers = _need(cfg, "solvers", root)
    if not isinstance(solvers, list) or not solvers:
        raise ConfigInvalid(f"{root}.solvers", "expected a non-empty list")
    for i, sid in enumerate(solvers):
        if sid not in SOLVER_IDS:
            raise ConfigInvalid(f"{root}.solvers[{i}]",
                                f"unknown solver {sid!r} "
                                f"(expected one of {', '.join(SOLVER_IDS)})")

    if "plot" in cfg and not isinstance(cfg["plot"], bool):
        raise ConfigInvalid(f"{root}.plot", "expected a boolean")
    if "seed" in cfg and (isinstance(cfg["seed"], bool)
                          or not isinstance(cfg["seed"], int)):
        raise ConfigInvalid(f"{root}.seed", "expected an integer")

    if "brute_force" in cfg:
        bf = cfg["brute_force"]
        if not isinstance(bf, dict):
            raise ConfigInvalid(f"{root}.brute_force", "expected an object")
        for key in ("nx", "ny", "n_controls"):
            if key in bf and (isinstance(bf[key], bool)
                              or not isinstance(bf[key], int) or bf[key] < 3):
                raise ConfigInvalid(f"{root}.brute_force.{key}",
                                    "expected an integer >= 3")
        if "dt" in bf and _number(bf["dt"], f"{root}.brute_force.dt") <= 0.0:
            raise ConfigInvalid(f"{root}.brute_force.dt", "must be positive")
        if "bounds" in bf:
            b = bf["bounds"]
            if not isinstance(b, (list, tuple)) or len(b) != 2:
                raise ConfigInvalid(f"{root}.brute_force.bounds",
                                    "expected [[x,y],[x,y]]")
            _pair(b[0], f"{root}.brute_force.bounds[0]")
            _pair(b[1], f"{root}.brute_force.bounds[1]")


def build_control_set(cset: dict):
    kind = cset["type"]
    if kind == "disk":
        return Disk(float(cset["V"]))
    if kind == "ellipse":
        return Ellipse(float(cset["r1"]), float(cset["r2"]))
    return egg(float(cset["v0"]), float(cset["e"]))


def build_field(current: dict):
    if current["type"] == "constant":
        return Constant(Vec2(*map(float, current["b"])))
    d = current["D"]
    return Affine(Mat2(float(d[0][0]), float(d[0][1]),
                       float(d[1][0]), float(d[1][1])),
                  Vec2(*map(float, current["b"])))


def build_scenario(cfg: dict, name: str = "") -> Scenario:
    validate_config(cfg)
    start_cfg = cfg["start"]
    if "point" in start_cfg:
        start = PointStart(Vec2(*map(float, start_cfg["point"])))
    else:
        a, b = start_cfg["segment"]
        start = SegmentStart(Vec2(*map(float, a)), Vec2(*map(float, b)))
    target = Target(Vec2(*map(float, cfg["target"]["point"])),
                    float(cfg["target"].get("radius", 1e-6)))
    try:
        tol = Tolerances(**cfg.get("tolerances", {}))
    except TypeError as exc:
        raise ConfigInvalid("scenario.tolerances", str(exc)) from exc
    return Scenario(start, target, build_control_set(cfg["set"]),
                    build_field(cfg["current"]), float(cfg["horizon"]),
                    tol, name)


def build_grid_spec(cfg: dict) -> GridSpec:
    bf = cfg.get("brute_force", {})
    bounds = None
    if "bounds" in bf:
        (x0, y0), (x1, y1) = bf["bounds"]
        bounds = RegionBox(Vec2(float(x0), float(y0)),
                           Vec2(float(x1), float(y1)))
    return GridSpec(nx=bf.get("nx", 201), ny=bf.get("ny", 201),
                    n_controls=bf.get("n_controls", 64),
                    dt=float(bf.get("dt", 5e-3)), bounds=bounds)


def scenario_hash(cfg: dict) -> str:
    """Identity hash over the canonicalized scenario-defining fields."""
    subset = {k: cfg[k] for k in _IDENTITY_KEYS if k in cfg}
    canon = json.dumps(subset, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
