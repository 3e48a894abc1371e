"""Bundled scenario configurations.

Each entry is a full run configuration in the JSON schema the CLI consumes;
they double as the regression corpus for the residual gates. The two elliptic
scenarios reproduce the worked closed-form cases, the constant-current ones
exercise the geometric router, and the isotropic one pins down the degenerate
multiplier classification.
"""

from copy import deepcopy

_SCENARIOS = {
    "no_current_disk": {
        "start": {"point": [0.0, 0.0]},
        "target": {"point": [1.0, 0.0], "radius": 1e-8},
        "set": {"type": "disk", "V": 1.0},
        "current": {"type": "constant", "b": [0.0, 0.0]},
        "horizon": 2.0,
        "solvers": ["shoot", "constant"],
        "plot": True,
        "seed": 0,
    },
    "constant_current_disk": {
        "start": {"point": [0.0, 0.0]},
        "target": {"point": [0.0, 4.0], "radius": 1e-8},
        "set": {"type": "disk", "V": 2.0},
        "current": {"type": "constant", "b": [-1.0, 0.0]},
        "horizon": 5.0,
        "solvers": ["shoot", "constant"],
        "plot": True,
        "seed": 0,
    },
    "egg_constant_current": {
        "start": {"point": [0.0, 0.0]},
        "target": {"point": [0.0, 3.0], "radius": 1e-8},
        "set": {"type": "polar", "v0": 1.0, "e": 0.3},
        "current": {"type": "constant", "b": [-0.4, 0.0]},
        "horizon": 8.0,
        "solvers": ["shoot", "constant"],
        "plot": True,
        "seed": 0,
    },
    "egg_segment_start": {
        "start": {"segment": [[-2.0, 0.0], [2.0, 0.0]]},
        "target": {"point": [0.0, 3.0], "radius": 1e-8},
        "set": {"type": "polar", "v0": 1.0, "e": 0.3},
        "current": {"type": "constant", "b": [-0.4, 0.0]},
        "horizon": 8.0,
        "solvers": ["constant"],
        "plot": True,
        "seed": 0,
    },
    "upstream_ellipse": {
        "start": {"point": [0.0, 0.0]},
        "target": {"point": [1.0, 1.0], "radius": 1e-6},
        "set": {"type": "ellipse", "r1": 1.0, "r2": 0.5},
        "current": {"type": "affine", "D": [[-0.5, 0.0], [0.0, 0.0]],
                    "b": [0.0, 0.0]},
        "horizon": 4.0,
        "solvers": ["shoot", "analytic_example"],
        "plot": True,
        "seed": 0,
    },
    "downstream_ellipse": {
        "start": {"point": [0.0, 0.0]},
        "target": {"point": [1.0, 1.0], "radius": 1e-6},
        "set": {"type": "ellipse", "r1": 1.0, "r2": 0.5},
        "current": {"type": "affine", "D": [[0.5, 0.0], [0.0, 0.0]],
                    "b": [0.0, 0.0]},
        "horizon": 4.0,
        "solvers": ["shoot", "analytic_example"],
        "plot": True,
        "seed": 0,
    },
    "isotropic_affine_disk": {
        "start": {"point": [0.0, 0.0]},
        "target": {"point": [1.0, 0.5], "radius": 1e-6},
        "set": {"type": "disk", "V": 1.0},
        "current": {"type": "affine", "D": [[0.25, 0.0], [0.0, 0.25]],
                    "b": [0.0, 0.0]},
        "horizon": 3.0,
        "solvers": ["shoot"],
        "plot": True,
        "seed": 0,
    },
}


def bundled_names() -> list[str]:
    return sorted(_SCENARIOS)


def bundled_config(name: str) -> dict:
    if name not in _SCENARIOS:
        raise KeyError(f"unknown bundled scenario {name!r}; "
                       f"available: {', '.join(bundled_names())}")
    return deepcopy(_SCENARIOS[name])


def pmp_bundle() -> list[str]:
    """Names of bundled scenarios whose solver list includes shooting."""
    return [n for n in bundled_names() if "shoot" in _SCENARIOS[n]["solvers"]]
