"""Minimum-time planar navigation with strictly convex velocity sets.

The package splits along the structure of the problem: exact planar algebra
(`plane`), the convex-geometry kernel (`convex`), drift fields and their
diagnostics (`currents`), the coupled state/adjoint and heading integrators
with residual checks (`dynamics`), the top-level solvers that cross-validate
each other (`solvers`), and a batch CLI (`cli`).
"""

from .convex import (BoundaryChart, ControlSet, ConvexityReport, Disk,
                     Ellipse, PolarCurve, Region, Shifted, egg)
from .currents import (Affine, Analytic, Constant, CurrentField, RegionBox,
                       WeakCurrentReport, permanence_check, weak_current_check)
from .dynamics import (Diagnostics, Normality, PmpTrajectory, TerminalEvent,
                       ZneTrajectory, abnormality_detector, classical_zne_rhs,
                       compute_diagnostics, generic_zne_theta_rhs,
                       hamiltonian_residual, integrate_pmp, integrate_zne,
                       orthogonality_residual, polar_curve_heading_rhs,
                       read_pmp_csv, read_zne_csv, write_pmp_csv,
                       write_zne_csv, zne_residual)
from .plane import Mat2, Vec2, cross, curvature, perp
from .solvers import (BruteForceResult, ExampleResult, GridSpec, PointStart,
                      Scenario, SegmentStart, SolveResult, Target, Tolerances,
                      affine_elliptic_example, brute_force_min_time,
                      constant_current_route, shoot, transversality_residual)

__version__ = "0.1.0"

__all__ = [
    "Affine", "Analytic", "BoundaryChart", "BruteForceResult", "Constant",
    "ControlSet", "ConvexityReport", "CurrentField", "Diagnostics", "Disk",
    "Ellipse", "ExampleResult", "GridSpec", "Mat2", "Normality",
    "PmpTrajectory", "PointStart", "PolarCurve", "Region", "RegionBox",
    "Scenario", "SegmentStart", "Shifted", "SolveResult", "Target",
    "TerminalEvent", "Tolerances", "Vec2", "WeakCurrentReport",
    "ZneTrajectory", "abnormality_detector", "affine_elliptic_example",
    "brute_force_min_time", "classical_zne_rhs", "compute_diagnostics",
    "constant_current_route", "cross", "curvature", "egg",
    "generic_zne_theta_rhs", "hamiltonian_residual", "integrate_pmp",
    "integrate_zne", "orthogonality_residual", "permanence_check", "perp",
    "polar_curve_heading_rhs", "read_pmp_csv", "read_zne_csv", "shoot",
    "transversality_residual", "weak_current_check", "write_pmp_csv",
    "write_zne_csv", "zne_residual",
]
