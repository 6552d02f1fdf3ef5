"""Frame-based Clifford-bundle calculus on Riemann-Cartan geometries.

The engine builds the unique metric-compatible connection from a tetrad and
a torsion table, implements the standard, torsionful and spin Dirac
operators over order-2 jet arithmetic, and verifies their first- and
second-order identities (through the generalized Lichnerowicz formula) as
numerical residuals on sampled chart points.
"""

from .cliffalg import (
    Multivector,
    commutator,
    geometric_product,
    grade_involution,
    grade_project,
    hodge_dual,
    left_contraction,
    reversion,
    wedge,
)
from .fieldspec import Scenario, load_scenario, load_scenario_file, parse_expr
from .geometry import CurvatureData, FrameGeometry, build_frame, curvature
from .harness import ResidualReport, cli_main, run_suite, sample_points
from .jets import ChartPoint, Jet2, seed_coordinate

__all__ = [
    "ChartPoint",
    "CurvatureData",
    "FrameGeometry",
    "Jet2",
    "Multivector",
    "ResidualReport",
    "Scenario",
    "build_frame",
    "cli_main",
    "commutator",
    "curvature",
    "geometric_product",
    "grade_involution",
    "grade_project",
    "hodge_dual",
    "left_contraction",
    "load_scenario",
    "load_scenario_file",
    "parse_expr",
    "reversion",
    "run_suite",
    "sample_points",
    "seed_coordinate",
    "wedge",
]
