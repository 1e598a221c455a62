"""Planar compressible MHD in Lagrangian mass coordinates.

Semi-implicit staggered-grid solver for specific volume, longitudinal and
transverse velocity, transverse magnetic field and temperature, with
density-dependent viscosity and degenerate heat conductivity, plus
diagnostics for the entropy balance, the specific-volume representation and
the pointwise bounds of the solution.
"""

from .core import (
    DomainError,
    Parameters,
    conductivity,
    f_alpha,
    internal_energy,
    pressure,
    viscosity,
)
from .diagnostics import (
    DiagnosticsSample,
    RepresentationReport,
    bounds_monitor,
    effective_stress,
    representation_report,
    sample,
)
from .grid import Grid, State, apply_boundary
from .integrator import (
    Accumulators,
    DtUnderflow,
    PositivityFailure,
    SingularSystem,
    StepControls,
    advance,
    stable_dt,
    step,
)
from .scenarios import builtin_scenarios, get_scenario

__all__ = [
    "Accumulators",
    "DiagnosticsSample",
    "DomainError",
    "DtUnderflow",
    "Grid",
    "Parameters",
    "PositivityFailure",
    "RepresentationReport",
    "SingularSystem",
    "State",
    "StepControls",
    "advance",
    "apply_boundary",
    "bounds_monitor",
    "builtin_scenarios",
    "conductivity",
    "effective_stress",
    "f_alpha",
    "get_scenario",
    "internal_energy",
    "pressure",
    "representation_report",
    "sample",
    "stable_dt",
    "step",
    "viscosity",
]
