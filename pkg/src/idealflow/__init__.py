"""Ideal circle pattern metrics on closed surfaces via combinatorial curvature flows."""

from .attainability import AttainabilityReport, boundary_theta_sum, check_target
from .complex import (
    Geometry,
    SurfaceComplex,
    ValidationReport,
    check_c1,
    dump_complex,
    grid_torus,
    incident_edge_ends,
    load_complex,
    load_fixture,
    read_mesh,
    validate,
)
from .flow import (
    ConvergenceError,
    PreconditionError,
    SolveReport,
    SolverConfig,
    calabi_velocity,
    energy,
    run_calabi,
    run_newton,
    run_ricci,
)
from .geometry import (
    center_angle,
    center_angle_derivatives,
    curvatures,
    edge_length,
    from_coords,
    jacobian,
    to_coords,
    total_area,
)
from .layout import develop, to_svg
from .potential import PotentialContext, lambda_fn, psi

__version__ = "0.1.0"

__all__ = [
    "AttainabilityReport", "ConvergenceError", "Geometry", "PotentialContext",
    "PreconditionError", "SolveReport", "SolverConfig", "SurfaceComplex",
    "ValidationReport", "boundary_theta_sum", "calabi_velocity", "center_angle",
    "center_angle_derivatives", "check_c1", "check_target", "curvatures", "develop",
    "dump_complex", "edge_length", "energy", "from_coords", "grid_torus", "incident_edge_ends",
    "jacobian", "lambda_fn", "load_complex", "load_fixture", "psi", "read_mesh",
    "run_calabi", "run_newton", "run_ricci", "to_coords", "to_svg", "total_area",
    "validate",
]
