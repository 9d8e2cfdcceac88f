"""Fronts of a free-boundary KPP equation in periodic and quasi-periodic media."""

from .builder import Profile, build_semiwave, extract_profile, tail_gap, veq_residual
from .config import ExperimentConfig
from .diagnostics import (
    almost_period_scan,
    average_speed,
    forward_convergence,
    rho,
    rho_series,
    speed_bounds,
    speed_law,
)
from .freeboundary import (
    FrontState,
    SolverConfig,
    Trajectory,
    boundary_flux,
    compare_ordered,
    evolve,
    init_cutoff,
    step,
    steady_for_run,
)
from .kernels import BACKEND
from .media import (
    QuasiPeriodicMedium,
    constant_medium,
    format_medium,
    parse_medium,
    periodic_medium,
    quasi_periodic_medium,
)
from .oracle import shoot_profile, solve_speed
from .steady_state import SteadyState, compute_steady_state

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ExperimentConfig", "FrontState", "Profile", "QuasiPeriodicMedium", "SolverConfig",
    "SteadyState", "Trajectory", "almost_period_scan", "average_speed", "boundary_flux",
    "build_semiwave", "compare_ordered", "compute_steady_state", "constant_medium", "evolve",
    "extract_profile", "format_medium", "forward_convergence", "init_cutoff", "parse_medium",
    "periodic_medium", "quasi_periodic_medium", "rho", "rho_series", "shoot_profile",
    "solve_speed", "speed_bounds", "speed_law", "steady_for_run", "step", "tail_gap",
    "veq_residual",
]
