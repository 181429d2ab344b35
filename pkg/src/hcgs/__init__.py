"""Conditional gradient and hybrid conditional gradient-smoothing solvers."""

from .linalg import SpectralConfig, SpectralResult, dominant_eigpair, power_svd
from .oracles import (BoundedDomain, L1Ball, L2Ball, LinearMap, LipschitzTerm,
                      PsdTraceBall, SmoothTerm, Spectrahedron, TraceBall, l1_term,
                      lmo_l1_ball, lmo_psd_trace_ball, lmo_spectrahedron, lmo_trace_ball,
                      moreau_gradient, moreau_value, soft_threshold)
from .solvers import (Schedule, SolveReport, SolverConfig, cg_rate_bound, cg_solve,
                      default_schedule, hcgs_rate_bound, hcgs_solve, stop_on_relative_change)

__version__ = "0.1.0"

__all__ = [
    "BoundedDomain", "L1Ball", "L2Ball", "LinearMap", "LipschitzTerm", "PsdTraceBall",
    "Schedule", "SmoothTerm", "SolveReport", "SolverConfig", "SpectralConfig",
    "SpectralResult", "Spectrahedron", "TraceBall", "cg_rate_bound", "cg_solve",
    "default_schedule", "dominant_eigpair", "hcgs_rate_bound", "hcgs_solve", "l1_term",
    "lmo_l1_ball", "lmo_psd_trace_ball", "lmo_spectrahedron", "lmo_trace_ball",
    "moreau_gradient", "moreau_value", "power_svd", "soft_threshold",
    "stop_on_relative_change",
]
