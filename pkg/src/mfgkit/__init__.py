"""Multi-population mean field games on boxes with Neumann conditions.

Solves the coupled backward HJB / forward KFP system by damped fixed-point
iteration and computes the small-data uniqueness certificate together with
empirical probes (multistart uniqueness, continuous dependence, density and
value bounds).
"""

from .core import (Field, Grid, TimeGrid, Trajectory, gradient, integrate,
                   l2_norm, linf_norm, neumann_laplacian)
from .costs import (CostModel, DensityVector, FixedCost, IntegralCost,
                    LocalCost, MomentCost, SchellingCost, check_monotonicity,
                    estimate_lipschitz, smoothed_negative_part, window_kernel)
from .coupler import (ConvergenceTrace, MFGProblem, MFGSolution,
                      multistart_probe, picard_solve)
from .diagnostics import (DiagnosticsReport, compute_psi,
                          continuous_dependence_probe, density_bound_report,
                          diagnose, gradient_range_constants,
                          value_bound_check)
from .hamiltonians import (HamiltonianModel, ham_bellman, ham_power,
                           ham_robust)
from .hjb import HJBProblem, SolverError, hjb_residual, solve_hjb_backward
from .kfp import KFPProblem, solve_kfp_forward, transport_generator, validate_initial
from .sampling import DensitySampler, project_to_simplex, uniform_density
from .scenarios import bundled_scenarios, scenario
from .verification import run_mms_study

__version__ = "0.1.0"

__all__ = [
    "Field", "Grid", "TimeGrid", "Trajectory", "gradient", "integrate",
    "l2_norm", "linf_norm", "neumann_laplacian",
    "CostModel", "DensityVector", "FixedCost", "IntegralCost", "LocalCost",
    "MomentCost", "SchellingCost", "check_monotonicity", "estimate_lipschitz",
    "smoothed_negative_part", "window_kernel",
    "ConvergenceTrace", "MFGProblem", "MFGSolution", "multistart_probe",
    "picard_solve",
    "DiagnosticsReport", "compute_psi", "continuous_dependence_probe",
    "density_bound_report", "diagnose", "gradient_range_constants",
    "value_bound_check",
    "HamiltonianModel", "ham_bellman", "ham_power", "ham_robust",
    "HJBProblem", "SolverError", "hjb_residual", "solve_hjb_backward",
    "KFPProblem", "solve_kfp_forward", "transport_generator",
    "validate_initial",
    "DensitySampler", "project_to_simplex", "uniform_density",
    "bundled_scenarios", "scenario", "run_mms_study",
]
