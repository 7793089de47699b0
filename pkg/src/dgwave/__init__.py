"""
dgwave

Discontinuous Galerkin solver for blow-up solutions of the semilinear wave
equation u_tt - u_xx = |u|^p in one space dimension.

Features:
- Degree 0..7 Lagrange elements with upwind fluxes on a periodic mesh
- Adaptive time step dt = h^(1+sigma) min(1, |u_h|_inf^-(1+nu))
- Numerical blow-up detection, K_h monitoring, xi_R curves, blow-up time bounds
- Upwind finite-difference comparator sharing the same run loop
- Reference problems, error norms and convergence studies

Example:
    ```python
    from dgwave import Mesh, TimeStepPolicy, build_reference_element, make_case, run_until_blowup

    case = make_case(4, p=3.0)
    result, history = run_until_blowup(
        case.problem(),
        Mesh(0.0, 1.0, 64),
        build_reference_element(1),
        TimeStepPolicy(sigma=0.1, nu=0.1),
        threshold=1e9,
    )
    print(result.status, result.T_h)
    ```
"""

from .benchmarks import (
    BenchmarkCase,
    blowup_time_table_failures,
    convergence_study,
    error_norms,
    exact_solution,
    fd_error_study,
    make_case,
    markdown_summary,
    policy_sweep,
    residual_check_exact,
    run_benchmark,
    xi_study,
)
from .blowup_analysis import (
    G,
    RunHistory,
    XiRecorder,
    blowup_time_upper_bound,
    check_blowup_inequalities,
    drive,
    estimate_blowup_steps,
    fit_bound_constant,
    gamma_h,
    k_h,
    mean_value_ode_blowup_time,
    run_until_blowup,
    stability_mesh_bound,
    weighted_l1_norm,
    xi_curve,
)
from .contracts import (
    BenchmarkReport,
    BlowUpResult,
    ConvergenceRow,
    ErrorRow,
    InequalityReport,
    InequalityViolation,
    PropertyResult,
    RunStatus,
    SweepResult,
    TimeStepPolicy,
    XiCurve,
)
from .dg_solver import (
    DGScheme,
    FieldState,
    Mesh,
    ProblemConfig,
    adaptive_dt,
    consistency_residuals,
    dg_step,
    initial_state,
    interpolate,
    sup_norm,
)
from .errors import (
    CFLViolationError,
    DGWaveError,
    DivergentIntegralError,
    ExactSolutionDomainError,
    InconsistentInputError,
    InvalidDegreeError,
    InvalidExponentError,
    InvalidMeshError,
    PeriodicityError,
    RefinementExhaustedError,
    ValidationError,
    ZeroNormError,
)
from .fd_reference import FDScheme, FDState, fd_run_until_blowup, fd_step
from .reference_element import (
    ReferenceElement,
    build_reference_element,
    compute_lambda,
    mass_matrix_scaling,
)
from .refinement import RefinementPolicy, find_admissible_mesh
from .scheme import BaseScheme, Scheme, SchemeState

__version__ = "0.1.0"

__all__ = [
    # Reference element
    "ReferenceElement",
    "build_reference_element",
    "mass_matrix_scaling",
    "compute_lambda",
    # DG solver
    "Mesh",
    "ProblemConfig",
    "FieldState",
    "DGScheme",
    "interpolate",
    "initial_state",
    "adaptive_dt",
    "dg_step",
    "sup_norm",
    "consistency_residuals",
    # Scheme protocol
    "Scheme",
    "SchemeState",
    "BaseScheme",
    # Blow-up analysis
    "RunHistory",
    "XiRecorder",
    "drive",
    "run_until_blowup",
    "k_h",
    "weighted_l1_norm",
    "gamma_h",
    "G",
    "blowup_time_upper_bound",
    "fit_bound_constant",
    "mean_value_ode_blowup_time",
    "stability_mesh_bound",
    "estimate_blowup_steps",
    "check_blowup_inequalities",
    "xi_curve",
    # Finite differences
    "FDState",
    "FDScheme",
    "fd_step",
    "fd_run_until_blowup",
    # Benchmarks
    "BenchmarkCase",
    "make_case",
    "exact_solution",
    "residual_check_exact",
    "error_norms",
    "run_benchmark",
    "fd_error_study",
    "convergence_study",
    "policy_sweep",
    "blowup_time_table_failures",
    "xi_study",
    "markdown_summary",
    # Refinement
    "RefinementPolicy",
    "find_admissible_mesh",
    # Contracts
    "TimeStepPolicy",
    "RunStatus",
    "BlowUpResult",
    "InequalityViolation",
    "InequalityReport",
    "XiCurve",
    "ErrorRow",
    "ConvergenceRow",
    "SweepResult",
    "BenchmarkReport",
    "PropertyResult",
    # Errors
    "DGWaveError",
    "ValidationError",
    "InvalidDegreeError",
    "InvalidMeshError",
    "InvalidExponentError",
    "CFLViolationError",
    "PeriodicityError",
    "ExactSolutionDomainError",
    "ZeroNormError",
    "InconsistentInputError",
    "DivergentIntegralError",
    "RefinementExhaustedError",
]
