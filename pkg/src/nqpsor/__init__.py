"""Projected SOR and adaptive projected SOR solvers for nonnegative and
box-constrained quadratic programming, with problem generators, optimality
diagnostics, and a matrix-free image-deblurring front end."""

from ._backend import BACKEND
from .diagnostics import (
    IterationTrace,
    KktReport,
    check_dissipation,
    componentwise_dissipation_report,
    decrement_stats,
    kkt_residual,
    trace_dissipation_violations,
)
from .generators import (
    GeneratedProblem,
    GenSpec,
    gen_matrix,
    gen_rhs,
    gen_suite,
    rank_deficient_spectrum,
    spd_spectrum,
    spsd_spectrum,
)
from .linalg import (
    ColumnOperator,
    SparseSymMatrix,
    build_explicit_normal,
    matvec,
    normal_matvec,
)
from .model import NnlsProblem, NqpProblem, gradient, nnls_to_nqp, objective, shift
from .solvers import (
    NumericalError,
    SolveResult,
    SolverConfig,
    Status,
    StepSize,
    WolfeParams,
    apsor_freeze_solve,
    apsor_shift_solve,
    apsor_wolfe_solve,
    h_to_omega,
    itoh_abe_step,
    naive_psor_solve,
    normal_psor_solve,
    omega_to_h,
    psor_solve,
    psor_sweep,
    sor_sweep,
    wolfe_update,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ColumnOperator",
    "GenSpec",
    "GeneratedProblem",
    "IterationTrace",
    "KktReport",
    "NnlsProblem",
    "NqpProblem",
    "NumericalError",
    "SolveResult",
    "SolverConfig",
    "SparseSymMatrix",
    "Status",
    "StepSize",
    "WolfeParams",
    "apsor_freeze_solve",
    "apsor_shift_solve",
    "apsor_wolfe_solve",
    "build_explicit_normal",
    "check_dissipation",
    "componentwise_dissipation_report",
    "decrement_stats",
    "gen_matrix",
    "gen_rhs",
    "gen_suite",
    "gradient",
    "h_to_omega",
    "itoh_abe_step",
    "kkt_residual",
    "matvec",
    "naive_psor_solve",
    "nnls_to_nqp",
    "normal_matvec",
    "normal_psor_solve",
    "objective",
    "omega_to_h",
    "psor_solve",
    "psor_sweep",
    "rank_deficient_spectrum",
    "shift",
    "sor_sweep",
    "spd_spectrum",
    "spsd_spectrum",
    "trace_dissipation_violations",
    "wolfe_update",
    "__version__",
]
