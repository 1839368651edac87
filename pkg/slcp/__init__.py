__all__ = [
    "SlcpException",
    "ModelError",
    "DomainError",
    "PositivityError",
    "SolverError",
    "SubproblemError",
    "BenchmarkError",
    "UnknownBenchmarkError",
    "ConstantsError",
    "ReferenceOptimumError",
    "Variable",
    "Monomial",
    "Posynomial",
    "BlackBoxFn",
    "StandardFormProblem",
    "ProblemBuilder",
    "ValidationReport",
    "eval_monomial",
    "eval_posynomial",
    "finite_difference_gradient",
    "signomial_ratio",
    "validate",
    "LseForm",
    "MonoAffineForm",
    "logspace_gradient",
    "posynomial_to_lse",
    "monomial_to_affine",
    "lse_eval",
    "SubproblemSpec",
    "SubproblemSolution",
    "SubproblemStatus",
    "LinearRow",
    "solve_subproblem",
    "kkt_residual",
    "Algorithm",
    "Termination",
    "SolveOptions",
    "SolveResult",
    "IterationRecord",
    "IterateState",
    "solve",
    "build_subproblem",
    "check_termination",
    "damped_bfgs_update",
    "merit_line_search",
    "reduced_lagrangian_gradient",
    "least_squares_multipliers",
    "benchmark",
    "benchmark_ids",
    "get_benchmark",
    "TrialConfig",
    "TrialRecord",
    "TrialSet",
    "SummaryTable",
    "run_trials",
    "convergence_curve",
    "summarize",
    "export",
    "run",
]

from ._exceptions import (
    SlcpException,
    ModelError,
    DomainError,
    PositivityError,
    SolverError,
    SubproblemError,
    BenchmarkError,
    UnknownBenchmarkError,
    ConstantsError,
    ReferenceOptimumError,
)
from ._model import (
    Variable,
    Monomial,
    Posynomial,
    BlackBoxFn,
    StandardFormProblem,
    ProblemBuilder,
    ValidationReport,
    eval_monomial,
    eval_posynomial,
    finite_difference_gradient,
    signomial_ratio,
    validate,
)
from ._transform import (
    LseForm,
    MonoAffineForm,
    logspace_gradient,
    posynomial_to_lse,
    monomial_to_affine,
    lse_eval,
)
from ._subsolver import (
    SubproblemSpec,
    SubproblemSolution,
    SubproblemStatus,
    LinearRow,
    solve_subproblem,
    kkt_residual,
)
from ._driver import (
    Algorithm,
    Termination,
    SolveOptions,
    SolveResult,
    IterationRecord,
    IterateState,
    solve,
    build_subproblem,
    check_termination,
    damped_bfgs_update,
    least_squares_multipliers,
    merit_line_search,
    reduced_lagrangian_gradient,
)
from ._registry import benchmark, benchmark_ids, get_benchmark
from ._bench import (
    TrialConfig,
    TrialRecord,
    TrialSet,
    SummaryTable,
    run_trials,
    convergence_curve,
    summarize,
    export,
)
from ._cli import run
