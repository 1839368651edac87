"""
Outer loops for SQP, LSQP and SLCP.

All three share one iteration: build a convex sub-problem at the current point,
solve it, line-search an l1 merit function, update multipliers and the
quasi-Newton matrix, then test for termination. They differ in the space the
step lives in (``x`` for SQP, ``y = log x`` otherwise) and in which rows
enter the sub-problem exactly.
"""
import collections
import enum
import math
import time
from dataclasses import dataclass
from typing import Callable, Deque, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import nnls

from ._exceptions import DomainError, SubproblemError
from ._logging import logger
from ._model import Function, StandardFormProblem
from ._subsolver import (
    DEFAULT_MAX_NEWTON,
    DEFAULT_SLACK_L1_WEIGHT,
    DEFAULT_SLACK_WEIGHT,
    DEFAULT_TOL,
    LinearRow,
    SubproblemSolution,
    SubproblemSpec,
    SubproblemStatus,
    solve_subproblem,
)
from ._transform import monomial_to_affine, posynomial_to_lse

BFGS_DAMPING_THRESHOLD = 0.2
BFGS_MIN_STEP = 1e-14
ACTIVE_TOL = 1e-5


class Algorithm(enum.Enum):
    SQP = "sqp"
    LSQP = "lsqp"
    SLCP = "slcp"

    @property
    def log_space(self) -> bool:
        return self is not Algorithm.SQP

    @classmethod
    def parse(cls, value: str) -> "Algorithm":
        try:
            return cls(value.lower())
        except ValueError:
            valid = ", ".join(a.value for a in cls)
            raise ValueError(f"Unknown algorithm '{value}', expected one of: {valid}")


class Termination(enum.Enum):
    CONTINUE = "Continue"
    GRAD_LAGRANGIAN = "GradLagrangian"
    STEP_SIZE = "StepSize"
    MAX_ITER = "MaxIter"
    POSITIVITY_FAILURE = "PositivityFailure"
    SUBPROBLEM_FAILURE = "SubproblemFailure"

    @property
    def converged(self) -> bool:
        return self in (Termination.GRAD_LAGRANGIAN, Termination.STEP_SIZE)


@dataclass(frozen=True)
class SolveOptions:
    algorithm: Algorithm = Algorithm.SLCP
    eps_gl: float = 1e-6
    eps_dx: float = 1e-8
    max_iter: int = 500
    slack_weight: float = DEFAULT_SLACK_WEIGHT
    slack_l1_weight: float = DEFAULT_SLACK_L1_WEIGHT
    sub_tol: float = DEFAULT_TOL
    max_newton: int = DEFAULT_MAX_NEWTON
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 30
    alpha_min: float = 1e-10
    penalty_margin: float = 1.1
    # merits of this many recent iterates bound the Armijo test; 1 is the monotone search
    merit_memory: int = 5
    # mu + alpha (mu_qp - mu) instead of taking the sub-problem multipliers outright
    damped_multipliers: bool = False

    def __post_init__(self):
        for name in ("eps_gl", "eps_dx", "slack_weight", "sub_tol", "armijo", "alpha_min"):
            if not getattr(self, name) > 0:
                raise ValueError(f"SolveOptions.{name} must be positive")
        if self.max_iter < 1:
            raise ValueError("SolveOptions.max_iter must be at least 1")
        if not 0 < self.backtrack < 1:
            raise ValueError("SolveOptions.backtrack must lie in (0, 1)")
        if self.merit_memory < 1:
            raise ValueError("SolveOptions.merit_memory must be at least 1")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    f: float
    step_norm: float
    alpha: float
    merit: float
    max_violation: float
    grad_lagrangian: float
    subproblem_status: str
    termination: str = ""


@dataclass(frozen=True, eq=False)
class SolveResult:
    x_star: np.ndarray
    f_star: float
    iterations: int
    termination: Termination
    history: Tuple[IterationRecord, ...]
    algorithm: Algorithm
    wall_ms: float = 0.0

    @property
    def converged(self) -> bool:
        return self.termination.converged

    @property
    def grad_lagrangian(self) -> float:
        return self.history[-1].grad_lagrangian if self.history else math.inf

    def history_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.__dict__ for r in self.history])

    def write_history(self, path) -> None:
        self.history_frame().to_csv(path, index=False)


@dataclass(frozen=True, eq=False)
class PointEvaluation:
    """
    Function data at one point, expressed in the algorithm's space.

    Rows are ordered ``posy_ineq, mono_ineq, bb_ineq, mono_eq, bb_eq``; ``values`` are
    ``log g`` in log space and ``g - 1`` in x-space.
    """

    x: np.ndarray
    f: float
    phi: float
    grad_phi: np.ndarray
    values: np.ndarray
    jacobian: np.ndarray


@dataclass
class IterateState:
    x: np.ndarray
    y: np.ndarray
    mu: np.ndarray
    B: np.ndarray
    algorithm: Algorithm
    evaluation: PointEvaluation
    penalty: float = 0.0
    iter: int = 0

    @property
    def z(self) -> np.ndarray:
        """
        The coordinates the step is taken in.
        """
        return self.y if self.algorithm.log_space else self.x


@dataclass(frozen=True)
class LineSearchResult:
    alpha: float
    evaluation: Optional[PointEvaluation]
    merit: float
    failed: bool = False
    positivity_failure: bool = False


class _Layout:
    """
    Row bookkeeping for one problem: order, kinds and the permutation from
    the sub-problem's reporting order to the driver's row order.
    """

    def __init__(self, problem: StandardFormProblem, algorithm: Algorithm):
        self.problem = problem
        self.algorithm = algorithm
        self.ineq: List[Function] = [*problem.posy_ineq, *problem.mono_ineq, *problem.bb_ineq]
        self.eq: List[Function] = [*problem.mono_eq, *problem.bb_eq]
        self.rows: List[Function] = self.ineq + self.eq
        n_posy, n_mono_ineq = len(problem.posy_ineq), len(problem.mono_ineq)
        n_bb_ineq, n_mono_eq = len(problem.bb_ineq), len(problem.mono_eq)
        self.n_ineq = len(self.ineq)
        self.equality = np.zeros(len(self.rows), dtype=bool)
        self.equality[self.n_ineq :] = True
        exact = np.zeros(len(self.rows), dtype=bool)
        exact[: n_posy + n_mono_ineq] = True
        exact[self.n_ineq : self.n_ineq + n_mono_eq] = True
        self.exact = exact if algorithm is Algorithm.SLCP else np.zeros_like(exact)
        self.lse_forms = [posynomial_to_lse(p) for p in problem.posy_ineq]
        self.affine_ineq = [monomial_to_affine(m) for m in problem.mono_ineq]
        self.affine_eq = [monomial_to_affine(m) for m in problem.mono_eq]
        if algorithm is Algorithm.SLCP:
            # reporting order: posy, mono_ineq, mono_eq, bb_ineq, bb_eq
            start_bb_ineq = n_posy + n_mono_ineq + n_mono_eq
            self.perm = np.concatenate(
                [
                    np.arange(n_posy + n_mono_ineq),
                    start_bb_ineq + np.arange(n_bb_ineq),
                    n_posy + n_mono_ineq + np.arange(n_mono_eq),
                    start_bb_ineq + n_bb_ineq + np.arange(len(problem.bb_eq)),
                ]
            ).astype(int)
        else:
            self.perm = np.arange(len(self.rows))

    def violation(self, values: np.ndarray) -> float:
        ineq = np.maximum(values[~self.equality], 0.0).sum()
        return float(ineq + np.abs(values[self.equality]).sum())


def evaluate_point(
    problem: StandardFormProblem, layout: _Layout, x: np.ndarray, scale: float = 1.0
) -> PointEvaluation:
    """
    :raises DomainError: if any function is undefined, non-finite or, in log space, nonpositive.
    """
    log_space = layout.algorithm.log_space
    if not np.all(np.isfinite(x)) or not np.all(x > 0):
        raise DomainError("Iterate left the positive orthant")
    n = problem.n
    f = problem.objective.evaluate(x)
    grad_f = problem.objective.gradient(x)
    values = np.empty(len(layout.rows))
    jacobian = np.empty((len(layout.rows), n))
    for i, fn in enumerate(layout.rows):
        values[i] = fn.evaluate(x)
        jacobian[i] = fn.gradient(x)
    if log_space:
        if not f > 0 or not np.all(values > 0):
            raise DomainError("Nonpositive function value in log space")
        phi = math.log(f)
        grad_phi = x * grad_f / f
        jacobian = jacobian * x[None, :] / values[:, None]
        values = np.log(values)
    else:
        phi = f / scale
        grad_phi = grad_f / scale
        values = values - 1.0
    if not (math.isfinite(phi) and np.all(np.isfinite(grad_phi))):
        raise DomainError("Non-finite objective data")
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(jacobian))):
        raise DomainError("Non-finite constraint data")
    return PointEvaluation(x, f, phi, grad_phi, values, jacobian)


def lagrangian_gradient(evaluation: PointEvaluation, mu: np.ndarray, include: np.ndarray) -> np.ndarray:
    """
    ``grad phi + sum_i mu_i grad c_i`` over the rows selected by ``include``.
    """
    return evaluation.grad_phi + evaluation.jacobian[include].T @ mu[include]


def reduced_lagrangian_gradient(state: IterateState, problem: StandardFormProblem) -> np.ndarray:
    """
    Gradient of the reduced Lagrangian: exactly represented rows are left out under SLCP.
    LSQP and SQP use the full Lagrangian.
    """
    layout = _Layout(problem, state.algorithm)
    return lagrangian_gradient(state.evaluation, state.mu, ~layout.exact)


def _stationarity(evaluation: PointEvaluation, mu: np.ndarray, algorithm: Algorithm) -> float:
    grad = lagrangian_gradient(evaluation, mu, np.ones(mu.shape[0], dtype=bool))
    if not algorithm.log_space:
        # x-space gradients measured per unit of log x
        grad = evaluation.x * grad
    return float(np.max(np.abs(grad), initial=0.0))


def least_squares_multipliers(
    problem: StandardFormProblem, x, active_tol: float = ACTIVE_TOL
) -> Tuple[np.ndarray, float]:
    """
    Multipliers that best explain ``x`` as a KKT point of the log-space problem.

    Inequality rows with ``log g < -active_tol`` get a zero multiplier, the others a
    nonnegative one; equality multipliers are free. Rows are ordered
    ``posy_ineq, mono_ineq, bb_ineq, mono_eq, bb_eq``.

    :return: The multipliers and the infinity norm of the Lagrangian gradient they leave.
    :raises DomainError: if a function is undefined or nonpositive at ``x``.
    """
    layout = _Layout(problem, Algorithm.LSQP)
    ev = evaluate_point(problem, layout, np.asarray(x, dtype=float))
    active = layout.equality | (ev.values >= -active_tol)
    rows = np.flatnonzero(active)
    # free equality multipliers as the difference of two nonnegative ones
    columns = [ev.jacobian[i] for i in rows]
    columns += [-ev.jacobian[i] for i in rows if layout.equality[i]]
    mu = np.zeros(len(layout.rows))
    if columns:
        weights, _ = nnls(np.array(columns).T, -ev.grad_phi)
        mu[rows] = weights[: len(rows)]
        negative = [i for i in rows if layout.equality[i]]
        mu[negative] -= weights[len(rows) :]
    residual = float(np.max(np.abs(lagrangian_gradient(ev, mu, np.ones(len(mu), dtype=bool)))))
    return mu, residual


def damped_bfgs_update(B: np.ndarray, s: np.ndarray, z: np.ndarray) -> np.ndarray:
    """
    Damped BFGS: ``z`` is blended with ``Bs`` whenever ``s^T z < 0.2 s^T B s`` so the update stays SPD.
    """
    s = np.asarray(s, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.linalg.norm(s) < BFGS_MIN_STEP:
        return B
    Bs = B @ s
    sBs = float(s @ Bs)
    sz = float(s @ z)
    if sz >= BFGS_DAMPING_THRESHOLD * sBs:
        theta = 1.0
    else:
        theta = (1 - BFGS_DAMPING_THRESHOLD) * sBs / (sBs - sz)
    r = theta * z + (1 - theta) * Bs
    updated = B - np.outer(Bs, Bs) / sBs + np.outer(r, r) / float(s @ r)
    return 0.5 * (updated + updated.T)


def build_subproblem(
    state: IterateState,
    problem: StandardFormProblem,
    algorithm: Algorithm,
    options: SolveOptions = SolveOptions(),
    layout: Optional[_Layout] = None,
) -> SubproblemSpec:
    """
    SLCP keeps posynomial rows as log-sum-exp rows and monomial rows as affine rows;
    LSQP linearizes every row in log space and SQP every row in x-space.
    """
    layout = layout or _Layout(problem, algorithm)
    ev = state.evaluation
    linear = [LinearRow(float(v), g) for v, g in zip(ev.values, ev.jacobian)]
    common = dict(
        grad0=ev.grad_phi,
        B=state.B,
        slack_weight=options.slack_weight,
        slack_l1_weight=options.slack_l1_weight,
    )
    if algorithm is not Algorithm.SLCP:
        return SubproblemSpec(
            lin_ineq=tuple(linear[: layout.n_ineq]),
            lin_eq=tuple(linear[layout.n_ineq :]),
            **common,
        )
    y = state.y
    n_posy, n_mono_ineq = len(problem.posy_ineq), len(problem.mono_ineq)
    n_bb_ineq, n_mono_eq = len(problem.bb_ineq), len(problem.mono_eq)
    bb_ineq_start = n_posy + n_mono_ineq
    bb_eq_start = layout.n_ineq + n_mono_eq
    return SubproblemSpec(
        lse_cons=tuple((form, y) for form in layout.lse_forms),
        affine_ineq=tuple(LinearRow(a.value(y), a.A_m) for a in layout.affine_ineq),
        affine_eq=tuple(LinearRow(a.value(y), a.A_m) for a in layout.affine_eq),
        lin_ineq=tuple(linear[bb_ineq_start : bb_ineq_start + n_bb_ineq]),
        lin_eq=tuple(linear[bb_eq_start:]),
        **common,
    )


def check_termination(
    grad_l: float,
    d_x: np.ndarray,
    options: SolveOptions = SolveOptions(),
    allow_step: bool = True,
) -> Termination:
    if grad_l < options.eps_gl:
        return Termination.GRAD_LAGRANGIAN
    if allow_step and float(np.linalg.norm(d_x)) < options.eps_dx:
        return Termination.STEP_SIZE
    return Termination.CONTINUE


def _merit(evaluation: PointEvaluation, layout: _Layout, penalty: float) -> float:
    return evaluation.phi + penalty * layout.violation(evaluation.values)


def _step_point(state: IterateState, d: np.ndarray, alpha: float) -> np.ndarray:
    z = state.z + alpha * d
    return np.exp(z) if state.algorithm.log_space else z


def merit_line_search(
    state: IterateState,
    d_y: np.ndarray,
    d_mu: np.ndarray,
    problem: StandardFormProblem,
    spec: SubproblemSpec,
    options: SolveOptions = SolveOptions(),
    scale: float = 1.0,
    layout: Optional[_Layout] = None,
    recent: Sequence[Tuple[float, float]] = (),
) -> LineSearchResult:
    """
    Backtracking on the l1 merit ``phi + nu * sum(violations)``.

    The sufficient-decrease test is taken against the largest merit among the current
    point and ``recent``, the ``(phi, violation)`` pairs of earlier iterates, all priced
    at the current penalty. Steps that make any function undefined or nonpositive are
    halved first; 30 such halvings in a row are reported as a positivity failure.
    """
    layout = layout or _Layout(problem, state.algorithm)
    mu_qp = state.mu + d_mu
    state.penalty = max(
        options.penalty_margin * float(np.max(np.abs(mu_qp), initial=0.0)), state.penalty
    )
    ev = state.evaluation
    merit0 = _merit(ev, layout, state.penalty)
    reference = max([merit0] + [phi + state.penalty * v for phi, v in recent])
    model_values = spec.row_values(d_y)[layout.perm]
    derivative = float(ev.grad_phi @ d_y) + state.penalty * (
        layout.violation(model_values) - layout.violation(ev.values)
    )
    descent = derivative < 0
    noise = 10 * np.finfo(float).eps * max(1.0, abs(reference))

    alpha = 1.0
    positivity_halvings = 0
    backtracks = 0
    while True:
        try:
            trial = evaluate_point(problem, layout, _step_point(state, d_y, alpha), scale)
        except DomainError as e:
            positivity_halvings += 1
            logger.trace(f"Step {alpha:.3e} rejected: {e}")
            if positivity_halvings >= options.max_backtracks:
                return LineSearchResult(alpha, None, merit0, failed=True, positivity_failure=True)
            alpha *= options.backtrack
            continue
        merit = _merit(trial, layout, state.penalty)
        bound = reference + (options.armijo * alpha * derivative if descent else 0.0)
        if merit <= bound + noise:
            return LineSearchResult(alpha, trial, merit)
        backtracks += 1
        if backtracks >= options.max_backtracks:
            break
        alpha *= options.backtrack
        logger.trace(f"Merit backtrack {backtracks}: alpha={alpha:.3e} merit={merit:.6e}")

    alpha = options.alpha_min
    try:
        trial = evaluate_point(problem, layout, _step_point(state, d_y, alpha), scale)
    except DomainError:
        return LineSearchResult(alpha, None, merit0, failed=True, positivity_failure=True)
    return LineSearchResult(alpha, trial, _merit(trial, layout, state.penalty), failed=True)


def _solve_step(
    spec: SubproblemSpec, options: SolveOptions
) -> SubproblemSolution:
    try:
        return solve_subproblem(spec, options.sub_tol, options.max_newton)
    except SubproblemError as e:
        logger.warning(f"Sub-problem rejected: {e}")
        n = spec.n
        return SubproblemSolution(
            np.full(n, np.nan), np.zeros(spec.row_count), np.zeros(spec.row_count),
            SubproblemStatus.DEGENERATE, math.inf,
        )


def _usable(solution: SubproblemSolution) -> bool:
    return solution.status is not SubproblemStatus.DEGENERATE and bool(
        np.all(np.isfinite(solution.d_y))
    )


def solve(
    problem: StandardFormProblem,
    x0,
    options: SolveOptions = SolveOptions(),
    callback: Optional[Callable[[IterateState, SubproblemSpec, SubproblemSolution], None]] = None,
) -> SolveResult:
    """
    Runs SQP, LSQP or SLCP from ``x0``.

    :param problem: The problem in standard form.
    :param x0: A strictly positive starting point.
    :param options: Algorithm choice, tolerances and line-search parameters.
    :param callback: Called after every sub-problem solve with the state it was built at.
    :raises DomainError: if a function is undefined or, for the log-space algorithms, nonpositive at ``x0``.
    """
    started = time.perf_counter()
    algorithm = options.algorithm
    x0 = np.array(x0, dtype=float)
    if x0.shape != (problem.n,):
        raise DomainError(f"Start point has shape {x0.shape}, expected ({problem.n},)")
    if not np.all(x0 > 0):
        raise DomainError("Start point must be strictly positive")

    layout = _Layout(problem, algorithm)
    scale = 1.0
    if not algorithm.log_space:
        scale = abs(problem.objective.evaluate(x0)) or 1.0
    evaluation = evaluate_point(problem, layout, x0, scale)
    state = IterateState(
        x=x0,
        y=np.log(x0),
        mu=np.ones(len(layout.rows)),
        B=np.eye(problem.n),
        algorithm=algorithm,
        evaluation=evaluation,
    )
    history: List[IterationRecord] = []
    recent: Deque[Tuple[float, float]] = collections.deque(maxlen=options.merit_memory - 1)
    termination = Termination.MAX_ITER

    while state.iter < options.max_iter:
        spec = build_subproblem(state, problem, algorithm, options, layout)
        solution = _solve_step(spec, options)
        if not _usable(solution):
            logger.warning(f"Sub-problem degenerate at iteration {state.iter + 1}, resetting B")
            state.B = np.eye(problem.n)
            spec = build_subproblem(state, problem, algorithm, options, layout)
            solution = _solve_step(spec, options)
            if not _usable(solution):
                termination = Termination.SUBPROBLEM_FAILURE
                break
        if solution.status is SubproblemStatus.MAX_ITER:
            logger.debug(
                f"Sub-problem hit its Newton limit at iteration {state.iter + 1} "
                f"(residual {solution.kkt_residual:.3e})"
            )
        if callback is not None:
            callback(state, spec, solution)

        d = solution.d_y
        mu_qp = solution.multipliers[layout.perm]
        search = merit_line_search(
            state, d, mu_qp - state.mu, problem, spec, options, scale, layout, recent=tuple(recent)
        )
        state.iter += 1
        if search.positivity_failure or search.evaluation is None:
            termination = Termination.POSITIVITY_FAILURE
            history.append(
                IterationRecord(
                    state.iter, state.evaluation.f, float(np.linalg.norm(d)), search.alpha,
                    search.merit, problem.max_violation(state.x), math.nan,
                    solution.status.value, termination.value,
                )
            )
            break

        alpha = search.alpha
        new = search.evaluation
        mu_new = state.mu + alpha * (mu_qp - state.mu) if options.damped_multipliers else mu_qp
        old = state.evaluation
        recent.append((old.phi, layout.violation(old.values)))
        z_old = state.z.copy()
        x_old = state.x

        state.x = new.x
        state.y = np.log(new.x)
        state.mu = mu_new
        state.evaluation = new
        if search.failed:
            state.B = np.eye(problem.n)
            recent.clear()
        else:
            s = state.z - z_old
            gradient_change = lagrangian_gradient(new, mu_new, ~layout.exact) - lagrangian_gradient(
                old, mu_new, ~layout.exact
            )
            state.B = damped_bfgs_update(state.B, s, gradient_change)

        grad_l = _stationarity(new, mu_new, algorithm)
        # StepSize only counts full steps
        full_step = alpha == 1.0 and not search.failed
        outcome = check_termination(grad_l, new.x - x_old, options, allow_step=full_step)
        logger.debug(
            f"{algorithm.value} iteration {state.iter}: f={new.f:.8g} alpha={alpha:.3e} "
            f"|grad L|={grad_l:.3e} |d|={np.linalg.norm(d):.3e}"
        )
        history.append(
            IterationRecord(
                iteration=state.iter,
                f=new.f,
                step_norm=float(np.linalg.norm(d)),
                alpha=alpha,
                merit=search.merit,
                max_violation=problem.max_violation(new.x),
                grad_lagrangian=grad_l,
                subproblem_status=solution.status.value,
                termination="" if outcome is Termination.CONTINUE else outcome.value,
            )
        )
        if outcome is not Termination.CONTINUE:
            termination = outcome
            break

    if termination is Termination.MAX_ITER and history:
        last = history[-1]
        history[-1] = IterationRecord(**{**last.__dict__, "termination": termination.value})
    return SolveResult(
        x_star=state.x,
        f_star=state.evaluation.f,
        iterations=state.iter,
        termination=termination,
        history=tuple(history),
        algorithm=algorithm,
        wall_ms=1e3 * (time.perf_counter() - started),
    )
