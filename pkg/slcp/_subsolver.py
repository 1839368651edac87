"""
Primal-dual interior-point solver for the relaxed convex sub-problem

    minimize    1/2 d^T B d + g^T d + sum_i (rho sigma_i + K sigma_i^2)
    subject to  r_i(d) <= sigma_i,  sigma_i >= 0

where every row ``r_i`` is either a log-sum-exp function of ``anchor + d`` or affine in ``d``.
Equality rows ``c(d) = sigma`` are split into the elastic pair ``c <= sigma+``, ``-c <= sigma-``.
With no log-sum-exp rows the same code solves the QP sub-problems of SQP and LSQP.
"""
import enum
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.special import logsumexp

from ._exceptions import SubproblemError
from ._logging import logger
from ._transform import LseForm

DEFAULT_TOL = 1e-9
DEFAULT_MAX_NEWTON = 200
DEFAULT_SLACK_WEIGHT = 1e4
DEFAULT_SLACK_L1_WEIGHT = 1e3

# the complementarity target shrinks at least tenfold per Newton step
CENTERING_MAX = 0.1
CENTERING_MIN = 1e-3
BACKTRACK = 0.5
BOUNDARY_FRACTION = 0.99
RESIDUAL_DECREASE = 0.01
REGULARIZATION = 1e-10
_MIN_STEP = 1e-14


class SubproblemStatus(enum.Enum):
    OPTIMAL = "Optimal"
    MAX_ITER = "MaxIter"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True, eq=False)
class LinearRow:
    """
    ``value + grad^T d``: a monomial row at its anchor or a linearized black box.
    """

    value: float
    grad: np.ndarray


@dataclass(frozen=True, eq=False)
class SubproblemSpec:
    """
    Rows are reported in the order ``lse_cons, affine_ineq, affine_eq, lin_ineq, lin_eq``.
    """

    grad0: np.ndarray
    B: np.ndarray
    lse_cons: Tuple[Tuple[LseForm, np.ndarray], ...] = ()
    affine_ineq: Tuple[LinearRow, ...] = ()
    affine_eq: Tuple[LinearRow, ...] = ()
    lin_ineq: Tuple[LinearRow, ...] = ()
    lin_eq: Tuple[LinearRow, ...] = ()
    slack_weight: float = DEFAULT_SLACK_WEIGHT
    slack_l1_weight: float = DEFAULT_SLACK_L1_WEIGHT

    @property
    def n(self) -> int:
        return self.grad0.shape[0]

    @property
    def row_count(self) -> int:
        return (
            len(self.lse_cons)
            + len(self.affine_ineq)
            + len(self.affine_eq)
            + len(self.lin_ineq)
            + len(self.lin_eq)
        )

    def equality_mask(self) -> np.ndarray:
        mask = np.zeros(self.row_count, dtype=bool)
        start = len(self.lse_cons) + len(self.affine_ineq)
        mask[start : start + len(self.affine_eq)] = True
        mask[self.row_count - len(self.lin_eq) :] = True
        return mask

    def row_values(self, d) -> np.ndarray:
        """
        Row values at step ``d``, in reporting order (equalities signed, not split).
        """
        d = np.asarray(d, dtype=float)
        values = [logsumexp(form.P @ (anchor + d) + form.q) for form, anchor in self.lse_cons]
        for group in (self.affine_ineq, self.affine_eq, self.lin_ineq, self.lin_eq):
            values += [row.value + row.grad @ d for row in group]
        return np.array(values, dtype=float)

    def objective(self, d, sigma) -> float:
        d = np.asarray(d, dtype=float)
        sigma = np.abs(np.asarray(sigma, dtype=float))
        return float(
            0.5 * d @ self.B @ d
            + self.grad0 @ d
            + self.slack_l1_weight * sigma.sum()
            + self.slack_weight * sigma @ sigma
        )


@dataclass(frozen=True, eq=False)
class InteriorPointState:
    """
    Elastic primal-dual point: one entry of ``sigma``, ``lam`` and ``nu`` per split row.
    """

    d: np.ndarray
    sigma: np.ndarray
    lam: np.ndarray
    nu: np.ndarray


@dataclass(frozen=True, eq=False)
class SubproblemSolution:
    d_y: np.ndarray
    multipliers: np.ndarray
    sigma: np.ndarray
    status: SubproblemStatus
    kkt_residual: float
    iterations: int = 0
    state: Optional[InteriorPointState] = field(default=None, repr=False)


class _Rows:
    """
    Split rows ``r_i(d) <= sigma_i`` with their owner in reporting order and sign.

    The log-sum-exp rows are stacked into one term matrix so that values,
    gradients and curvature come from segment reductions rather than a loop per row.
    """

    def __init__(self, spec: SubproblemSpec):
        n = spec.n
        self.k = len(spec.lse_cons)
        if self.k:
            self.P = np.vstack([form.P for form, _ in spec.lse_cons])
            self.z0 = np.concatenate([form.P @ anchor + form.q for form, anchor in spec.lse_cons])
            sizes = [form.P.shape[0] for form, _ in spec.lse_cons]
            self.starts = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int)
            self.term_row = np.repeat(np.arange(self.k), sizes)
        values: List[float] = []
        grads: List[np.ndarray] = []
        owners: List[int] = list(range(self.k))
        signs: List[float] = [1.0] * self.k
        groups = [
            (spec.affine_ineq, False),
            (spec.affine_eq, True),
            (spec.lin_ineq, False),
            (spec.lin_eq, True),
        ]
        owner = self.k
        for group, is_equality in groups:
            for row in group:
                for sign in (1.0, -1.0) if is_equality else (1.0,):
                    values.append(sign * row.value)
                    grads.append(sign * np.asarray(row.grad, dtype=float))
                    owners.append(owner)
                    signs.append(sign)
                owner += 1
        self.c = np.array(values, dtype=float)
        self.L = np.array(grads, dtype=float).reshape(len(grads), n)
        self.owners = np.array(owners, dtype=int)
        self.signs = np.array(signs, dtype=float)
        self.reported = owner
        self.n = n
        self.m = self.k + len(values)

    def _lse(self, d: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        z = self.z0 + self.P @ d
        peak = np.maximum.reduceat(z, self.starts)
        e = np.exp(z - peak[self.term_row])
        total = np.add.reduceat(e, self.starts)
        return peak + np.log(total), e / total[self.term_row]

    def values(self, d: np.ndarray) -> np.ndarray:
        if not self.k:
            return self.c + self.L @ d
        return np.concatenate([self._lse(d)[0], self.c + self.L @ d])

    def evaluate(
        self, d: np.ndarray, lam: Optional[np.ndarray] = None
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Values, Jacobian and the multiplier-weighted sum of row Hessians.
        """
        values = np.empty(self.m)
        jac = np.empty((self.m, self.n))
        curvature = np.zeros((self.n, self.n))
        k = self.k
        if k:
            values[:k], w = self._lse(d)
            weighted = self.P * w[:, None]
            jac[:k] = np.add.reduceat(weighted, self.starts, axis=0)
            if lam is not None:
                curvature = self.P.T @ (weighted * lam[:k][self.term_row][:, None])
                curvature -= jac[:k].T @ (jac[:k] * lam[:k][:, None])
        values[k:] = self.c + self.L @ d
        jac[k:] = self.L
        return values, jac, curvature

    def report(self, split: np.ndarray) -> np.ndarray:
        reported = np.zeros(self.reported)
        np.add.at(reported, self.owners, self.signs * split)
        return reported


def _check_finite(spec: SubproblemSpec) -> None:
    arrays = [spec.grad0, spec.B]
    arrays += [a for _, a in spec.lse_cons]
    for group in (spec.affine_ineq, spec.affine_eq, spec.lin_ineq, spec.lin_eq):
        arrays += [np.append(row.grad, row.value) for row in group]
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise SubproblemError("Sub-problem data contains non-finite values")
    if spec.B.shape != (spec.n, spec.n):
        raise SubproblemError(f"B has shape {spec.B.shape}, expected {(spec.n, spec.n)}")


def _factorize(H: np.ndarray):
    try:
        return cho_factor(H)
    except LinAlgError:
        shift = REGULARIZATION * max(1.0, float(np.max(np.abs(np.diag(H)))))
        logger.trace(f"KKT factorization failed, regularizing with {shift:.3e}")
        try:
            return cho_factor(H + shift * np.eye(H.shape[0]))
        except LinAlgError:
            return None


def _residual(
    spec: SubproblemSpec,
    d: np.ndarray,
    sigma: np.ndarray,
    lam: np.ndarray,
    nu: np.ndarray,
    values: np.ndarray,
    jac: np.ndarray,
) -> float:
    stationarity_d = spec.B @ d + spec.grad0 + jac.T @ lam
    if sigma.size == 0:
        return float(np.max(np.abs(stationarity_d), initial=0.0))
    stationarity_sigma = spec.slack_l1_weight + 2 * spec.slack_weight * sigma - lam - nu
    slack = sigma - values
    return float(
        max(
            np.max(np.abs(stationarity_d), initial=0.0),
            np.max(np.abs(stationarity_sigma)),
            np.max(np.abs(lam * slack)),
            np.max(np.abs(nu * sigma)),
            np.max(-slack, initial=0.0),
            np.max(-sigma, initial=0.0),
            np.max(-lam, initial=0.0),
            np.max(-nu, initial=0.0),
        )
    )


def _central_residual(
    spec: SubproblemSpec,
    d: np.ndarray,
    sigma: np.ndarray,
    lam: np.ndarray,
    nu: np.ndarray,
    values: np.ndarray,
    jac: np.ndarray,
    target: float,
) -> float:
    r = np.concatenate(
        [
            spec.B @ d + spec.grad0 + jac.T @ lam,
            spec.slack_l1_weight + 2 * spec.slack_weight * sigma - lam - nu,
            lam * (sigma - values) - target,
            nu * sigma - target,
        ]
    )
    return float(np.linalg.norm(r))


def _max_step(*pairs: Tuple[np.ndarray, np.ndarray], fraction: float = BOUNDARY_FRACTION) -> float:
    step = 1.0
    for value, delta in pairs:
        shrinking = delta < 0
        if np.any(shrinking):
            step = min(step, float(np.min(-value[shrinking] / delta[shrinking])))
    return min(1.0, fraction * step)


@dataclass(frozen=True, eq=False)
class _Direction:
    d: np.ndarray
    sigma: np.ndarray
    lam: np.ndarray
    nu: np.ndarray
    # linearized change of the row slack sigma - r(d)
    slack: np.ndarray

    @property
    def finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in (self.d, self.sigma, self.lam, self.nu))


class _NewtonSystem:
    """
    The reduced Newton system at one interior point, factorized once and solved for
    any complementarity target.

    ``lam`` and ``nu`` are eliminated row by row and ``sigma`` through its diagonal
    block, leaving an ``n x n`` SPD matrix in ``d``.
    """

    def __init__(self, spec, d, sigma, lam, nu, values, jac, curvature):
        K = spec.slack_weight
        self.jac = jac
        self.sigma, self.lam, self.nu = sigma, lam, nu
        self.slack = sigma - values
        self.w_a = lam / self.slack
        self.w_b = nu / sigma
        self.diag = 2 * K + self.w_a + self.w_b
        self.r_d = spec.B @ d + spec.grad0 + jac.T @ lam
        self.r_sigma = spec.slack_l1_weight + 2 * K * sigma - lam - nu
        H = spec.B + curvature + jac.T @ (jac * (self.w_a * (2 * K + self.w_b) / self.diag)[:, None])
        self.factor = _factorize(0.5 * (H + H.T))

    @property
    def mean_complementarity(self) -> float:
        return float(self.lam @ self.slack + self.nu @ self.sigma) / (2 * self.slack.shape[0])

    def direction(self, target: float) -> _Direction:
        c_a = target - self.lam * self.slack
        c_b = target - self.nu * self.sigma
        rhs_s = -self.r_sigma + c_a / self.slack + c_b / self.sigma
        rhs_d = -self.r_d - self.jac.T @ (c_a / self.slack) + self.jac.T @ (self.w_a * rhs_s / self.diag)
        delta_d = cho_solve(self.factor, rhs_d)
        jd = self.jac @ delta_d
        delta_s = (rhs_s + self.w_a * jd) / self.diag
        delta_lam = c_a / self.slack - self.w_a * (delta_s - jd)
        delta_nu = c_b / self.sigma - self.w_b * delta_s
        return _Direction(delta_d, delta_s, delta_lam, delta_nu, delta_s - jd)

    def boundary_step(self, direction: _Direction, fraction: float = BOUNDARY_FRACTION) -> float:
        return _max_step(
            (self.lam, direction.lam),
            (self.nu, direction.nu),
            (self.sigma, direction.sigma),
            (self.slack, direction.slack),
            fraction=fraction,
        )

    def centering(self) -> float:
        """
        Target complementarity for the next step: the predicted complementarity after
        the longest affine-scaling step, relative to the current one, cubed.
        """
        mean = self.mean_complementarity
        affine = self.direction(0.0)
        if not affine.finite:
            return CENTERING_MAX * mean
        step = self.boundary_step(affine, fraction=1.0)
        predicted = (self.lam + step * affine.lam) @ (self.slack + step * affine.slack)
        predicted += (self.nu + step * affine.nu) @ (self.sigma + step * affine.sigma)
        ratio = max(float(predicted), 0.0) / (2 * self.slack.shape[0] * mean)
        return float(np.clip(ratio**3, CENTERING_MIN, CENTERING_MAX)) * mean


def kkt_residual(spec: SubproblemSpec, solution: SubproblemSolution) -> float:
    """
    Max of stationarity, primal and dual infeasibility and complementarity at the solution.
    """
    rows = _Rows(spec)
    state = solution.state
    if state is None:
        empty = np.zeros(rows.m)
        state = InteriorPointState(np.asarray(solution.d_y, dtype=float), empty, empty, empty)
    values, jac, _ = rows.evaluate(state.d)
    return _residual(spec, state.d, state.sigma, state.lam, state.nu, values, jac)


def _solution(
    rows: _Rows,
    spec: SubproblemSpec,
    state: InteriorPointState,
    status: SubproblemStatus,
    iterations: int,
) -> SubproblemSolution:
    values, jac, _ = rows.evaluate(state.d)
    residual = _residual(spec, state.d, state.sigma, state.lam, state.nu, values, jac)
    return SubproblemSolution(
        d_y=state.d,
        multipliers=rows.report(state.lam),
        sigma=rows.report(state.sigma),
        status=status,
        kkt_residual=residual,
        iterations=iterations,
        state=state,
    )


def solve_subproblem(
    spec: SubproblemSpec,
    tol: float = DEFAULT_TOL,
    max_newton: int = DEFAULT_MAX_NEWTON,
    callback: Optional[Callable[[int, float, float], None]] = None,
) -> SubproblemSolution:
    """
    Solves the relaxed sub-problem.

    :param spec: The sub-problem data.
    :param tol: KKT residual at which the solution is reported as optimal.
    :param max_newton: Maximum number of Newton steps.
    :param callback: Called as ``callback(iteration, kkt_residual, surrogate_gap)`` before each step.
    :return: The step, split-row multipliers merged per row, and the solver status.
    :raises SubproblemError: if the data is not finite.
    """
    _check_finite(spec)
    rows = _Rows(spec)
    n, m = rows.n, rows.m
    B, g = spec.B, spec.grad0
    empty = np.zeros(0)

    if m == 0:
        factor = _factorize(B)
        if factor is None:
            state = InteriorPointState(np.zeros(n), empty, empty, empty)
            return _solution(rows, spec, state, SubproblemStatus.DEGENERATE, 0)
        state = InteriorPointState(cho_solve(factor, -g), empty, empty, empty)
        solution = _solution(rows, spec, state, SubproblemStatus.OPTIMAL, 1)
        if solution.kkt_residual > tol:
            logger.trace(f"Unconstrained step residual {solution.kkt_residual:.3e} above {tol:.1e}")
            return _solution(rows, spec, state, SubproblemStatus.MAX_ITER, 1)
        return solution

    d = np.zeros(n)
    values = rows.values(d)
    sigma = np.maximum(values, 0.0) + 1.0
    lam = 1.0 / (sigma - values)
    nu = 1.0 / sigma

    status = SubproblemStatus.MAX_ITER
    iteration = 0
    while iteration < max_newton:
        values, jac, curvature = rows.evaluate(d, lam)
        residual = _residual(spec, d, sigma, lam, nu, values, jac)
        gap = float(lam @ (sigma - values) + nu @ sigma)
        if callback is not None:
            callback(iteration, residual, gap)
        logger.trace(f"IPM iteration {iteration}: residual={residual:.3e} gap={gap:.3e}")
        if residual <= tol:
            status = SubproblemStatus.OPTIMAL
            break
        iteration += 1

        system = _NewtonSystem(spec, d, sigma, lam, nu, values, jac, curvature)
        if system.factor is None:
            logger.warning("Sub-problem KKT system is singular after regularization")
            status = SubproblemStatus.DEGENERATE
            break
        target = system.centering()
        direction = system.direction(target)
        if not direction.finite:
            status = SubproblemStatus.DEGENERATE
            break

        base = _central_residual(spec, d, sigma, lam, nu, values, jac, target)
        step = system.boundary_step(direction)
        accepted = False
        while step >= _MIN_STEP:
            d_new = d + step * direction.d
            sigma_new = sigma + step * direction.sigma
            values_new, jac_new, _ = rows.evaluate(d_new)
            if np.all(sigma_new > 0) and np.all(values_new < sigma_new):
                lam_new = lam + step * direction.lam
                nu_new = nu + step * direction.nu
                trial = _central_residual(
                    spec, d_new, sigma_new, lam_new, nu_new, values_new, jac_new, target
                )
                if trial <= (1 - RESIDUAL_DECREASE * step) * base:
                    accepted = True
                    break
            step *= BACKTRACK
        if not accepted:
            logger.trace(f"IPM line search stalled at iteration {iteration}")
            break
        d, sigma, lam, nu = d_new, sigma_new, lam_new, nu_new

    state = InteriorPointState(d, sigma, lam, nu)
    solution = _solution(rows, spec, state, status, iteration)
    if status is SubproblemStatus.MAX_ITER and solution.kkt_residual <= tol:
        solution = _solution(rows, spec, state, SubproblemStatus.OPTIMAL, iteration)
    return solution
