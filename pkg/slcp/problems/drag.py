"""
Profile drag surrogate: a five-term posynomial fit ``fit(C_L, tau, Re, C_Dp) <= 1``
and its implicit inverse ``C_Dp = f(C_L, tau, Re)``.
"""
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp, softmax

from .._exceptions import DomainError
from .._logging import logger
from .._model import BlackBoxFn, Monomial, Posynomial

#: exponents over (C_L, tau, Re, C_Dp), one row per term
DRAG_FIT_EXPONENTS = np.array(
    [
        [5.88, -3.32, -1.54, -2.26],
        [-0.92, 6.23, -1.38, -9.57],
        [-0.01, 0.03, 0.14, -0.73],
        [9.78, 1.76, -1.00, -0.91],
        [6.53, -0.52, -0.99, -5.19],
    ]
)
DRAG_FIT_COEFFICIENTS = np.array([2.56, 3.8e-9, 2.2e-3, 1.19e4, 6.14e-6])

FIT_RANGE = {"C_L": (0.01, 2.0), "tau": (0.05, 0.25), "Re": (1e5, 1e9)}
INITIAL_BRACKET = (1e-4, 1e-1)
BRACKET_LIMIT = (1e-12, 1e2)
RESIDUAL_TOL = 1e-12

_LOG_Q = np.log(DRAG_FIT_COEFFICIENTS)
_INPUTS = DRAG_FIT_EXPONENTS[:, :3]
_CDP = DRAG_FIT_EXPONENTS[:, 3]


def drag_fit_posynomial(C_L: Monomial, tau: Monomial, Re: Monomial, C_Dp: Monomial) -> Posynomial:
    terms = []
    for c, (a_cl, a_tau, a_re, a_cdp) in zip(DRAG_FIT_COEFFICIENTS, DRAG_FIT_EXPONENTS):
        terms.append(c * C_L**a_cl * tau**a_tau * Re**a_re * C_Dp**a_cdp)
    return Posynomial(tuple(terms))


@dataclass(frozen=True)
class DragSolution:
    C_Dp: float
    residual: float
    extrapolated: bool
    #: d log C_Dp / d log (C_L, tau, Re)
    log_sensitivity: np.ndarray


def _log_fit(inputs_log: np.ndarray, u: float) -> float:
    return float(logsumexp(_LOG_Q + _INPUTS @ inputs_log + _CDP * u))


def _extrapolated(C_L: float, tau: float, Re: float) -> bool:
    values = {"C_L": C_L, "tau": tau, "Re": Re}
    return any(not lo <= values[k] <= hi for k, (lo, hi) in FIT_RANGE.items())


def solve_drag(C_L: float, tau: float, Re: float) -> DragSolution:
    """
    Finds the unique ``C_Dp`` that puts the drag fit on its boundary.

    Works in ``u = log C_Dp``: the fit is strictly decreasing in ``u``, so a sign
    change bracket followed by Brent's method and Newton polishing gives the root.

    :raises DomainError: for nonpositive inputs or when no bracket can be found.
    """
    if not (C_L > 0 and tau > 0 and Re > 0):
        raise DomainError(f"Drag inputs must be positive, got C_L={C_L}, tau={tau}, Re={Re}")
    v = np.log([C_L, tau, Re])

    def residual(u):
        return _log_fit(v, u)

    lo, hi = (math.log(b) for b in INITIAL_BRACKET)
    limit_lo, limit_hi = (math.log(b) for b in BRACKET_LIMIT)
    while residual(lo) <= 0:
        lo -= 2.0
        if lo < limit_lo:
            raise DomainError(f"No drag bracket below C_Dp for C_L={C_L}, tau={tau}, Re={Re}")
    while residual(hi) >= 0:
        hi += 2.0
        if hi > limit_hi:
            raise DomainError(f"No drag bracket above C_Dp for C_L={C_L}, tau={tau}, Re={Re}")

    u = brentq(residual, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    for _ in range(5):
        z = _LOG_Q + _INPUTS @ v + _CDP * u
        value = float(logsumexp(z))
        if abs(math.expm1(value)) <= RESIDUAL_TOL:
            break
        slope = float(softmax(z) @ _CDP)
        candidate = u - value / slope
        if not lo < candidate < hi:
            break
        u = candidate

    z = _LOG_Q + _INPUTS @ v + _CDP * u
    w = softmax(z)
    sensitivity = -(w @ _INPUTS) / (w @ _CDP)
    extrapolated = _extrapolated(C_L, tau, Re)
    if extrapolated:
        logger.trace(f"Drag fit extrapolating at C_L={C_L:.4g}, tau={tau:.4g}, Re={Re:.4g}")
    return DragSolution(
        math.exp(u), abs(math.expm1(float(logsumexp(z)))), extrapolated, sensitivity
    )


def drag_blackbox(C_L: float, tau: float, Re: float) -> float:
    return solve_drag(C_L, tau, Re).C_Dp


def drag_constraint(n: int, indices: Sequence[int], name: str = "drag") -> BlackBoxFn:
    """
    Black box ``f(C_L, tau, Re) / C_Dp <= 1``.

    :param n: Problem dimension.
    :param indices: Positions of ``C_L``, ``tau``, ``Re`` and ``C_Dp`` in the variable vector.
    """
    i_cl, i_tau, i_re, i_cdp = indices

    def value(x):
        return solve_drag(x[i_cl], x[i_tau], x[i_re]).C_Dp / x[i_cdp]

    def gradient(x):
        solution = solve_drag(x[i_cl], x[i_tau], x[i_re])
        g = solution.C_Dp / x[i_cdp]
        log_grad = np.zeros(n)
        log_grad[[i_cl, i_tau, i_re]] = solution.log_sensitivity
        log_grad[i_cdp] = -1.0
        return g * log_grad / x

    return BlackBoxFn(value, n, gradient, name)
