"""
Log-space machinery: ``y = log x`` transforms of gradients and the
log-sum-exp / affine forms of posynomials and monomials.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import logsumexp, softmax

from ._exceptions import PositivityError
from ._model import Function, Monomial, Posynomial


@dataclass(frozen=True, eq=False)
class LseForm:
    """
    ``log(sum_j exp(P_j y + q_j))``; one row of ``P`` per posynomial term.
    """

    P: np.ndarray
    q: np.ndarray

    @property
    def terms(self) -> int:
        return self.q.shape[0]


@dataclass(frozen=True, eq=False)
class MonoAffineForm:
    """
    ``A_m y + b_m``, the logarithm of a monomial.
    """

    A_m: np.ndarray
    b_m: float

    def value(self, y) -> float:
        return float(self.A_m @ np.asarray(y, dtype=float) + self.b_m)


def logspace_gradient(f_val: float, grad_x, x) -> np.ndarray:
    """
    ``d log f(e^y) / dy_i = (x_i / f) df/dx_i``.

    :raises PositivityError: if ``f_val`` is not positive
    """
    if not f_val > 0:
        raise PositivityError(f"Log-space gradient requested for nonpositive value {f_val}")
    return np.asarray(x, dtype=float) * np.asarray(grad_x, dtype=float) / f_val


def log_value_and_gradient(fn: Function, x) -> Tuple[float, np.ndarray]:
    """
    ``log f(x)`` and its gradient with respect to ``y = log x``.
    """
    value = fn.evaluate(x)
    if not value > 0:
        raise PositivityError(f"Function value {value} is not positive")
    return float(np.log(value)), logspace_gradient(value, fn.gradient(x), x)


def posynomial_to_lse(p: Posynomial) -> LseForm:
    P = np.array(p.exponent_matrix, dtype=float)
    q = np.log(p.coefficients)
    P.setflags(write=False)
    q.setflags(write=False)
    return LseForm(P, q)


def monomial_to_affine(m: Monomial) -> MonoAffineForm:
    return MonoAffineForm(np.array(m.exponents, dtype=float), float(np.log(m.coefficient)))


def lse_value(form: LseForm, y) -> float:
    return float(logsumexp(form.P @ np.asarray(y, dtype=float) + form.q))


def lse_weights(form: LseForm, y) -> np.ndarray:
    return softmax(form.P @ np.asarray(y, dtype=float) + form.q)


def lse_eval(form: LseForm, y) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Value, gradient ``P^T w`` and Hessian ``P^T (diag(w) - w w^T) P``
    with ``w`` the softmax weights; evaluated with the max-shift so large exponents do not overflow.
    """
    z = form.P @ np.asarray(y, dtype=float) + form.q
    value = float(logsumexp(z))
    w = softmax(z)
    gradient = form.P.T @ w
    weighted = form.P * w[:, None]
    hessian = form.P.T @ weighted - np.outer(gradient, gradient)
    return value, gradient, 0.5 * (hessian + hessian.T)
