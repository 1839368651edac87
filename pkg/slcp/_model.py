import math
import numbers
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ._exceptions import DomainError, ModelError

DEFAULT_LOWER = 1e-9

#: relative finite-difference step and its absolute floor
FD_RELATIVE_STEP = 1e-6
FD_ABSOLUTE_STEP = 1e-9


def _as_point(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DomainError(f"Expected a 1-D point, got shape {x.shape}")
    return x


def _require_positive(x: np.ndarray) -> None:
    if not np.all(x > 0):
        bad = np.flatnonzero(~(x > 0))
        raise DomainError(
            f"Variables must be strictly positive, got nonpositive entries at {bad.tolist()}"
        )


@dataclass(frozen=True)
class Variable:
    """
    A strictly positive decision variable.
    """

    index: int
    name: str
    lower: float = DEFAULT_LOWER
    upper: float = math.inf


@dataclass(frozen=True, eq=False)
class Monomial:
    """
    ``c * prod(x_i ** a_i)`` with the exponents stored densely over all variables.
    """

    coefficient: float
    exponents: np.ndarray

    # numpy scalars on the left defer to the reflected operators
    __array_ufunc__ = None

    def __post_init__(self):
        exponents = np.array(self.exponents, dtype=float)
        exponents.setflags(write=False)
        object.__setattr__(self, "exponents", exponents)
        object.__setattr__(self, "coefficient", float(self.coefficient))

    @classmethod
    def constant(cls, c: float, n: int) -> "Monomial":
        return cls(c, np.zeros(n))

    @property
    def dimension(self) -> int:
        return self.exponents.shape[0]

    def evaluate(self, x) -> float:
        return eval_monomial(self, x)

    def gradient(self, x) -> np.ndarray:
        x = _as_point(x)
        return self.evaluate(x) * self.exponents / x

    def as_posynomial(self) -> "Posynomial":
        return Posynomial((self,))

    def __mul__(self, other):
        if isinstance(other, Monomial):
            return Monomial(
                self.coefficient * other.coefficient, self.exponents + other.exponents
            )
        if isinstance(other, Posynomial):
            return other * self
        if isinstance(other, numbers.Real):
            return Monomial(self.coefficient * other, self.exponents)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Monomial):
            return Monomial(
                self.coefficient / other.coefficient, self.exponents - other.exponents
            )
        if isinstance(other, numbers.Real):
            return Monomial(self.coefficient / other, self.exponents)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, numbers.Real):
            return Monomial(other / self.coefficient, -self.exponents)
        return NotImplemented

    def __pow__(self, power: float) -> "Monomial":
        return Monomial(self.coefficient**power, self.exponents * power)

    def __add__(self, other):
        return self.as_posynomial() + other

    __radd__ = __add__

    def __repr__(self):
        return f"Monomial({self.coefficient!r}, {self.exponents.tolist()!r})"


@dataclass(frozen=True, eq=False)
class Posynomial:
    """
    A sum of monomials over the same variable set.
    """

    terms: Tuple[Monomial, ...]

    __array_ufunc__ = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def dimension(self) -> int:
        return self.terms[0].dimension

    @cached_property
    def exponent_matrix(self) -> np.ndarray:
        return np.vstack([t.exponents for t in self.terms])

    @cached_property
    def coefficients(self) -> np.ndarray:
        return np.array([t.coefficient for t in self.terms])

    def term_values(self, x) -> np.ndarray:
        x = _as_point(x)
        _require_positive(x)
        return self.coefficients * np.exp(self.exponent_matrix @ np.log(x))

    def evaluate(self, x) -> float:
        return eval_posynomial(self, x)

    def gradient(self, x) -> np.ndarray:
        x = _as_point(x)
        return (self.term_values(x) @ self.exponent_matrix) / x

    def as_posynomial(self) -> "Posynomial":
        return self

    def __add__(self, other):
        if isinstance(other, numbers.Real):
            other = Monomial.constant(other, self.dimension)
        if isinstance(other, Monomial):
            return Posynomial(self.terms + (other,))
        if isinstance(other, Posynomial):
            return Posynomial(self.terms + other.terms)
        return NotImplemented

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, (numbers.Real, Monomial)):
            return Posynomial(tuple(t * other for t in self.terms))
        if isinstance(other, Posynomial):
            return Posynomial(tuple(a * b for a in self.terms for b in other.terms))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (numbers.Real, Monomial)):
            return Posynomial(tuple(t / other for t in self.terms))
        return NotImplemented

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"Posynomial({list(self.terms)!r})"


def eval_monomial(m: Monomial, x) -> float:
    x = _as_point(x)
    if x.shape[0] != m.dimension:
        raise DomainError(f"Point has dimension {x.shape[0]}, monomial expects {m.dimension}")
    _require_positive(x)
    return float(m.coefficient * np.prod(np.power(x, m.exponents)))


def eval_posynomial(p: Posynomial, x) -> float:
    x = _as_point(x)
    if x.shape[0] != p.dimension:
        raise DomainError(f"Point has dimension {x.shape[0]}, posynomial expects {p.dimension}")
    return float(sum(eval_monomial(t, x) for t in p.terms))


def finite_difference_gradient(fn: Callable[[np.ndarray], float], x) -> np.ndarray:
    """
    Central differences with step ``max(1e-6 |x_i|, 1e-9)``.
    Falls back to a forward difference where the backward point would leave the positive orthant.
    """
    x = _as_point(x)
    grad = np.empty_like(x)
    f0: Optional[float] = None
    for i in range(x.shape[0]):
        h = max(FD_RELATIVE_STEP * abs(x[i]), FD_ABSOLUTE_STEP)
        forward = x.copy()
        forward[i] += h
        if x[i] - h > 0:
            backward = x.copy()
            backward[i] -= h
            grad[i] = (fn(forward) - fn(backward)) / (2 * h)
        else:
            if f0 is None:
                f0 = fn(x)
            grad[i] = (fn(forward) - f0) / h
    return grad


@dataclass(frozen=True, eq=False)
class BlackBoxFn:
    """
    A function known only through evaluation.

    The evaluator must be pure and must either return a finite positive value
    for every point inside the variable bounds or raise :class:`DomainError`.
    Without an analytic ``gradient_fn`` gradients come from central finite differences.
    """

    evaluator: Callable[[np.ndarray], float]
    arity: int
    gradient_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "blackbox"

    @classmethod
    def finite_difference(
        cls, evaluator: Callable[[np.ndarray], float], arity: int, name: str = "blackbox"
    ) -> "BlackBoxFn":
        return cls(evaluator, arity, None, name)

    @property
    def dimension(self) -> int:
        return self.arity

    @property
    def uses_finite_differences(self) -> bool:
        return self.gradient_fn is None

    def evaluate(self, x) -> float:
        value = float(self.evaluator(_as_point(x)))
        if not math.isfinite(value):
            raise DomainError(f"Black box '{self.name}' returned a non-finite value")
        return value

    def gradient(self, x) -> np.ndarray:
        x = _as_point(x)
        if self.gradient_fn is None:
            return finite_difference_gradient(self.evaluate, x)
        return np.asarray(self.gradient_fn(x), dtype=float)

    def scaled(self, factor: float) -> "BlackBoxFn":
        evaluator, gradient_fn = self.evaluator, self.gradient_fn
        return BlackBoxFn(
            lambda x: factor * evaluator(x),
            self.arity,
            None if gradient_fn is None else (lambda x: factor * gradient_fn(x)),
            self.name,
        )


Expression = Union[Monomial, Posynomial]
Function = Union[Monomial, Posynomial, BlackBoxFn]


def signomial_ratio(plus: Expression, minus: Expression, name: str = "signomial") -> BlackBoxFn:
    """
    Black box for the signomial constraint ``plus(x) - minus(x) <= 1``.

    The equivalent form ``plus / (1 + minus) <= 1`` is positive everywhere,
    so it survives the log transform.
    """
    p, q = plus.as_posynomial(), minus.as_posynomial()

    def value(x):
        return p.evaluate(x) / (1.0 + q.evaluate(x))

    def gradient(x):
        denominator = 1.0 + q.evaluate(x)
        return (p.gradient(x) * denominator - p.evaluate(x) * q.gradient(x)) / denominator**2

    return BlackBoxFn(value, p.dimension, gradient, name)


@dataclass(frozen=True)
class ValidationReport:
    errors: Tuple[str, ...]
    pure_gp: bool

    @property
    def valid(self) -> bool:
        return not self.errors

    def __bool__(self):
        return self.valid


@dataclass(frozen=True, eq=False)
class StandardFormProblem:
    """
    ``min f(x)`` subject to ``p(x) <= 1``, ``m(x) = 1``, ``m(x) <= 1``, ``g(x) <= 1``, ``h(x) = 1``
    over strictly positive ``x``.
    """

    variables: Tuple[Variable, ...]
    objective: Function
    posy_ineq: Tuple[Posynomial, ...] = ()
    mono_eq: Tuple[Monomial, ...] = ()
    mono_ineq: Tuple[Monomial, ...] = ()
    bb_ineq: Tuple[BlackBoxFn, ...] = ()
    bb_eq: Tuple[BlackBoxFn, ...] = ()
    name: str = "problem"

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def is_pure_gp(self) -> bool:
        return (
            isinstance(self.objective, (Monomial, Posynomial))
            and not self.bb_ineq
            and not self.bb_eq
        )

    @cached_property
    def variable_names(self) -> Tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def index_of(self, name: str) -> int:
        try:
            return self.variable_names.index(name)
        except ValueError:
            raise ModelError(f"Unknown variable '{name}' in problem '{self.name}'")

    @property
    def lower_bounds(self) -> np.ndarray:
        return np.array([v.lower for v in self.variables])

    @property
    def upper_bounds(self) -> np.ndarray:
        return np.array([v.upper for v in self.variables])

    def inequalities(self) -> List[Function]:
        return [*self.posy_ineq, *self.mono_ineq, *self.bb_ineq]

    def equalities(self) -> List[Function]:
        return [*self.mono_eq, *self.bb_eq]

    def max_violation(self, x) -> float:
        """
        Largest constraint violation in function-value terms (``g - 1`` or ``|h - 1|``).
        """
        violation = 0.0
        for fn in self.inequalities():
            violation = max(violation, fn.evaluate(x) - 1.0)
        for fn in self.equalities():
            violation = max(violation, abs(fn.evaluate(x) - 1.0))
        return violation

    def point(self, values: Dict[str, float]) -> np.ndarray:
        missing = set(self.variable_names) - set(values)
        if missing:
            raise ModelError(f"Missing values for variables: {sorted(missing)}")
        return np.array([float(values[name]) for name in self.variable_names])

    def as_dict(self, x) -> Dict[str, float]:
        return {name: float(v) for name, v in zip(self.variable_names, x)}

    def with_objective(self, objective: Function) -> "StandardFormProblem":
        return StandardFormProblem(
            self.variables,
            objective,
            self.posy_ineq,
            self.mono_eq,
            self.mono_ineq,
            self.bb_ineq,
            self.bb_eq,
            self.name,
        )


def _monomial_errors(m: Monomial, n: int, label: str) -> List[str]:
    errors = []
    if not (m.coefficient > 0 and math.isfinite(m.coefficient)):
        errors.append(f"{label}: coefficient {m.coefficient} is not a finite positive number")
    if m.exponents.shape != (n,):
        errors.append(f"{label}: exponent vector has shape {m.exponents.shape}, expected ({n},)")
    elif not np.all(np.isfinite(m.exponents)):
        errors.append(f"{label}: exponents are not finite")
    return errors


def _posynomial_errors(p: Posynomial, n: int, label: str) -> List[str]:
    if not p.terms:
        return [f"{label}: posynomial has no terms"]
    errors = []
    for k, term in enumerate(p.terms):
        errors += _monomial_errors(term, n, f"{label} term {k}")
    return errors


def _function_errors(fn, n: int, label: str) -> List[str]:
    if isinstance(fn, Monomial):
        return _monomial_errors(fn, n, label)
    if isinstance(fn, Posynomial):
        return _posynomial_errors(fn, n, label)
    if isinstance(fn, BlackBoxFn):
        if fn.arity != n:
            return [f"{label}: black box '{fn.name}' has arity {fn.arity}, expected {n}"]
        return []
    return [f"{label}: unsupported function type {type(fn).__name__}"]


def validate(problem: StandardFormProblem) -> ValidationReport:
    n = problem.n
    errors: List[str] = []
    for i, v in enumerate(problem.variables):
        if v.index != i:
            errors.append(f"variable '{v.name}': index {v.index} does not match position {i}")
        if not v.lower > 0:
            errors.append(f"variable '{v.name}': lower bound {v.lower} is not positive")
        if not v.lower <= v.upper:
            errors.append(f"variable '{v.name}': lower bound {v.lower} exceeds upper {v.upper}")
    errors += _function_errors(problem.objective, n, "objective")
    rows: Sequence[Tuple[str, Sequence]] = [
        ("posy_ineq", problem.posy_ineq),
        ("mono_eq", problem.mono_eq),
        ("mono_ineq", problem.mono_ineq),
        ("bb_ineq", problem.bb_ineq),
        ("bb_eq", problem.bb_eq),
    ]
    for group, functions in rows:
        for i, fn in enumerate(functions):
            errors += _function_errors(fn, n, f"{group}[{i}]")
    return ValidationReport(tuple(errors), problem.is_pure_gp)


@dataclass
class ProblemBuilder:
    """
    Incremental construction of a :class:`StandardFormProblem`.

    All variable names are declared up front; ``builder["S"]`` is the unit monomial ``S``.
    Non-default bounds become monomial inequality rows when the problem is built.
    """

    names: Sequence[str]
    name: str = "problem"
    _objective: Optional[Function] = field(default=None, init=False)
    _lower: Dict[str, float] = field(default_factory=dict, init=False)
    _upper: Dict[str, float] = field(default_factory=dict, init=False)
    _posy_ineq: List[Posynomial] = field(default_factory=list, init=False)
    _mono_eq: List[Monomial] = field(default_factory=list, init=False)
    _mono_ineq: List[Monomial] = field(default_factory=list, init=False)
    _bb_ineq: List[BlackBoxFn] = field(default_factory=list, init=False)
    _bb_eq: List[BlackBoxFn] = field(default_factory=list, init=False)

    def __post_init__(self):
        self.names = tuple(self.names)
        if len(set(self.names)) != len(self.names):
            raise ModelError(f"Duplicate variable names in problem '{self.name}'")

    @property
    def n(self) -> int:
        return len(self.names)

    def __getitem__(self, name: str) -> Monomial:
        try:
            i = self.names.index(name)
        except ValueError:
            raise ModelError(f"Unknown variable '{name}' in problem '{self.name}'")
        exponents = np.zeros(self.n)
        exponents[i] = 1.0
        return Monomial(1.0, exponents)

    def constant(self, c: float) -> Monomial:
        return Monomial.constant(c, self.n)

    def bound(self, name: str, lower: Optional[float] = None, upper: Optional[float] = None):
        self[name]  # raises on unknown names
        if lower is not None:
            self._lower[name] = float(lower)
        if upper is not None:
            self._upper[name] = float(upper)
        return self

    def minimize(self, objective: Union[Function, float]):
        self._objective = objective
        return self

    def add_le(self, lhs: Union[Expression, float], rhs: Union[Monomial, float] = 1.0):
        """
        Adds ``lhs <= rhs`` as ``lhs / rhs <= 1``; single-term rows become monomial rows.
        """
        if isinstance(lhs, numbers.Real):
            lhs = self.constant(lhs)
        row = lhs.as_posynomial() / rhs
        if len(row.terms) == 1:
            self._mono_ineq.append(row.terms[0])
        else:
            self._posy_ineq.append(row)
        return self

    def add_eq(self, lhs: Monomial, rhs: Union[Monomial, float] = 1.0):
        if not isinstance(lhs, Monomial):
            raise ModelError("Equality rows must be monomials; use a black box otherwise")
        self._mono_eq.append(lhs / rhs)
        return self

    def add_blackbox_le(self, fn: BlackBoxFn):
        self._bb_ineq.append(fn)
        return self

    def add_blackbox_eq(self, fn: BlackBoxFn):
        self._bb_eq.append(fn)
        return self

    def build(self) -> StandardFormProblem:
        if self._objective is None:
            raise ModelError(f"Problem '{self.name}' has no objective")
        variables = tuple(
            Variable(i, name, self._lower.get(name, DEFAULT_LOWER), self._upper.get(name, math.inf))
            for i, name in enumerate(self.names)
        )
        mono_ineq = list(self._mono_ineq)
        for v in variables:
            unit = self[v.name]
            if v.lower != DEFAULT_LOWER:
                mono_ineq.append(v.lower / unit)
            if math.isfinite(v.upper):
                mono_ineq.append(unit / v.upper)
        problem = StandardFormProblem(
            variables,
            self._objective,
            tuple(self._posy_ineq),
            tuple(self._mono_eq),
            tuple(mono_ineq),
            tuple(self._bb_ineq),
            tuple(self._bb_eq),
            self.name,
        )
        report = validate(problem)
        if not report.valid:
            raise ModelError(f"Invalid problem '{self.name}': " + "; ".join(report.errors))
        return problem
