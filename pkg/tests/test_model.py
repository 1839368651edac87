import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from slcp import (
    BlackBoxFn,
    DomainError,
    ModelError,
    Monomial,
    Posynomial,
    ProblemBuilder,
    StandardFormProblem,
    Variable,
    eval_monomial,
    eval_posynomial,
    finite_difference_gradient,
    signomial_ratio,
    validate,
)


@pytest.fixture
def builder():
    return ProblemBuilder(["x", "y"], name="demo")


def test_monomial_value_and_gradient(builder):
    m = 2 * builder["x"] ** 2 / builder["y"]

    assert isinstance(m, Monomial)
    assert m.evaluate([3.0, 4.0]) == pytest.approx(4.5)
    assert_allclose(m.gradient([3.0, 4.0]), [3.0, -1.125])


def test_numpy_scalar_times_monomial(builder):
    m = np.float64(2.5) * builder["x"]

    assert isinstance(m, Monomial)
    assert m.coefficient == 2.5


def test_monomial_algebra_builds_posynomials(builder):
    x, y = builder["x"], builder["y"]
    p = 1 + x * y + 3 * x**-1

    assert isinstance(p, Posynomial)
    assert len(p) == 3
    assert p.evaluate([2.0, 0.5]) == pytest.approx(1 + 1 + 1.5)
    assert len(p * (x + y)) == 6
    assert (p / y).evaluate([2.0, 0.5]) == pytest.approx(7.0)


def test_posynomial_gradient_matches_finite_differences(builder):
    x, y = builder["x"], builder["y"]
    p = 0.3 * x**1.5 * y**-0.5 + 2 * y**2 + x**-1
    point = np.array([0.7, 1.3])

    assert_allclose(p.gradient(point), finite_difference_gradient(p.evaluate, point), rtol=1e-6)


def test_monomials_are_homogeneous_in_each_variable():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        m = Monomial(rng.uniform(0.1, 10.0), rng.uniform(-3.0, 3.0, 4))
        x = rng.uniform(0.2, 5.0, 4)
        i = int(rng.integers(4))
        s = rng.uniform(0.1, 10.0)
        scaled = x.copy()
        scaled[i] *= s

        assert m.evaluate(scaled) == pytest.approx(s ** m.exponents[i] * m.evaluate(x), rel=1e-12)


def test_eval_rejects_dimension_mismatch(builder):
    with pytest.raises(DomainError):
        eval_monomial(builder["x"], [1.0, 2.0, 3.0])

    with pytest.raises(DomainError):
        eval_posynomial(builder["x"] + builder["y"], [1.0])


@pytest.mark.parametrize("point", [[0.0, 1.0], [1.0, -2.0], [math.nan, 1.0]])
def test_eval_rejects_nonpositive_points(builder, point):
    with pytest.raises(DomainError):
        eval_monomial(builder["x"] * builder["y"], point)


def test_finite_difference_falls_back_to_forward_difference():
    grad = finite_difference_gradient(lambda x: x[0] ** 2 + x[0], [1e-10])

    assert_allclose(grad, [1.0], atol=1e-6)


def test_blackbox_finite_difference_gradient():
    fn = BlackBoxFn.finite_difference(lambda x: x[0] * x[1] ** 2, 2, name="product")

    assert fn.uses_finite_differences
    assert_allclose(fn.gradient([2.0, 3.0]), [9.0, 12.0], rtol=1e-6)


def test_blackbox_rejects_non_finite_values():
    fn = BlackBoxFn(lambda x: math.inf, 1, name="broken")

    with pytest.raises(DomainError, match="broken"):
        fn.evaluate([1.0])


def test_blackbox_scaled():
    fn = BlackBoxFn(lambda x: x[0] ** 2, 1, lambda x: np.array([2 * x[0]]))
    scaled = fn.scaled(0.5)

    assert scaled.evaluate([3.0]) == pytest.approx(4.5)
    assert_allclose(scaled.gradient([3.0]), [3.0])


def test_signomial_ratio(builder):
    x, y = builder["x"], builder["y"]
    fn = signomial_ratio(x + y, 0.5 * x)
    point = np.array([1.0, 1.0])

    assert fn.evaluate(point) == pytest.approx(2.0 / 1.5)
    assert_allclose(fn.gradient(point), finite_difference_gradient(fn.evaluate, point), rtol=1e-6)
    # p - n <= 1 and p / (1 + n) <= 1 agree on feasibility
    for p in ([0.5, 0.2], [2.0, 1.0], [1.0, 0.4]):
        signomial = (x + y).evaluate(p) - (0.5 * x).evaluate(p)
        assert (signomial <= 1) == (fn.evaluate(p) <= 1)


def test_builder_sorts_rows(builder):
    x, y = builder["x"], builder["y"]
    builder.minimize(x**-1 * y**-1)
    builder.add_le(x + y)
    builder.add_le(x, 2 * y)
    builder.add_eq(x * y, 0.25)
    problem = builder.build()

    assert problem.n == 2
    assert problem.variable_names == ("x", "y")
    assert len(problem.posy_ineq) == 1
    assert len(problem.mono_ineq) == 1
    assert len(problem.mono_eq) == 1
    assert problem.is_pure_gp
    assert problem.max_violation([0.5, 0.5]) == pytest.approx(0.0)
    assert problem.max_violation([1.0, 0.5]) == pytest.approx(1.0)


def test_builder_bounds_become_monomial_rows(builder):
    builder.minimize(builder["x"] + builder["y"])
    builder.bound("x", lower=0.5, upper=2.0)
    problem = builder.build()

    assert len(problem.mono_ineq) == 2
    assert_allclose(problem.lower_bounds, [0.5, 1e-9])
    assert problem.upper_bounds[0] == 2.0
    assert problem.max_violation([3.0, 1.0]) == pytest.approx(0.5)


def test_builder_rejects_posynomial_equality(builder):
    with pytest.raises(ModelError):
        builder.add_eq(builder["x"] + builder["y"])


def test_builder_requires_objective(builder):
    with pytest.raises(ModelError, match="objective"):
        builder.build()


def test_builder_rejects_unknown_and_duplicate_names(builder):
    with pytest.raises(ModelError, match="z"):
        builder["z"]

    with pytest.raises(ModelError):
        ProblemBuilder(["x", "x"])


def test_builder_blackbox_rows(builder):
    builder.minimize(builder["x"])
    builder.add_blackbox_le(BlackBoxFn(lambda x: x[0] * x[1], 2))
    builder.add_blackbox_eq(BlackBoxFn(lambda x: x[1], 2))
    problem = builder.build()

    assert not problem.is_pure_gp
    assert len(problem.inequalities()) == 1
    assert len(problem.equalities()) == 1


def test_validate_reports_every_error():
    variables = (Variable(0, "x"), Variable(1, "y", lower=2.0, upper=1.0))
    problem = StandardFormProblem(
        variables,
        Monomial(-1.0, [1.0, 0.0]),
        posy_ineq=(Posynomial((Monomial(1.0, [1.0]),)),),
        bb_ineq=(BlackBoxFn(lambda x: 1.0, 3, name="wide"),),
    )
    report = validate(problem)

    assert not report
    assert len(report.errors) == 4
    assert any("wide" in e for e in report.errors)
    assert any("lower bound" in e for e in report.errors)


def test_point_requires_every_variable(builder):
    builder.minimize(builder["x"])
    problem = builder.build()

    assert_allclose(problem.point({"y": 2.0, "x": 1.0}), [1.0, 2.0])
    assert problem.as_dict([1.0, 2.0]) == {"x": 1.0, "y": 2.0}
    with pytest.raises(ModelError, match="y"):
        problem.point({"x": 1.0})
