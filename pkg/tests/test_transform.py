import numpy as np
import pytest
from numpy.testing import assert_allclose

from slcp import (
    LseForm,
    PositivityError,
    ProblemBuilder,
    logspace_gradient,
    lse_eval,
    monomial_to_affine,
    posynomial_to_lse,
)
from slcp._transform import log_value_and_gradient, lse_value


@pytest.fixture
def posynomial():
    b = ProblemBuilder(["x", "y", "z"])
    x, y, z = b["x"], b["y"], b["z"]
    return 0.5 * x**2 * y**-1 + 3 * z**0.5 + x * y * z


def test_lse_form_reproduces_log_of_posynomial(posynomial):
    form = posynomial_to_lse(posynomial)
    x = np.array([0.4, 1.7, 2.2])

    assert form.terms == 3
    assert lse_value(form, np.log(x)) == pytest.approx(np.log(posynomial.evaluate(x)))


def test_lse_gradient_is_logspace_gradient(posynomial):
    form = posynomial_to_lse(posynomial)
    x = np.array([0.4, 1.7, 2.2])
    value, gradient, _ = lse_eval(form, np.log(x))

    expected = logspace_gradient(posynomial.evaluate(x), posynomial.gradient(x), x)
    assert_allclose(gradient, expected, rtol=1e-10)
    log_value, log_grad = log_value_and_gradient(posynomial, x)
    assert log_value == pytest.approx(value)
    assert_allclose(log_grad, expected)


def test_lse_hessian_is_symmetric_psd_and_consistent(posynomial):
    form = posynomial_to_lse(posynomial)
    y = np.log([0.4, 1.7, 2.2])
    _, gradient, hessian = lse_eval(form, y)

    assert_allclose(hessian, hessian.T)
    assert np.min(np.linalg.eigvalsh(hessian)) >= -1e-12
    h = 1e-6
    for i in range(3):
        step = np.zeros(3)
        step[i] = h
        column = (lse_eval(form, y + step)[1] - lse_eval(form, y - step)[1]) / (2 * h)
        assert_allclose(hessian[:, i], column, atol=1e-7)


def test_lse_does_not_overflow():
    form = LseForm(np.array([[1000.0], [999.0]]), np.zeros(2))
    value, gradient, hessian = lse_eval(form, [1.0])

    assert value == pytest.approx(1000.0 + np.log1p(np.exp(-1.0)))
    assert np.all(np.isfinite(gradient))
    assert np.all(np.isfinite(hessian))


def test_monomial_affine_form():
    b = ProblemBuilder(["x", "y"])
    m = 4 * b["x"] ** 1.5 * b["y"] ** -2
    form = monomial_to_affine(m)
    x = np.array([2.0, 0.5])

    assert_allclose(form.A_m, [1.5, -2.0])
    assert form.value(np.log(x)) == pytest.approx(np.log(m.evaluate(x)))


@pytest.mark.parametrize("value", [0.0, -1.0])
def test_logspace_gradient_requires_positive_value(value):
    with pytest.raises(PositivityError):
        logspace_gradient(value, [1.0], [1.0])


def random_posynomial(rng, variables):
    terms = []
    for _ in range(int(rng.integers(1, 5))):
        term = float(rng.uniform(0.1, 10.0))
        for v in variables:
            term = term * v ** float(rng.uniform(-2.0, 2.0))
        terms.append(term)
    posynomial = terms[0]
    for term in terms[1:]:
        posynomial = posynomial + term
    return posynomial


def test_logspace_gradient_of_random_posynomials():
    b = ProblemBuilder(["x", "y", "z"])
    variables = [b["x"], b["y"], b["z"]]
    rng = np.random.default_rng(3)
    h = 1e-6
    for _ in range(1000):
        p = random_posynomial(rng, variables)
        y = rng.uniform(-0.7, 0.7, 3)
        x = np.exp(y)
        log_p = [np.log(p.evaluate(np.exp(y + e))) - np.log(p.evaluate(np.exp(y - e))) for e in h * np.eye(3)]
        gradient = logspace_gradient(p.evaluate(x), p.gradient(x), x)

        assert_allclose(gradient, np.array(log_p) / (2 * h), rtol=1e-6, atol=1e-8)


def test_random_three_term_forms():
    rng = np.random.default_rng(5)
    for case in range(1000):
        form = LseForm(rng.uniform(-3.0, 3.0, (3, 3)), rng.uniform(-1.0, 1.0, 3))
        y = rng.uniform(-1.0, 1.0, 3)
        _, gradient, hessian = lse_eval(form, y)
        v = rng.normal(size=3)

        assert v @ hessian @ v >= -1e-10
        if case % 10:
            continue
        fd_gradient = [lse_value(form, y + e) - lse_value(form, y - e) for e in 1e-6 * np.eye(3)]
        fd_hessian = [lse_eval(form, y + e)[1] - lse_eval(form, y - e)[1] for e in 1e-5 * np.eye(3)]
        assert_allclose(gradient, np.array(fd_gradient) / 2e-6, rtol=1e-6, atol=1e-8)
        assert_allclose(hessian, np.array(fd_hessian).T / 2e-5, rtol=1e-4, atol=1e-6)


def test_shifting_one_coordinate_moves_the_value_within_its_exponent_range():
    rng = np.random.default_rng(9)
    for _ in range(1000):
        terms = int(rng.integers(1, 6))
        form = LseForm(rng.uniform(-3.0, 3.0, (terms, 2)), rng.uniform(-1.0, 1.0, terms))
        y = rng.uniform(-1.0, 1.0, 2)
        i = int(rng.integers(2))
        delta = float(rng.uniform(-1.0, 1.0))
        shifted = y.copy()
        shifted[i] += delta
        change = lse_value(form, shifted) - lse_value(form, y)
        low, high = sorted([delta * form.P[:, i].min(), delta * form.P[:, i].max()])

        assert low - 1e-12 <= change <= high + 1e-12
