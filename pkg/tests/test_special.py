import math

import pytest

from apps.utils.special import (
    GammaOverflowError,
    GammaPoleError,
    gamma,
    gamma_ratio,
    generalized_polynomial,
    h_factorial,
)


@pytest.mark.parametrize("x, expected", [(1.0, 1.0), (5.0, 24.0), (0.5, math.sqrt(math.pi)), (-0.5, -2 * math.sqrt(math.pi))])
def test_gamma_values(x, expected):
    assert gamma(x) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("x", [0.0, -1.0, -3.0, -2.0 + 1e-12])
def test_gamma_pole_is_reported(x):
    with pytest.raises(GammaPoleError):
        gamma(x)


def test_gamma_overflow_is_not_a_pole():
    with pytest.raises(GammaOverflowError):
        gamma(200.0)


@pytest.mark.parametrize("num, den, expected", [
    (5.0, 3.0, 12.0),
    (2.5, -1.0, 0.0),
    (7.3, 4.3, 6.3 * 5.3 * 4.3),
    (200.5, 199.5, 199.5),
])
def test_gamma_ratio(num, den, expected):
    assert gamma_ratio(num, den) == pytest.approx(expected, rel=1e-10, abs=0.0)


def test_gamma_ratio_denominator_pole_is_exact_zero():
    assert gamma_ratio(2.5, -1.0) == 0.0
    assert gamma_ratio(3.0, 0.0 + 1e-12) == 0.0


@pytest.mark.parametrize("num, den, expected", [(-2.0, -1.0, -0.5), (-1.0, -2.0, -2.0), (-3.0, -3.0, 1.0), (0.0, -2.0, 2.0)])
def test_gamma_ratio_both_poles_uses_limit(num, den, expected):
    assert gamma_ratio(num, den) == pytest.approx(expected, rel=1e-14)


def test_gamma_ratio_numerator_pole_raises():
    with pytest.raises(GammaPoleError):
        gamma_ratio(-1.0, 2.5)


@pytest.mark.parametrize("x", [0.3, 1.7, 12.25, -0.4])
def test_gamma_ratio_self_is_one(x):
    assert gamma_ratio(x, x) == 1.0


def test_h_factorial_examples():
    assert h_factorial(3.0, 0.0, 0.5) == 1.0
    assert h_factorial(6.0, 2.0, 1.0) == pytest.approx(30.0, rel=1e-14)
    for h in (0.1, 0.25, 1.0):
        assert h_factorial(2 * h, 1.0, h) == pytest.approx(2 * h, rel=1e-13)


@pytest.mark.parametrize("x", [-3.7, -1.0, 0.0, 2.5])
def test_h_factorial_order_zero_is_one(x):
    assert h_factorial(x, 0.0, 0.3) == 1.0


@pytest.mark.parametrize("x, y, h", [(1.3, 0.4, 0.25), (2.0, -0.6, 0.5), (0.75, 0.25, 0.1), (3.1, 1.5, 1.0)])
def test_h_factorial_recurrence(x, y, h):
    lhs = h_factorial(x, y + 1, h)
    rhs = h_factorial(x, y, h) * h * (x / h - y)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_h_factorial_rejects_nonpositive_step():
    with pytest.raises(ValueError):
        h_factorial(1.0, 0.5, 0.0)


def test_generalized_polynomial_examples():
    assert generalized_polynomial(0, 0.7, 0.1, 0.3) == 1.0
    assert generalized_polynomial(1, 1.0, 0.25, 0.25) == pytest.approx(0.75, rel=1e-14)
    assert generalized_polynomial(2, 1.0, 0.0, 0.5) == pytest.approx(0.25, rel=1e-14)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
@pytest.mark.parametrize("h", [0.1, 0.25, 1.0])
def test_generalized_polynomial_delta_recurrence(k, h):
    s = 0.5
    for i in range(6):
        t = s + i * h
        diff = (generalized_polynomial(k + 1, t + h, s, h) - generalized_polynomial(k + 1, t, s, h)) / h
        assert diff == pytest.approx(generalized_polynomial(k, t, s, h), abs=1e-10)
