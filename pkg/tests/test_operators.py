import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import gamma as gamma_fn

from apps.utils.operators import (
    FractionalOrders,
    GridError,
    GridFunction,
    GridSpec,
    OrderError,
    delta_derivative,
    exchange_lemma_residual,
    h_integral,
    kernel_weight,
    left_fractional_difference,
    left_fractional_sum,
    left_shift_identity_residual,
    left_sum_split_form,
    right_fractional_difference,
    right_fractional_sum,
    right_shift_identity_residual,
    right_sum_split_form,
)
from apps.utils.special import generalized_polynomial, h_factorial


def brute_left_sum(values, nu, h, a):
    """aΔ^{-ν} f(t+νh) straight from the defining sum over s = a .. t."""
    out = []
    for i in range(len(values)):
        t = a + i * h + nu * h
        acc = 0.0
        for j in range(i + 1):
            s = a + j * h
            acc += h * h_factorial(t - (s + h), nu - 1, h) * values[j]
        out.append(acc / gamma_fn(nu))
    return np.array(out)


def brute_right_sum(values, nu, h, a):
    """hΔ_b^{-ν} f(t-νh) straight from the defining sum over s = t .. b."""
    n = len(values)
    out = []
    for i in range(n):
        t = a + i * h - nu * h
        acc = 0.0
        for j in range(i, n):
            s = a + j * h
            acc += h * h_factorial(s - (t + h), nu - 1, h) * values[j]
        out.append(acc / gamma_fn(nu))
    return np.array(out)


# ------------ grids ------------

def test_grid_points_and_truncation():
    grid = GridSpec(0.0, 0.25, 4)
    assert_allclose(grid.points(), [0, 0.25, 0.5, 0.75, 1.0])
    assert_allclose(grid.points(1), [0, 0.25, 0.5, 0.75])
    assert_allclose(grid.points(2), [0, 0.25, 0.5])
    assert grid.b == 1.0
    assert grid.truncated(2) == GridSpec(0.0, 0.25, 2)


def test_single_point_grid_is_allowed():
    grid = GridSpec(2.0, 0.5, 0)
    assert grid.n_points == 1
    with pytest.raises(GridError):
        grid.points(1)


@pytest.mark.parametrize("h, k", [(0.0, 3), (-0.1, 3), (0.1, -1), (0.1, 2.5)])
def test_invalid_grid(h, k):
    with pytest.raises(GridError):
        GridSpec(0.0, h, k)


def test_index_of():
    grid = GridSpec(1.0, 0.1, 5)
    f = GridFunction.from_callable(grid, lambda t: t * t)
    assert grid.index_of(1.3) == 3
    assert f.values[grid.index_of(1.3)] == pytest.approx(1.69)
    assert grid.index_of(1.35, offset=0.05) == 3
    with pytest.raises(GridError):
        grid.index_of(1.35)
    with pytest.raises(GridError):
        grid.index_of(1.6)


def test_grid_function_rejects_wrong_length_and_is_read_only():
    grid = GridSpec(0.0, 1.0, 2)
    with pytest.raises(GridError):
        GridFunction(grid, [1.0, 2.0])
    f = GridFunction(grid, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        f.values[0] = 5.0


@pytest.mark.parametrize("alpha, beta", [(0.0, 0.5), (1.2, 0.5), (0.5, 0.0), (0.5, -1.0)])
def test_orders_out_of_range(alpha, beta):
    with pytest.raises(OrderError):
        FractionalOrders(alpha, beta)


def test_orders_complements():
    orders = FractionalOrders(0.8, 0.5)
    assert orders.gamma_order == pytest.approx(0.2)
    assert orders.nu_order == pytest.approx(0.5)
    assert FractionalOrders(0.3).beta == 1.0


# ------------ delta derivative and h-integral ------------

def test_delta_derivative_examples():
    grid = GridSpec(0.0, 0.5, 2)
    const = GridFunction(grid, [3.0, 3.0, 3.0])
    assert_allclose(delta_derivative(const).values, 0.0)
    ident = GridFunction.from_callable(grid, lambda t: t)
    d = delta_derivative(ident)
    assert_allclose(d.values, [1.0, 1.0])
    assert_allclose(d.points, [0.0, 0.5])


@pytest.mark.parametrize("h", [0.1, 0.25, 1.0])
def test_delta_derivative_of_h2_is_h1(h):
    grid = GridSpec(0.0, h, 8)
    f = GridFunction.from_callable(grid, lambda t: generalized_polynomial(2, t, 0.0, h))
    expected = [generalized_polynomial(1, t, 0.0, h) for t in grid.points(1)]
    assert_allclose(delta_derivative(f).values, expected, atol=1e-12)


def test_h_integral_examples():
    grid = GridSpec(0.0, 0.25, 4)
    ones = GridFunction(grid, np.ones(5))
    assert h_integral(ones, 0.0, 1.0) == pytest.approx(1.0)
    assert h_integral(ones, 0.5, 0.5) == 0.0
    ident = GridFunction.from_callable(GridSpec(0.0, 0.5, 2), lambda t: t)
    assert h_integral(ident, 0.0, 1.0) == pytest.approx(0.25)


# ------------ fractional sums ------------

def test_kernel_weight_closed_form():
    h, nu = 0.25, 0.4
    for n in range(6):
        expected = h ** nu * gamma_fn(n + nu) / (gamma_fn(nu) * math.factorial(n))
        assert kernel_weight(n, nu, h) == pytest.approx(expected, rel=1e-12)
    assert kernel_weight(0, nu, h) == pytest.approx(h ** nu, rel=1e-13)
    assert kernel_weight(5, 1.0, h) == pytest.approx(h, rel=1e-13)


@pytest.mark.parametrize("nu", [0.3, 0.5, 0.9, 1.0, 1.7])
@pytest.mark.parametrize("h", [0.1, 0.25, 1.0])
def test_left_sum_matches_definition(rng, nu, h):
    grid = GridSpec(-0.3, h, 7)
    f = GridFunction(grid, rng.normal(size=8))
    s = left_fractional_sum(f, nu)
    assert_allclose(s.values, brute_left_sum(f.values, nu, h, grid.a), rtol=1e-11, atol=1e-12)
    assert s.offset == pytest.approx(nu * h)
    assert_allclose(left_sum_split_form(f, nu).values, s.values, rtol=1e-11, atol=1e-12)


@pytest.mark.parametrize("nu", [0.3, 0.5, 0.9, 1.0])
@pytest.mark.parametrize("h", [0.1, 0.25, 1.0])
def test_right_sum_matches_definition(rng, nu, h):
    grid = GridSpec(0.0, h, 7)
    f = GridFunction(grid, rng.normal(size=8))
    s = right_fractional_sum(f, nu)
    assert_allclose(s.values, brute_right_sum(f.values, nu, h, grid.a), rtol=1e-11, atol=1e-12)
    assert s.offset == pytest.approx(-nu * h)
    assert_allclose(right_sum_split_form(f, nu).values, s.values, rtol=1e-11, atol=1e-12)


def test_sum_of_one_on_unit_grid_starts_at_h_to_nu():
    grid = GridSpec(0.0, 1.0, 3)
    s = left_fractional_sum(GridFunction(grid, np.ones(4)), 0.5)
    assert s.values[0] == pytest.approx(1.0)
    assert s.points[0] == pytest.approx(0.5)


def test_sums_of_zero_vanish():
    grid = GridSpec(0.0, 0.2, 5)
    zero = GridFunction(grid, np.zeros(6))
    assert not left_fractional_sum(zero, 0.4).values.any()
    assert not right_fractional_sum(zero, 0.4).values.any()


def test_sum_order_must_be_positive():
    f = GridFunction(GridSpec(0.0, 1.0, 2), [1.0, 2.0, 3.0])
    with pytest.raises(OrderError):
        left_fractional_sum(f, 0.0)
    with pytest.raises(OrderError):
        right_fractional_sum(f, -0.5)


def test_left_sum_tends_to_identity_as_order_vanishes(rng):
    grid = GridSpec(0.0, 0.25, 6)
    f = GridFunction(grid, rng.normal(size=7))
    devs = [np.max(np.abs(left_fractional_sum(f, nu).values - f.values)) for nu in (1e-2, 1e-4, 1e-6)]
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] < 1e-4


def test_sums_are_linear(rng):
    grid = GridSpec(0.0, 0.1, 9)
    f = GridFunction(grid, rng.normal(size=10))
    g = GridFunction(grid, rng.normal(size=10))
    combo = GridFunction(grid, 2.0 * f.values - 3.0 * g.values)
    for op in (left_fractional_sum, right_fractional_sum):
        expected = 2.0 * op(f, 0.6).values - 3.0 * op(g, 0.6).values
        assert_allclose(op(combo, 0.6).values, expected, atol=1e-12)


# ------------ fractional differences ------------

def test_left_difference_alpha_one_is_delta(rng):
    grid = GridSpec(0.0, 0.25, 4)
    f = GridFunction(grid, rng.normal(size=5))
    assert_allclose(left_fractional_difference(f, 1.0).values, delta_derivative(f).values)


def test_left_difference_of_constant_matches_composition():
    grid = GridSpec(0.0, 0.25, 4)
    f = GridFunction(grid, np.full(5, 2.0))
    d = left_fractional_difference(f, 0.75)
    s = brute_left_sum(f.values, 0.25, 0.25, 0.0)
    assert_allclose(d.values, np.diff(s) / 0.25, rtol=1e-12)
    assert np.all(np.abs(d.values) > 0)
    assert d.grid == grid.truncated(1)


def test_right_difference_beta_one_is_minus_delta():
    grid = GridSpec(0.0, 0.5, 2)
    f = GridFunction.from_callable(grid, lambda t: t)
    assert_allclose(right_fractional_difference(f, 1.0).values, [-1.0, -1.0])


def test_right_difference_matches_composition(rng):
    grid = GridSpec(0.0, 0.1, 6)
    f = GridFunction(grid, rng.normal(size=7))
    r = brute_right_sum(f.values, 0.5, 0.1, 0.0)
    assert_allclose(right_fractional_difference(f, 0.5).values, -np.diff(r) / 0.1, rtol=1e-11, atol=1e-11)


def test_differences_of_zero_vanish():
    f = GridFunction(GridSpec(0.0, 0.1, 4), np.zeros(5))
    assert not left_fractional_difference(f, 0.4).values.any()
    assert not right_fractional_difference(f, 0.4).values.any()


@pytest.mark.parametrize("order", [0.0, 1.5])
def test_difference_order_range(order):
    f = GridFunction(GridSpec(0.0, 0.1, 4), np.ones(5))
    with pytest.raises(OrderError):
        left_fractional_difference(f, order)
    with pytest.raises(OrderError):
        right_fractional_difference(f, order)


# ------------ identities ------------

@pytest.mark.parametrize("nu", [0.3, 0.7])
@pytest.mark.parametrize("h", [0.1, 0.25, 1.0])
def test_shift_identities_on_polynomials(nu, h):
    grid = GridSpec(0.5, h, 8)
    f = GridFunction.from_callable(grid, lambda t: 1.0 - 2.0 * t + 0.5 * t ** 3)
    assert left_shift_identity_residual(f, nu) < 1e-10
    assert right_shift_identity_residual(f, nu) < 1e-10


def test_shift_identities_degenerate_cases():
    grid = GridSpec(0.0, 0.1, 5)
    zero = GridFunction(grid, np.zeros(6))
    assert left_shift_identity_residual(zero, 0.4) == 0.0
    assert right_shift_identity_residual(zero, 0.4) == 0.0
    f = GridFunction(grid, np.arange(6.0))
    assert left_shift_identity_residual(f, 0.0) == 0.0
    assert right_shift_identity_residual(f, 0.0) == 0.0
    with pytest.raises(OrderError):
        left_shift_identity_residual(f, -0.1)


def test_exchange_lemma_examples(rng):
    grid = GridSpec(0.0, 0.2, 6)
    sub, sub2 = grid.truncated(1), grid.truncated(2)
    ones_f = GridFunction(sub, np.ones(sub.n_points))
    ones_k = GridFunction(sub2, np.ones(sub2.n_points))
    assert exchange_lemma_residual(ones_f, ones_k, lambda t, s: 1.0) < 1e-15

    f = GridFunction(sub, rng.normal(size=sub.n_points))
    k = GridFunction(sub2, rng.normal(size=sub2.n_points))
    assert exchange_lemma_residual(f, k, lambda t, s: math.sin(t - 2 * s)) < 1e-12
    zero_k = GridFunction(sub2, np.zeros(sub2.n_points))
    assert exchange_lemma_residual(f, zero_k, lambda t, s: t * s) == 0.0


def test_exchange_lemma_needs_nested_domains():
    grid = GridSpec(0.0, 0.2, 6)
    f = GridFunction(grid, np.ones(7))
    with pytest.raises(GridError):
        exchange_lemma_residual(f, f, lambda t, s: 1.0)
