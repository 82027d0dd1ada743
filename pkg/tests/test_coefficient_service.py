import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from src.services.coefficient_service import (
    ShiftParameters,
    absolute_coefficient_sum,
    auxiliary_H,
    coefficient_functionals,
    coefficient_table,
    cosine_coefficient,
    cosine_coefficient_oracle,
    cosine_coefficients,
    limit_functionals,
    partial_a_functional,
    squared_coefficient_sum,
    tail_abs_sum_bound,
    tail_abs_sum_estimate,
)


def test_first_coefficients():
    assert cosine_coefficient(0) == 0.75
    assert cosine_coefficient(1) == pytest.approx(4.0 / (3.0 * math.pi), rel=1e-15)
    assert cosine_coefficient(2) == -0.25
    assert cosine_coefficient(3) == pytest.approx(4.0 / (15.0 * math.pi), rel=1e-15)
    assert cosine_coefficient(5) == pytest.approx(-4.0 / (105.0 * math.pi), rel=1e-15)


@pytest.mark.parametrize("k", [4, 6, 10, 100, 1000])
def test_even_coefficients_vanish(k):
    assert cosine_coefficient(k) == 0.0


def test_negative_index_rejected():
    with pytest.raises(ValueError):
        cosine_coefficient(-1)


def test_vector_matches_scalar():
    vector = cosine_coefficients(200)
    scalar = np.array([cosine_coefficient(k) for k in range(201)])
    np.testing.assert_allclose(vector, scalar, rtol=1e-14, atol=0.0)


def test_closed_form_matches_quadrature_oracle():
    for k in range(201):
        assert abs(cosine_coefficient(k) - cosine_coefficient_oracle(k, 1e-10)) < 1e-8, k


@given(st.integers(min_value=1, max_value=100_000))
def test_coefficients_bounded_by_inverse_square(k):
    assert abs(cosine_coefficient(k)) <= 1.0 / k**2


def test_tail_below_one_over_n():
    for n in range(1, 1001):
        assert tail_abs_sum_estimate(n) < 1.0 / n, n
        assert tail_abs_sum_bound(n) < 1.0 / n


def test_tail_bound_covers_direct_partial_tail():
    magnitudes = np.abs(cosine_coefficients(20_000))
    for n in (1, 2, 3, 10, 99, 1000):
        assert float(np.sum(magnitudes[n + 1:])) <= tail_abs_sum_bound(n)


def test_tail_beyond_cutoff():
    assert tail_abs_sum_bound(10_000_000) == pytest.approx(1e-7)
    assert tail_abs_sum_estimate(10_000_000) == pytest.approx(1e-14)


def test_tail_bound_carries_cutoff_remainder():
    explicit = float(np.sum(np.abs(cosine_coefficients(1_000_000))[101:]))
    assert tail_abs_sum_bound(100) == pytest.approx(explicit + 1e-6, abs=1e-8)
    assert tail_abs_sum_estimate(100) < tail_abs_sum_bound(100)


def test_tail_bound_is_non_increasing():
    bounds = [tail_abs_sum_bound(n) for n in range(1, 2001)]
    assert all(later <= earlier for earlier, later in zip(bounds, bounds[1:]))
    assert tail_abs_sum_bound(1) <= 1.0
    with pytest.raises(ValueError):
        tail_abs_sum_bound(0)


def test_coefficient_sums():
    partial_abs, remainder = absolute_coefficient_sum()
    assert partial_abs == pytest.approx(0.25 + 5.0 / (3.0 * math.pi), abs=1e-9)
    assert remainder < 1e-9
    partial_sq, _ = squared_coefficient_sum()
    assert partial_sq == pytest.approx(0.25, abs=1e-12)


def test_parseval_identity():
    partial_sq, _ = squared_coefficient_sum()
    assert 2.0 * 0.75**2 + partial_sq == pytest.approx(11.0 / 8.0, abs=1e-9)


def test_table():
    table = coefficient_table(10)
    assert len(table.values) == 11
    assert table.values[2] == -0.25
    assert table.tail_bound == tail_abs_sum_bound(10)


def test_table_rejects_wrong_a0():
    with pytest.raises(ValidationError):
        type(coefficient_table(2))(max_index=2, values=(0.7, 0.4, -0.25), tail_bound=0.5)


def test_auxiliary_values():
    assert auxiliary_H(0.0) == 1.0
    assert auxiliary_H(math.pi / 2) == 1.0
    assert auxiliary_H(3.0 * math.pi / 4) == pytest.approx(0.5)
    assert auxiliary_H(math.pi) == pytest.approx(0.0, abs=1e-30)
    assert auxiliary_H(np.array([0.0, 2.0 * math.pi])).tolist() == [1.0, 1.0]


@given(st.floats(min_value=-50.0, max_value=50.0))
def test_auxiliary_even_and_periodic(x):
    assert auxiliary_H(-x) == pytest.approx(auxiliary_H(x), abs=1e-12)
    assert auxiliary_H(x + 2.0 * math.pi) == pytest.approx(auxiliary_H(x), abs=1e-12)


def test_partial_cosine_sum_approximates_auxiliary():
    a = cosine_coefficients(2000)
    x = np.linspace(-math.pi, math.pi, 101)
    series = a[0] + np.cos(np.outer(x, np.arange(1, 2001))) @ a[1:]
    np.testing.assert_allclose(series, auxiliary_H(x), atol=2.0 * tail_abs_sum_bound(2000))


def test_functionals():
    assert partial_a_functional(0.5, 0) == 0.0
    a_n, f_n = coefficient_functionals(ShiftParameters(lam=0.5, n=50))
    assert a_n + f_n == pytest.approx(0.75, abs=1e-15)
    a_inf, f = limit_functionals(0.5)
    assert a_inf == pytest.approx(a_n, abs=1e-15)
    assert 0.0 < f < 1.0


def test_functional_reference_value():
    a_2, f_2 = coefficient_functionals(ShiftParameters(lam=1.0, n=2))
    expected = -(4.0 / (3.0 * math.pi) * math.exp(-1.0) - 0.25 * math.exp(-4.0))
    assert a_2 == pytest.approx(expected, rel=1e-14)
    assert a_2 == pytest.approx(-0.151554, abs=1e-6)
    assert f_2 == pytest.approx(0.75 - expected, rel=1e-14)


def test_functional_underflows_for_wide_spacing():
    a_n, f_n = coefficient_functionals(ShiftParameters(lam=100.0, n=5))
    assert abs(a_n) < 1e-300
    assert f_n == 0.75


@given(st.floats(min_value=0.05, max_value=3.0), st.integers(min_value=0, max_value=300))
def test_functional_steps_bounded_by_next_term(lam, n):
    step = partial_a_functional(lam, n + 1) - partial_a_functional(lam, n)
    bound = abs(cosine_coefficient(n + 1)) * math.exp(-((lam * (n + 1)) ** 2))
    assert abs(step) <= bound + 1e-15


def test_limit_functional_large_lambda():
    _, f = limit_functionals(8.0)
    assert f == pytest.approx(0.75, abs=1e-20)


def test_shift_parameters_validation():
    assert ShiftParameters.model_validate({"lambda": 0.5, "n": 3}).lam == 0.5
    with pytest.raises(ValidationError):
        ShiftParameters(lam=0.0, n=3)
    with pytest.raises(ValidationError):
        ShiftParameters(lam=0.5, n=0)
    with pytest.raises(ValidationError):
        ShiftParameters(lam=float("inf"), n=3)
