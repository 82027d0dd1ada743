import math

import numpy as np
import pytest

from src.services.coefficient_service import ShiftParameters, coefficient_functionals, cosine_coefficients
from src.services.kernel_service import (
    GAUSSIAN_DERIVATIVE_SUP,
    GAUSSIAN_THIRD_DERIVATIVE_SUP,
    SQRT_2PI,
    TranslateNetwork,
    analytic_fourier_transform,
    band_radius,
    canonical_witness,
    evaluate,
    evaluate_derivative,
    evaluate_second_derivative,
    fejer,
    fejer_hat,
    fejer_scaled,
    gaussian_hat,
    trig_polynomial_T,
)
from src.services.quadrature_service import integrate


@pytest.mark.parametrize("lam,n", [(0.3, 5), (0.5, 64), (0.9, 200), (1.5, 1)])
def test_witness_vanishes_at_origin(lam, n):
    net = canonical_witness(ShiftParameters(lam=lam, n=n))
    assert abs(float(evaluate(net, 0.0))) <= 1e-12
    assert net.is_symmetric()
    assert len(net.shifts) == 2 * n + 1


def test_witness_centre_coefficient():
    p = ShiftParameters(lam=0.7, n=10)
    net = canonical_witness(p)
    a_n, _ = coefficient_functionals(p)
    assert net.as_mapping()[0] == pytest.approx(2.0 * a_n, rel=1e-15)
    assert net.as_mapping()[2] == -0.25
    assert net.as_mapping()[-2] == -0.25


def test_witness_transform_is_twice_gaussian_times_T():
    p = ShiftParameters(lam=0.6, n=30)
    profile = analytic_fourier_transform(canonical_witness(p))
    omega = np.linspace(-20.0, 20.0, 401)
    np.testing.assert_allclose(profile(omega), 2.0 * gaussian_hat(omega) * trig_polynomial_T(p, omega), atol=1e-13)
    assert profile.is_real


def test_T_plus_F_is_partial_cosine_sum():
    p = ShiftParameters(lam=0.8, n=40)
    _, f_n = coefficient_functionals(p)
    a = cosine_coefficients(40)
    omega = np.linspace(-6.0, 6.0, 61)
    partial = np.cos(np.outer(omega, 0.8 * np.arange(41))) @ a
    np.testing.assert_allclose(trig_polynomial_T(p, omega) + f_n, partial, atol=1e-14)


def test_gaussian_transform_matches_quadrature():
    result = integrate(lambda x: math.exp(-x * x) * math.cos(x), -12.0, 12.0, epsabs=1e-13)
    assert result.value / SQRT_2PI == pytest.approx(float(gaussian_hat(1.0)), abs=1e-12)
    assert float(gaussian_hat(0.0)) == pytest.approx(1.0 / math.sqrt(2.0))


def test_fejer_values():
    assert float(fejer(0.0)) == pytest.approx(1.0 / SQRT_2PI, rel=1e-15)
    assert float(fejer(2.0 * math.pi)) == pytest.approx(0.0, abs=1e-16)
    assert float(fejer_hat(0.5)) == 0.5
    assert float(fejer_hat(-2.0)) == 0.0
    assert float(fejer_scaled(3.0, 0.0)) == pytest.approx(3.0 / SQRT_2PI)
    with pytest.raises(ValueError):
        fejer_scaled(0.0, 1.0)


def test_derivative_constants():
    single = TranslateNetwork(1.0, np.array([0]), np.array([1.0]))
    assert float(evaluate_derivative(single, -1.0 / math.sqrt(2.0))) == pytest.approx(GAUSSIAN_DERIVATIVE_SUP)
    assert float(evaluate_second_derivative(single, 0.0)) == -2.0
    x = np.linspace(-4.0, 4.0, 80001)
    third = np.abs((12.0 * x - 8.0 * x**3) * np.exp(-x * x))
    assert float(np.max(third)) == pytest.approx(GAUSSIAN_THIRD_DERIVATIVE_SUP, rel=1e-6)


def test_evaluate_shapes():
    net = TranslateNetwork.from_mapping(0.5, {-1: 1.0, 3: -2.0})
    assert np.ndim(evaluate(net, 0.3)) == 0
    grid = np.zeros((3, 4))
    assert evaluate(net, grid).shape == (3, 4)
    expected = math.exp(-(0.3 + 0.5) ** 2) - 2.0 * math.exp(-(0.3 - 1.5) ** 2)
    assert float(evaluate(net, 0.3)) == pytest.approx(expected, rel=1e-14)


def test_network_validation():
    with pytest.raises(ValueError):
        TranslateNetwork(0.0, np.array([0]), np.array([1.0]))
    with pytest.raises(ValueError):
        TranslateNetwork(1.0, np.array([0, 1]), np.array([1.0]))
    with pytest.raises(ValueError):
        TranslateNetwork(1.0, np.array([2, 2]), np.array([1.0, 1.0]))


def test_network_sorts_and_freezes():
    net = TranslateNetwork(0.5, np.array([3, -1]), np.array([2.0, 1.0]))
    assert net.shifts.tolist() == [-1, 3]
    assert net.coefficients.tolist() == [1.0, 2.0]
    with pytest.raises(ValueError):
        net.coefficients[0] = 5.0
    assert net.max_shift == 3
    assert net.coefficient_l1 == 3.0
    assert net.scaled(-2.0).coefficient_l2_squared == 20.0


def test_payload_form():
    net = TranslateNetwork.from_mapping(0.25, {0: 1.5, -2: 0.5})
    assert net.to_payload() == {"lambda": 0.25, "coefficients": [[-2, 0.5], [0, 1.5]]}
    assert TranslateNetwork.from_payload(net.to_payload()).as_mapping() == net.as_mapping()


def test_band_radius():
    assert band_radius(0.0) == 1.0
    r = band_radius(10.0)
    assert 10.0 * math.exp(-r * r / 4.0) / math.sqrt(2.0) == pytest.approx(1e-15, rel=1e-9)


def test_asymmetric_profile_is_complex():
    net = TranslateNetwork.from_mapping(0.5, {1: 1.0})
    profile = analytic_fourier_transform(net)
    assert not profile.is_real
    omega = np.linspace(-5.0, 5.0, 11)
    values = profile(omega)
    assert np.iscomplexobj(values)
    np.testing.assert_allclose(np.abs(values), gaussian_hat(omega), rtol=1e-14)
    np.testing.assert_allclose(values, gaussian_hat(omega) * np.exp(-0.5j * omega), rtol=1e-14)


def test_tail_mass_bounds_integral():
    net = canonical_witness(ShiftParameters(lam=0.7, n=8))
    profile = analytic_fourier_transform(net)
    radius = 6.0
    outside = integrate(lambda w: abs(float(profile(w))), radius, 40.0, epsabs=1e-12, epsrel=1e-8, limit=2000)
    assert 2.0 * outside.value <= profile.tail_mass(radius)


@pytest.mark.parametrize("lam", [0.3, 1.0])
def test_analytic_transform_matches_quadrature(lam, random_network):
    net = random_network(lam, reach=10)
    profile = analytic_fourier_transform(net)
    reach = 10.0 * lam + 8.0
    breaks = [float(c) for c in net.centers]
    for omega in np.linspace(-7.5, 7.5, 20):
        real = integrate(
            lambda x: float(evaluate(net, x)) * math.cos(omega * x), -reach, reach, epsabs=1e-10, epsrel=1e-12, points=breaks
        )
        imag = integrate(
            lambda x: -float(evaluate(net, x)) * math.sin(omega * x), -reach, reach, epsabs=1e-10, epsrel=1e-12, points=breaks
        )
        expected = complex(profile(omega))
        assert real.value / SQRT_2PI == pytest.approx(expected.real, abs=1e-8)
        assert imag.value / SQRT_2PI == pytest.approx(expected.imag, abs=1e-8)


def test_derivative_matches_central_differences(rng, random_network):
    step = 1e-5
    for net in (random_network(0.5, reach=10), canonical_witness(ShiftParameters(lam=0.7, n=20))):
        x = rng.uniform(-8.0, 8.0, size=20)
        central = (evaluate(net, x + step) - evaluate(net, x - step)) / (2.0 * step)
        np.testing.assert_allclose(evaluate_derivative(net, x), central, atol=1e-7)


@pytest.mark.parametrize("r", [0.5, 2.0])
def test_scaled_fejer_has_unit_mass(r):
    # Gauss-Legendre on each period of sin^2(x/2) in x = r t, then the 1/x^2 tail in closed form
    nodes, weights = np.polynomial.legendre.leggauss(24)
    periods = 400
    left = 2.0 * np.pi * np.arange(periods) / r
    half = np.pi / r
    t = (left[:, None] + half * (nodes[None, :] + 1.0)).ravel()
    body = 2.0 * half * float(np.sum(np.tile(weights, periods) * fejer_scaled(r, t)))
    edge = 2.0 * np.pi * periods
    # int_{|x| > X} h(x) dx = (4/sqrt(2 pi)) (1/X - int_X^inf cos(x)/x^2 dx), the second term below 2/X^2
    tail = 4.0 / (SQRT_2PI * edge)
    assert (body + tail) / SQRT_2PI == pytest.approx(1.0, abs=1e-6)


def test_T_is_periodic():
    p = ShiftParameters(lam=0.7, n=40)
    omega = np.linspace(-5.0, 5.0, 41)
    np.testing.assert_allclose(trig_polynomial_T(p, omega + 2.0 * math.pi / p.lam), trig_polynomial_T(p, omega), atol=1e-11)


def test_T_reference_value():
    p = ShiftParameters(lam=1.0, n=2)
    expected = 4.0 / (3.0 * math.pi) * (-1.0 - math.exp(-1.0)) - 0.25 * (1.0 - math.exp(-4.0))
    assert float(trig_polynomial_T(p, math.pi)) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(-0.825967, abs=1e-6)


def test_witness_reference_coefficients():
    net = canonical_witness(ShiftParameters(lam=1.0, n=2))
    mapping = net.as_mapping()
    centre = -2.0 * (4.0 / (3.0 * math.pi) * math.exp(-1.0) - 0.25 * math.exp(-4.0))
    assert mapping[0] == pytest.approx(centre, rel=1e-14)
    assert mapping[0] == pytest.approx(-0.303108, abs=1e-6)
    assert mapping[1] == pytest.approx(4.0 / (3.0 * math.pi), rel=1e-15)
    assert mapping[-2] == -0.25


@pytest.mark.parametrize("lam,n", [(0.4, 30), (0.9, 7), (1.3, 100)])
def test_witness_is_even(lam, n, rng):
    net = canonical_witness(ShiftParameters(lam=lam, n=n))
    x = rng.uniform(-30.0, 30.0, size=50)
    np.testing.assert_allclose(evaluate(net, x), evaluate(net, -x), rtol=0.0, atol=1e-14)
