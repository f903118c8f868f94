import math

import numpy as np
import pytest

from carleman.errors import NonFiniteError
from carleman.quadrature import gauss_legendre, integrate, integrate_with_error


def test_weights_sum_to_interval_length():
    for n in (3, 8, 33):
        for a, b in ((0.0, 1.0), (0.0, math.pi), (-2.0, 5.0)):
            rule = gauss_legendre(n, a, b)
            assert np.sum(rule.weights) == pytest.approx(b - a, abs=1e-14)


def test_constant_on_unit_interval():
    rule = gauss_legendre(5)
    assert integrate(lambda t: np.ones_like(t), rule) == pytest.approx(1.0, abs=1e-15)


def test_cosine_over_zero_pi_vanishes():
    rule = gauss_legendre(20, 0.0, math.pi)
    assert integrate(np.cos, rule) == pytest.approx(0.0, abs=1e-14)


def test_matches_modified_bessel_integral_oracle():
    # (1/pi) int_0^pi e^{2 cos t} cos t dt = I_1(2); adaptive-refinement oracle
    # (mpmath.quad at 50 digits) gives:
    oracle = 1.5906368546373290650940733
    rule = gauss_legendre(60, 0.0, math.pi)
    val = integrate(lambda t: np.exp(2.0 * np.cos(t)) * np.cos(t), rule) / math.pi
    assert val == pytest.approx(oracle, rel=1e-12)


def test_polynomial_exactness_degree_2n_minus_1():
    rng = np.random.default_rng(7)
    for n in (4, 9, 16):
        coeffs = rng.normal(size=2 * n)  # degree 2n-1
        p = np.polynomial.Polynomial(coeffs)
        exact = p.integ()(1.0) - p.integ()(0.0)
        rule = gauss_legendre(n)
        got = integrate(p, rule)
        assert got == pytest.approx(exact, rel=1e-13, abs=1e-13)


def test_error_estimate_by_node_doubling():
    rule = gauss_legendre(8)
    val, err = integrate_with_error(lambda t: np.exp(np.sin(3.0 * t)), rule)
    ref = integrate(lambda t: np.exp(np.sin(3.0 * t)), gauss_legendre(200))
    assert abs(val - ref) <= max(err, 1e-13) * 10


def test_nonfinite_integrand_raises():
    rule = gauss_legendre(6)
    with pytest.raises(NonFiniteError):
        integrate(lambda t: np.full_like(t, np.nan), rule)


def test_complex_integrand():
    rule = gauss_legendre(24)
    val = integrate(lambda t: np.exp(2j * math.pi * t), rule)
    assert abs(val) < 1e-13
