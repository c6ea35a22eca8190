import math

import numpy as np
import pytest
from numpy.polynomial.hermite import hermgauss, hermval

from coupled_oscillator.errors import ConvergenceFailure
from coupled_oscillator.special import (
    gauss_hermite,
    hermite_function,
    hermite_functions,
    hermite_poly,
    log_factorial,
)


def series_hermite(n, x):
    # explicit sum n! sum_m (-1)^m (2x)^(n-2m) / (m! (n-2m)!)
    return sum(
        (-1) ** m * math.factorial(n) / (math.factorial(m) * math.factorial(n - 2 * m))
        * (2 * x) ** (n - 2 * m)
        for m in range(n // 2 + 1)
    )


def test_low_order_polynomials():
    x = np.linspace(-2, 2, 9)
    assert np.allclose(hermite_poly(0, x), 1)
    assert np.allclose(hermite_poly(1, x), 2 * x)
    assert np.allclose(hermite_poly(2, x), 4 * x**2 - 2)
    assert np.allclose(hermite_poly(3, x), 8 * x**3 - 12 * x)


def test_h10_at_zero():
    assert hermite_poly(10, 0.0) == -30240.0


@pytest.mark.parametrize("n", [4, 7, 12, 20])
def test_recurrence_against_series_and_numpy(n):
    x = np.array([-1.7, -0.3, 0.0, 0.9, 2.2])
    coeffs = np.zeros(n + 1)
    coeffs[n] = 1
    assert np.allclose(hermite_poly(n, x), [series_hermite(n, v) for v in x], rtol=1e-12)
    assert np.allclose(hermite_poly(n, x), hermval(x, coeffs), rtol=1e-12)


def test_negative_order_rejected():
    with pytest.raises(ValueError):
        hermite_poly(-1, 0.0)
    with pytest.raises(ValueError):
        hermite_functions(-1, 0.0)


def test_functions_match_polynomial_definition():
    x = np.linspace(-5, 5, 41)
    h = hermite_functions(15, x)
    for n in range(16):
        ref = hermite_poly(n, x) * np.exp(-x**2 / 2) / (math.pi**0.25 * math.sqrt(2.0**n * math.factorial(n)))
        assert np.allclose(h[n], ref, rtol=1e-12, atol=1e-15)


def test_parity():
    x = np.linspace(0.1, 6, 30)
    h_pos = hermite_functions(30, x)
    h_neg = hermite_functions(30, -x)
    for n in range(31):
        assert np.allclose(h_neg[n], (-1) ** n * h_pos[n], rtol=1e-13, atol=0)


def test_orthonormality_by_fine_trapezoid():
    # independent of the quadrature module
    x = np.linspace(-15, 15, 6001)
    h = hermite_functions(12, x)
    gram = np.trapezoid(h[:, None, :] * h[None, :, :], x, axis=2)
    assert np.max(np.abs(gram - np.eye(13))) < 1e-12


def test_high_order_stays_finite():
    assert abs(hermite_function(200, 0.0)) < 1
    v = hermite_functions(1000, np.array([40.0, -40.0, 0.0, 44.0]))
    assert np.all(np.isfinite(v))
    # inside the oscillatory region |h_n| <= ~1 (Cramer-type bound 0.8163...)
    assert np.max(np.abs(v)) < 1


def test_deep_tail_underflows_to_zero_not_nan():
    v = hermite_function(3, 60.0)
    assert v == 0.0 or abs(v) < 1e-300


def test_gauss_hermite_small_cases():
    r1 = gauss_hermite(1)
    assert r1.nodes.tolist() == [0.0]
    assert r1.weights[0] == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    r2 = gauss_hermite(2)
    assert np.allclose(r2.nodes, [-1 / math.sqrt(2), 1 / math.sqrt(2)], rtol=1e-15)
    assert np.allclose(r2.weights, [math.sqrt(math.pi) / 2] * 2, rtol=1e-14)


@pytest.mark.parametrize("k", [3, 10, 31, 64, 100])
def test_gauss_hermite_against_numpy(k):
    x_ref, w_ref = hermgauss(k)
    rule = gauss_hermite(k)
    assert np.allclose(rule.nodes, x_ref, rtol=0, atol=1e-13)
    assert np.allclose(rule.weights, w_ref, rtol=1e-11, atol=1e-300)
    assert np.all(rule.weights > 0)


@pytest.mark.parametrize("k", [1, 2, 5, 64, 200, 512])
def test_gauss_hermite_structure(k):
    rule = gauss_hermite(k)
    assert abs(rule.weights.sum() - math.sqrt(math.pi)) < 1e-12
    assert np.all(np.diff(rule.nodes) > 0)
    assert np.array_equal(rule.nodes, -rule.nodes[::-1])


@pytest.mark.parametrize("k", [4, 9, 20])
def test_gauss_hermite_moment_exactness(k):
    # int x^(2j) exp(-x^2) dx = Gamma(j + 1/2), exact up to degree 2k - 1
    # odd moments cancel exactly, so the error scale is sum |w x^deg|
    rule = gauss_hermite(k)
    for deg in range(2 * k):
        got = rule.integrate(lambda t: t**deg)
        want = 0.0 if deg % 2 else math.gamma(deg / 2 + 0.5)
        scale = rule.integrate(lambda t: np.abs(t) ** deg)
        assert abs(got - want) <= 1e-13 * scale


def test_gauss_hermite_rule_is_read_only():
    rule = gauss_hermite(8)
    with pytest.raises(ValueError):
        rule.nodes[0] = 1.0


def test_gauss_hermite_bounds():
    with pytest.raises(ValueError):
        gauss_hermite(0)
    with pytest.raises(ValueError):
        gauss_hermite(513)


def test_gauss_hermite_reports_non_convergence():
    with pytest.raises(ConvergenceFailure):
        gauss_hermite(40, tol=0.0, max_iter=1)


def test_integrate_plain_orthonormality():
    rule = gauss_hermite(64)
    h = hermite_functions(40, rule.nodes)
    gram = (h * rule.weights * np.exp(rule.nodes**2)) @ h.T
    assert np.max(np.abs(gram - np.eye(41))) < 1e-10
    assert rule.integrate_plain(lambda t: hermite_function(5, t) ** 2) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("n", [0, 1, 2, 10, 170, 500, 1024, 1025, 5000])
def test_log_factorial(n):
    want = math.lgamma(n + 1)
    if n <= 1024:
        want_exact = math.fsum(math.log(k) for k in range(2, n + 1))
        assert log_factorial(n) == pytest.approx(want_exact, rel=1e-15, abs=1e-15)
    assert log_factorial(n) == pytest.approx(want, rel=1e-14, abs=1e-15)


def test_log_factorial_negative():
    with pytest.raises(ValueError):
        log_factorial(-1)
