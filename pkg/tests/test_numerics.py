import math

import mpmath as mp
import numpy as np
import pytest

from excursions.numerics import (
    DomainError,
    RandomStream,
    TabulatedIntegral,
    binom_half,
    binom_half_table,
    gamma_ln,
    gamma_ratio_half,
    gauss_legendre,
    integrate,
    laguerre_half,
    laguerre_half_all,
    sum_tail,
)


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 1.5, 2.5, 7.3, 20.0, 50.0, 171.5])
def test_gamma_ln_against_mpmath(x):
    assert gamma_ln(x) == pytest.approx(float(mp.loggamma(x)), rel=1e-13, abs=1e-14)


def test_gamma_ln_vectorised_and_reflection():
    xs = np.array([0.05, 0.3, 0.5, 3.0])
    ref = [float(mp.loggamma(x)) for x in xs]
    np.testing.assert_allclose(gamma_ln(xs), ref, rtol=1e-13)
    assert isinstance(gamma_ln(2.0), float)


def test_gamma_ln_rejects_nonpositive():
    with pytest.raises(DomainError):
        gamma_ln(0.0)
    with pytest.raises(DomainError):
        gamma_ln(np.array([1.0, -2.0]))


@pytest.mark.parametrize("n", [0, 1, 2, 5, 50, 199, 200, 201, 1000, 10**6])
def test_binom_half_against_mpmath(n):
    ref = float(mp.binomial(n + mp.mpf(1) / 2, n))
    assert binom_half(n) == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize("z", [1e-6, 0.3, 1.0, 149.9, 150.0, 2.5e3, 1e9, 5e12])
def test_gamma_ratio_half_against_mpmath(z):
    ref = float(mp.gamma(mp.mpf(z) + 0.5) / mp.gamma(z))
    assert gamma_ratio_half(z) == pytest.approx(ref, rel=2e-15)


def test_gamma_ratio_half_domain():
    with pytest.raises(DomainError):
        gamma_ratio_half(0.0)
    with pytest.raises(DomainError):
        gamma_ratio_half(np.nan)


def test_binom_half_small_values():
    assert binom_half(0) == 1.0
    assert binom_half(1) == pytest.approx(1.5)
    assert binom_half(2) == pytest.approx(1.875)


def test_binom_half_table_matches_pointwise():
    table = binom_half_table(300)
    np.testing.assert_allclose(table, binom_half(np.arange(300)), rtol=1e-13)


@pytest.mark.parametrize("n", [0, 1, 3, 10, 40])
@pytest.mark.parametrize("x", [0.0, 0.25, 1.0, 4.0])
def test_laguerre_half_against_mpmath(n, x):
    ref = float(mp.laguerre(n, 0.5, x))
    assert laguerre_half(n, x) == pytest.approx(ref, rel=1e-11, abs=1e-12)


def test_laguerre_half_all_shape():
    x = np.array([[0.1, 0.2], [0.3, 0.4]])
    out = laguerre_half_all(7, x)
    assert out.shape == (7, 2, 2)
    assert out[3, 1, 0] == pytest.approx(laguerre_half(3, 0.3))


def test_integrate_plain_and_infinite():
    q = integrate(lambda x: math.exp(-x), 0.0, math.inf)
    assert q.converged
    assert q.value == pytest.approx(1.0, abs=1e-12)
    q = integrate(lambda x: 1.0 / (1.0 + x * x), -math.inf, math.inf)
    assert q.value == pytest.approx(math.pi, abs=1e-10)


def test_integrate_inverse_sqrt_endpoints():
    # int_0^1 x^{-1/2} (1-x)^{-1/2} dx = pi
    f = lambda x: 1.0 / math.sqrt(x * (1.0 - x))
    q = integrate(f, 0.0, 1.0, singular="both")
    assert q.converged
    assert q.value == pytest.approx(math.pi, abs=1e-11)
    q = integrate(lambda x: x ** -0.5, 0.0, 4.0, singular="lower")
    assert q.value == pytest.approx(4.0, abs=1e-11)
    q = integrate(lambda x: (4.0 - x) ** -0.5, 0.0, 4.0, singular="upper")
    assert q.value == pytest.approx(4.0, abs=1e-11)


def test_integrate_reports_nonconvergence():
    q = integrate(lambda x: math.sin(1.0 / x) / x, 1e-8, 1.0, tol=1e-14, limit=20)
    assert not q.converged


def test_integrate_rejects_bad_flag():
    with pytest.raises(DomainError):
        integrate(math.exp, 0.0, 1.0, singular="middle")


def test_gauss_legendre_exact_for_polynomials():
    nodes, weights = gauss_legendre(10)
    assert weights.sum() == pytest.approx(1.0)
    assert (weights * nodes ** 19).sum() == pytest.approx(1.0 / 20.0, rel=1e-13)


def test_tabulated_integral_of_sqrt_singular_density():
    # density of Gamma(1/2, 1): x^{-1/2} e^{-x} / sqrt(pi); cdf = erf(sqrt(x))
    f = lambda x: np.exp(-x) / np.sqrt(np.pi * x)
    cdf = TabulatedIntegral(f, x_max=40.0, total=1.0)
    xs = np.array([0.0, 1e-6, 0.3, 1.0, 5.0, 39.0, 45.0])
    ref = [math.erf(math.sqrt(x)) for x in xs]
    np.testing.assert_allclose(cdf(xs), ref, atol=1e-12)
    assert cdf(1.0) == pytest.approx(math.erf(1.0), abs=1e-12)


def test_sum_tail_geometric():
    out = sum_tail(lambda n: 0.5 ** n, tol=1e-12, max_terms=200, ratio=0.5)
    assert out.converged
    assert out.value == pytest.approx(2.0, abs=1e-12)
    assert out.abs_error_estimate <= 1e-12


def test_sum_tail_power_law_and_budget():
    out = sum_tail(lambda n: 1.0 / (n + 1) ** 2, tol=1e-3, max_terms=10_000, power=2.0)
    assert out.converged
    assert out.value == pytest.approx(math.pi ** 2 / 6, abs=2e-3)
    assert not sum_tail(lambda n: 1.0 / (n + 1) ** 2, tol=1e-12, max_terms=100, power=2.0).converged


def test_sum_tail_flags_broken_envelope():
    out = sum_tail(lambda n: 0.9 ** n, tol=1e-12, max_terms=1000, ratio=0.5)
    assert not out.converged


def test_sum_tail_needs_one_envelope():
    with pytest.raises(DomainError):
        sum_tail(lambda n: 1.0, tol=1e-3, max_terms=10)


def test_random_stream_reproducible_and_independent():
    a = RandomStream(42, 0).draw_normal(10)
    b = RandomStream(42, 0).draw_normal(10)
    c = RandomStream(42, 1).draw_normal(10)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)


def test_random_stream_uniform_open_interval_and_arcsine():
    s = RandomStream(1)
    u = s.draw_uniform(200_000)
    assert u.min() > 0.0 and u.max() < 1.0
    a = s.draw_arcsine(200_000)
    # arcsine law: mean 1/2, variance 1/8
    assert a.mean() == pytest.approx(0.5, abs=5e-3)
    assert a.var() == pytest.approx(0.125, abs=3e-3)
    e = s.draw_exponential(2.0, 200_000)
    assert e.mean() == pytest.approx(0.5, abs=5e-3)
    with pytest.raises(DomainError):
        s.draw_exponential(0.0)
