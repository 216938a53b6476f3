import math

import mpmath as mp
import numpy as np
import pytest

from excursions.diffusion import OrnsteinUhlenbeck, ReflectedBrownianMotion
from excursions.localtime import (
    LevyCharacteristics,
    MixingMeasure,
    krein_mass_identity,
    krein_measure,
    levy_khintchine_exponent,
    nu,
    nu_spectral,
    nu_tail,
    phi,
    r00,
    r00_quadrature,
    subordinator_laplace,
)
from excursions.numerics import DomainError, integrate

from oracle_values import FROZEN

OU = OrnsteinUhlenbeck(1.0)
BM = ReflectedBrownianMotion()


def test_phi_values():
    assert phi(OU, 1.0) == pytest.approx(FROZEN["ou1_phi_1"], rel=1e-14)
    assert phi(OU, 2.0) == pytest.approx(FROZEN["ou1_phi_2"], rel=1e-14)
    assert phi(OrnsteinUhlenbeck(2.0), 1.0) == pytest.approx(FROZEN["ou2_phi_1"], rel=1e-14)
    assert phi(BM, 2.0) == pytest.approx(2.0)
    # gamma = 1: Phi(1) = 2 / sqrt(pi), Phi(2) = sqrt(pi)
    assert phi(OU, 1.0) == pytest.approx(2 / math.sqrt(math.pi), rel=1e-14)
    assert phi(OU, 2.0) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


def test_phi_domain():
    with pytest.raises(DomainError):
        phi(OU, 0.0)
    with pytest.raises(DomainError):
        phi(BM, -1.0)


@pytest.mark.parametrize("gamma", [1e-7, 0.5, 1.0, 3.0])
@pytest.mark.parametrize("lam", [1e-300, 1e-12, 0.01, 0.7, 4.0, 50.0, 1e6])
def test_phi_against_mpmath_gamma_ratio(gamma, lam):
    lam, g = mp.mpf(lam), mp.mpf(gamma)
    ref = 2 * mp.sqrt(g) * mp.gamma((lam + g) / (2 * g)) / mp.gamma(lam / (2 * g))
    assert phi(OrnsteinUhlenbeck(gamma), float(lam)) == pytest.approx(float(ref), rel=1e-13)


def test_phi_tends_to_bm_as_gamma_vanishes():
    assert phi(OrnsteinUhlenbeck(1e-7), 2.0) == pytest.approx(phi(BM, 2.0), rel=1e-6)


def test_phi_large_lambda_behaves_like_bm():
    assert phi(OU, 1e6) / phi(BM, 1e6) == pytest.approx(1.0, rel=1e-5)


@pytest.mark.parametrize("model", [OU, OrnsteinUhlenbeck(2.0), BM], ids=["ou1", "ou2", "bm"])
@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0, 5.0])
def test_green_value_quadrature(model, lam):
    q = r00_quadrature(model, lam)
    assert q.converged
    assert q.value * phi(model, lam) == pytest.approx(1.0, abs=1e-12)
    assert r00(model, lam) == pytest.approx(q.value, rel=1e-12)


@pytest.mark.parametrize("model", [OU, OrnsteinUhlenbeck(0.5), BM], ids=["ou1", "ou05", "bm"])
@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_levy_khintchine_matches_phi(model, lam):
    q = levy_khintchine_exponent(model, lam)
    assert q.converged
    assert q.value == pytest.approx(phi(model, lam), rel=1e-11)


def test_nu_values():
    assert nu(OU, 1.0) == pytest.approx(FROZEN["ou1_nu_1"], rel=1e-14)
    assert nu_tail(OU, 1.0) == pytest.approx(FROZEN["ou1_nu_tail_1"], rel=1e-14)
    assert nu(BM, 1.0) == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert nu_tail(BM, 2.0) == pytest.approx(1 / math.sqrt(math.pi))


def test_nu_extreme_arguments():
    assert nu(OU, 1e-12) / nu(BM, 1e-12) == pytest.approx(1.0, rel=1e-9)
    assert nu(OU, 400.0) > 0.0
    assert nu_tail(OU, 400.0) >= 0.0
    assert np.isfinite(nu_tail(OU, 1e-14))


@pytest.mark.parametrize("u", [0.05, 0.5, 2.0])
def test_nu_tail_is_integral_of_nu(u):
    q = integrate(lambda t: nu(OU, t), u, np.inf, tol=1e-13)
    assert q.value == pytest.approx(nu_tail(OU, u), rel=1e-11)


def test_nu_first_moment_is_total_speed_mass():
    q = integrate(lambda t: t * nu(OU, t), 0.0, np.inf, tol=1e-12)
    assert q.value == pytest.approx(math.sqrt(math.pi), rel=1e-10)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_nu_spectral(t):
    q = nu_spectral(OU, t)
    assert q.converged
    assert q.value == pytest.approx(nu(OU, t), rel=1e-12)


def test_nu_spectral_requires_ou():
    with pytest.raises(NotImplementedError):
        nu_spectral(BM, 1.0)


def test_subordinator_laplace():
    assert subordinator_laplace(OU, 0.0, 1.0) == 1.0
    assert subordinator_laplace(BM, 1.5, 2.0) == pytest.approx(math.exp(-3.0))
    with pytest.raises(DomainError):
        subordinator_laplace(OU, -1.0, 1.0)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_krein_reconstructs_nu(t):
    for model in (OU, OrnsteinUhlenbeck(2.0), BM):
        q = krein_measure(model).laplace(t)
        assert q.converged
        assert q.value == pytest.approx(nu(model, t), rel=1e-10)


def test_krein_first_atoms():
    M = krein_measure(OU)
    np.testing.assert_allclose(M.locations[:3], [1.0, 3.0, 5.0])
    np.testing.assert_allclose(M.weights[:3], [1.128379167095513, 1.692568750643269, 2.115710938304086],
                               rtol=1e-14)
    assert krein_measure(BM).density(2.0) == pytest.approx(2 / math.pi)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_krein_mass_identity(alpha):
    for model in (OU, OrnsteinUhlenbeck(0.5), BM):
        q = krein_mass_identity(model, alpha)
        assert q.converged
        assert q.value == pytest.approx(phi(model, alpha) / alpha, rel=1e-9)


def test_krein_mass_identity_bm_by_quadrature():
    q = krein_measure(BM).integrate(lambda z: 1.0 / (z * (z + 1.0)))
    assert q.value == pytest.approx(math.sqrt(2.0), rel=1e-10)


def test_krein_measure_tail_correction_matters():
    M = krein_measure(OU, n_atoms=1000)
    f = lambda z: 1.0 / (z * (z + 1.0))
    without = M.integrate(f, tail=False).value
    with_tail = M.integrate(f).value
    target = phi(OU, 1.0)
    assert abs(without - target) > 1e-3
    assert with_tail == pytest.approx(target, rel=1e-9)


def test_krein_conditions():
    for model in (OU, BM):
        integrable, divergent = krein_measure(model).krein_conditions()
        assert integrable and divergent


def test_mixing_measure_validation():
    with pytest.raises(DomainError):
        MixingMeasure(kind="atomic", locations=np.array([1.0, 1.0]), weights=np.array([1.0, 1.0]))
    with pytest.raises(DomainError):
        MixingMeasure(kind="atomic", locations=np.array([1.0]), weights=np.array([-1.0]))
    with pytest.raises(DomainError):
        MixingMeasure(kind="density")
    with pytest.raises(DomainError):
        MixingMeasure(kind="other")


def test_levy_characteristics_bundle():
    lc = LevyCharacteristics.of(OU, n_atoms=100)
    assert lc.nu(1.0) == nu(OU, 1.0)
    assert lc.phi(1.0) * lc.r00(1.0) == pytest.approx(1.0)
    assert lc.krein.n_atoms == 100
