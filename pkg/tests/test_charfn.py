import numpy as np
import pytest
from scipy import integrate

from app.core.exceptions import DomainError
from app.models.params import ModelParams, Variant
from app.services.charfn import (
    CharFnQuery,
    atom_probability,
    conditional_mean,
    conditional_variance,
    eps_factor,
    kappa_integral,
    phi,
    phi_eps,
    phi_tail_magnitude_gamma,
    phi_values,
)
from app.services.levy_model import kappa

ZETAS = np.array([0.0 + 0.0j, 3.0 + 0.0j, -25.0 + 0.0j, 0.0 - 1.75j, 40.0 - 1.75j, -300.0 - 5.0j, 7.0 + 2.0j])


def _log_oracle(params: ModelParams, delta: float, zeta: np.ndarray) -> np.ndarray:
    """Formas cerradas con la rama principal: a(Log(b − iζx₀) − Log(b − iζ)) y su análoga IG"""
    a, b = params.a, params.b
    x0 = np.exp(-params.lambda_ * delta)
    if params.variant is Variant.GAMMA_OU:
        return a * (np.log(b - 1j * zeta * x0) - np.log(b - 1j * zeta))
    return a * (np.sqrt(b * b - 2j * zeta * x0) - np.sqrt(b * b - 2j * zeta))


@pytest.mark.parametrize("variant", [Variant.GAMMA_OU, Variant.IG_OU])
@pytest.mark.parametrize("t", [0.0, 0.5, 0.98])
def test_kappa_integral_matches_closed_forms(variant, t):
    params = ModelParams(variant=variant)
    values = kappa_integral(params, t, 1.0, ZETAS)
    expected = _log_oracle(params, 1.0 - t, ZETAS)
    np.testing.assert_allclose(values, expected, rtol=1e-10, atol=1e-12)


def test_kappa_integral_vanishes_at_maturity(gamma_params):
    assert kappa_integral(gamma_params, 1.0, 1.0, 5.0 - 1.0j) == 0


def test_kappa_integral_domain(gamma_params):
    with pytest.raises(DomainError):
        kappa_integral(gamma_params, 0.0, 1.0, 1.0 - 12.0j)
    with pytest.raises(DomainError):
        kappa_integral(gamma_params, 0.5, 0.2, 1.0)


@pytest.mark.parametrize("variant", [Variant.GAMMA_OU, Variant.IG_OU])
def test_phi_at_zero_and_conjugate_symmetry(variant):
    params = ModelParams(variant=variant)
    assert phi(params, CharFnQuery(t=0.0, T=1.0, sigma_sq_t=0.0145, zeta=0j)) == pytest.approx(1.0)
    zeta = np.array([2.0 - 1.0j, -60.0 - 0.3j])
    left = phi_values(params, 0.0, 1.0, 0.0145, -np.conj(zeta))
    right = np.conj(phi_values(params, 0.0, 1.0, 0.0145, zeta))
    np.testing.assert_allclose(left, right, rtol=1e-12)


@pytest.mark.parametrize("variant", [Variant.GAMMA_OU, Variant.IG_OU])
def test_conditional_moments_match_phi_derivatives(variant):
    params = ModelParams(variant=variant)
    h = 1e-3
    plus = phi_values(params, 0.2, 1.0, 0.0145, h)
    minus = phi_values(params, 0.2, 1.0, 0.0145, -h)
    mean = ((plus - minus) / (2j * h)).real
    second = -((plus - 2.0 + minus) / h ** 2).real
    assert conditional_mean(params, 0.2, 1.0, 0.0145) == pytest.approx(mean, rel=1e-5)
    variance = second - mean ** 2
    assert conditional_variance(params, 0.2, 1.0) == pytest.approx(variance, rel=1e-3)


def test_phi_eps_adds_gaussian_factor(gamma_params):
    query = CharFnQuery(t=0.0, T=1.0, sigma_sq_t=0.0145, zeta=100.0 - 1.75j)
    ratio = phi_eps(gamma_params, query, 0.01) / phi(gamma_params, query)
    assert ratio == pytest.approx(np.exp(-0.5 * query.zeta ** 2 * 0.01 ** 2))
    assert eps_factor(0.0, 0.5, 1.0) == 1.0
    with pytest.raises(DomainError):
        phi_eps(gamma_params, query, 0.0)


@pytest.mark.parametrize("t", [0.0, 0.5])
def test_gamma_tail_magnitude_closed_form(gamma_params, t):
    alpha = 1.75
    v = np.linspace(-100.0, 100.0, 401)
    magnitude = np.abs(np.exp(kappa_integral(gamma_params, t, 1.0, v - 1j * alpha)))
    np.testing.assert_allclose(
        phi_tail_magnitude_gamma(gamma_params, t, 1.0, v, alpha), magnitude, rtol=0, atol=1e-10
    )


def test_gamma_tail_magnitude_tends_to_atom(gamma_params):
    far = phi_tail_magnitude_gamma(gamma_params, 0.0, 1.0, 1e8, 1.75)
    assert far == pytest.approx(atom_probability(gamma_params, 0.0, 1.0), rel=1e-6)


def test_gamma_tail_magnitude_rejects_ig(ig_params):
    with pytest.raises(DomainError):
        phi_tail_magnitude_gamma(ig_params, 0.0, 1.0, 1.0, 1.75)


def test_ig_phi_decays(ig_params):
    values = np.abs(phi_values(ig_params, 0.0, 1.0, 0.0145, np.array([10.0, 1e3, 1e5])))
    assert values[0] > values[1] > values[2]
    assert values[2] < 1e-6
    assert atom_probability(ig_params, 0.0, 1.0) == 0.0


def test_charfn_query_validation():
    with pytest.raises(ValueError):
        CharFnQuery(t=0.8, T=0.5, sigma_sq_t=0.0145)
    assert CharFnQuery(t=0.25, T=1.0, sigma_sq_t=0.0145).delta == pytest.approx(0.75)


@pytest.mark.parametrize("variant", [Variant.GAMMA_OU, Variant.IG_OU])
def test_phi_modulus_is_bounded_on_the_real_line(variant):
    params = ModelParams(variant=variant)
    far = np.geomspace(1e3, 1e6, 200)
    v = np.concatenate([np.linspace(-500.0, 500.0, 2001), far, -far])
    for t in (0.0, 0.5, 0.98):
        magnitude = np.abs(phi_values(params, t, 1.0, 0.0145, v))
        assert np.all(magnitude <= 1.0 + 1e-12)


def test_ig_log_modulus_decays_like_square_root(ig_params):
    # log|φ(v)| ≈ −a(1 − e^{−λΔ/2})√v + O(1) para Δ = 1
    v = np.geomspace(1e4, 1e6, 60)
    log_modulus = kappa_integral(ig_params, 0.0, 1.0, v).real
    slope, _ = np.polyfit(np.sqrt(v), log_modulus, 1)
    expected = -ig_params.a * (1.0 - np.exp(-ig_params.lambda_ / 2.0))
    assert slope == pytest.approx(expected, rel=2e-2)


@pytest.mark.parametrize("variant", [Variant.GAMMA_OU, Variant.IG_OU])
@pytest.mark.parametrize("t", [0.0, 0.6])
def test_kappa_integral_matches_numerical_time_integral(variant, t):
    params = ModelParams(variant=variant)
    T = 1.0
    for zeta in ZETAS:

        def integrand(s: float, part: str) -> float:
            value = kappa(params, 1j * zeta * np.exp(-params.lambda_ * (T - s)))
            return value.real if part == "real" else value.imag

        real, _ = integrate.quad(integrand, t, T, args=("real",), epsabs=1e-13, epsrel=1e-12, limit=200)
        imag, _ = integrate.quad(integrand, t, T, args=("imag",), epsabs=1e-13, epsrel=1e-12, limit=200)
        value = kappa_integral(params, t, T, zeta)
        assert value == pytest.approx(complex(real, imag), rel=1e-9, abs=1e-11)
