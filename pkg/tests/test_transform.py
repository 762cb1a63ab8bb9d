import numpy as np
import pytest
from scipy import special

from app.core.exceptions import DomainError
from app.services.transform import (
    PayoffTransformQuery,
    erfc_complex,
    erfcx_complex,
    g_hat,
    g_hat_reduced,
    g_hat_values,
    validate_strike,
)
from app.services.validation_service import g_hat_by_quadrature


def test_erfc_complex_on_real_axis():
    x = np.linspace(-4.0, 6.0, 41)
    np.testing.assert_allclose(erfc_complex(x).real, special.erfc(x), rtol=1e-13, atol=1e-300)
    np.testing.assert_allclose(erfc_complex(x).imag, 0.0, atol=1e-15)


def test_erfc_complex_reflection_and_scaling():
    z = np.array([0.3 + 2.0j, -1.5 + 0.7j, 4.0 - 3.0j, 0.1 + 1.0j])
    np.testing.assert_allclose(erfc_complex(z) + erfc_complex(-z), 2.0, rtol=1e-13)
    right = z[z.real > 0]
    np.testing.assert_allclose(
        erfcx_complex(right), np.exp(right ** 2) * erfc_complex(right), rtol=1e-12
    )


def test_erfcx_large_argument_does_not_overflow():
    value = erfcx_complex(300.0 - 300.0j)
    assert np.isfinite(value)
    assert value == pytest.approx(1.0 / (np.sqrt(np.pi) * (300.0 - 300.0j)), rel=1e-4)


def test_validate_strike(coeffs):
    validate_strike(0.0, coeffs)
    validate_strike(coeffs.sqrt_c_v, coeffs)
    with pytest.raises(DomainError, match="√C_V"):
        validate_strike(0.5 * coeffs.sqrt_c_v, coeffs)
    with pytest.raises(ValueError):
        PayoffTransformQuery(v=0.0, alpha=1.75, K=0.1, coeffs=coeffs)


def test_g_hat_conjugate_symmetry(coeffs):
    v = np.array([0.5, 3.0, 75.0, 2e4])
    np.testing.assert_allclose(
        g_hat_values(-v, 1.75, 0.2, coeffs), np.conj(g_hat_values(v, 1.75, 0.2, coeffs)), rtol=1e-13
    )


def test_g_hat_futures_transform_at_zero(coeffs):
    alpha = 1.75
    expected = np.exp(alpha * coeffs.shift) * np.sqrt(coeffs.b_v * np.pi) / (2.0 * alpha ** 1.5)
    assert g_hat(PayoffTransformQuery(v=0.0, alpha=alpha, K=0.0, coeffs=coeffs)) == pytest.approx(expected)


def test_g_hat_reduced_drops_shift_factor(coeffs):
    v = np.array([-40.0, 0.0, 2.0, 900.0])
    alpha = 0.75
    factor = np.exp((alpha - 1j * v) * coeffs.shift)
    np.testing.assert_allclose(
        g_hat_reduced(v, alpha, 0.25, coeffs) * factor, g_hat_values(v, alpha, 0.25, coeffs), rtol=1e-12
    )


def test_g_hat_finite_for_large_frequencies(coeffs):
    values = g_hat_values(np.array([1e4, 1e6, 1e8]), 3.0, 0.3, coeffs)
    assert np.all(np.isfinite(values))
    assert np.all(np.diff(np.abs(values)) < 0)


@pytest.mark.parametrize("alpha", [0.75, 1.75, 3.0])
@pytest.mark.parametrize("strike", ["floor", 0.18588, 0.3])
def test_g_hat_matches_oscillatory_quadrature(coeffs, alpha, strike):
    K = coeffs.sqrt_c_v if strike == "floor" else strike
    for v in (0.0, 0.5, -0.5, 2.0, -2.0, 10.0, -10.0, 50.0, -50.0):
        closed = g_hat_values(v, alpha, K, coeffs)
        numeric = g_hat_by_quadrature(v, alpha, K, coeffs)
        assert abs(closed - numeric) <= 1e-8 * abs(numeric), (v, alpha, K)


def test_g_hat_reference_point(coeffs):
    value = g_hat(PayoffTransformQuery(v=2.0, alpha=1.75, K=0.18588, coeffs=coeffs))
    assert value == pytest.approx(g_hat_by_quadrature(2.0, 1.75, 0.18588, coeffs), rel=1e-8)

