"""
Transformada de Fourier del pago de la call sobre el VIX

ĝ(v, α; K) = ∫₀^∞ (√(B_V x + C_V) − K)⁺ e^{(iv−α)x} dx
           = e^{−(iv−α)C_V/B_V} · √(B_V π)/(2(α − iv)^{3/2}) · erfc(K√((α − iv)/B_V))

erfc a argumento complejo se obtiene de la función de Faddeeva w(z)
(scipy.special.wofz), con e^{z²}erfc(z) = w(iz).
"""
from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import special

from app.core.exceptions import DomainError
from app.models.params import VixCoefficients

ArrayLike = Union[complex, float, np.ndarray]

# Holgura relativa al comparar K con √C_V
_STRIKE_SLACK = 1e-12


class PayoffTransformQuery(BaseModel):
    """Punto (v, α, K) de ĝ con los coeficientes del VIX"""

    model_config = ConfigDict(frozen=True)

    v: float
    alpha: float = Field(gt=0)
    K: float = Field(ge=0)
    coeffs: VixCoefficients

    @model_validator(mode="after")
    def _check_strike(self):
        validate_strike(self.K, self.coeffs)
        return self


def validate_strike(K: float, coeffs: VixCoefficients) -> None:
    """K ≥ √C_V, o K = 0 (futuros)"""
    if K != 0 and K < coeffs.sqrt_c_v * (1.0 - _STRIKE_SLACK):
        raise DomainError(f"Se requiere K ≥ √C_V = {coeffs.sqrt_c_v:.6g} (o K = 0), K = {K}")


def erfcx_complex(z: ArrayLike) -> ArrayLike:
    """e^{z²}·erfc(z) = w(iz) para todo z complejo"""
    values = special.wofz(1j * np.asarray(z, dtype=complex))
    return values.item() if values.ndim == 0 else values


def erfc_complex(z: ArrayLike) -> ArrayLike:
    """
    erfc(z) a argumento complejo

    erfc(z) = e^{−z²}w(iz) en Re z ≥ 0 y erfc(z) = 2 − erfc(−z) en el semiplano
    izquierdo, donde e^{−z²}w(iz) perdería precisión.
    """
    z = np.asarray(z, dtype=complex)
    right = np.where(z.real >= 0, z, -z)
    with np.errstate(over="ignore", invalid="ignore"):
        values = np.exp(-right * right) * special.wofz(1j * right)
    values = np.where(z.real >= 0, values, 2.0 - values)
    return values.item() if values.ndim == 0 else values


def g_hat_reduced(v: ArrayLike, alpha: float, K: float, coeffs: VixCoefficients) -> ArrayLike:
    """
    f(v) = √(B_V π)/(2(α − iv)^{3/2})·erfc(K√((α − iv)/B_V))

    Es ĝ sin el factor e^{−(iv−α)C_V/B_V}; el factor gaussiano de erfc se
    evalúa dentro de la exponencial para que |v| grande no desborde.
    """
    return _g_hat(v, alpha, K, coeffs, shift=0.0)


def g_hat_values(v: ArrayLike, alpha: float, K: float, coeffs: VixCoefficients) -> ArrayLike:
    """
    ĝ(v, α; K) vectorizado en v

    Args:
        v: Frecuencia(s) reales
        alpha: Amortiguamiento α > 0
        K: Strike (K ≥ √C_V o K = 0)
        coeffs: Coeficientes B_V, C_V

    Returns:
        Valor(es) complejos, ĝ(−v) = conj(ĝ(v))
    """
    return _g_hat(v, alpha, K, coeffs, shift=coeffs.shift)


def g_hat(query: PayoffTransformQuery) -> complex:
    """ĝ en un punto de consulta"""
    return g_hat_values(query.v, query.alpha, query.K, query.coeffs)


def _g_hat(v: ArrayLike, alpha: float, K: float, coeffs: VixCoefficients, shift: float) -> ArrayLike:
    if alpha <= 0:
        raise DomainError("ĝ requiere α > 0")
    validate_strike(K, coeffs)

    v = np.asarray(v, dtype=float)
    b_v = coeffs.b_v
    s = alpha - 1j * v
    root_s = np.sqrt(s)
    z = K * root_s / np.sqrt(b_v)

    # e^{s·C/B}·erfc(z) = exp(s·(C/B) − z²)·w(iz)
    exponent = s * shift - z * z
    values = (
        np.exp(exponent)
        * np.sqrt(b_v * np.pi)
        / (2.0 * s * root_s)
        * special.wofz(1j * z)
    )
    return values.item() if values.ndim == 0 else values
