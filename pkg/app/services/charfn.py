"""
Función característica condicional φ_{T|t}(ζ) = E[exp{iζσ²_T} | σ²_t]

φ_{T|t}(ζ) = exp{iζe^{−λ(T−t)}σ²_t}·exp{∫ₜᵀ κ(iζe^{−λ(T−s)})ds}, definida para
Im(ζ) > −û. El cambio x = e^{−λ(T−s)} lleva la integral temporal a
∫_{e^{−λ(T−t)}}^1 κ(iζx)/(λx) dx.
"""
from typing import Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import integrate

from app.core.exceptions import DomainError, QuadratureError
from app.models.params import ModelParams, Variant
from app.services.levy_model import b_function, levy_mean, levy_second_moment, u_hat

logger = structlog.get_logger()

ArrayLike = Union[complex, float, np.ndarray]

# Tolerancia absoluta de la integral en x del caso IG-OU
IG_KAPPA_ABS_TOL = 1e-12
IG_CHUNK_SIZE = 32_768


class CharFnQuery(BaseModel):
    """Punto de evaluación de φ_{T|t}: tiempos, σ²_t y frecuencia compleja ζ"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    t: float = Field(ge=0)
    T: float
    sigma_sq_t: float = Field(gt=0)
    zeta: complex = 0j

    @model_validator(mode="after")
    def _check_times(self):
        if self.T < self.t:
            raise ValueError("Se requiere 0 ≤ t ≤ T")
        return self

    @property
    def delta(self) -> float:
        return self.T - self.t


def _check_zeta_domain(params: ModelParams, zeta: np.ndarray) -> None:
    if np.any(zeta.imag <= -u_hat(params)):
        raise DomainError(f"φ requiere Im(ζ) > −û = {-u_hat(params):.6g}")


def _check_times(t: float, T: float) -> float:
    if t < 0 or T < t:
        raise DomainError("Se requiere 0 ≤ t ≤ T")
    return T - t


def kappa_integral(params: ModelParams, t: float, T: float, zeta: ArrayLike) -> ArrayLike:
    """
    ∫ₜᵀ κ(iζe^{−λ(T−s)})ds

    Args:
        params: Parámetros del modelo
        t: Tiempo inicial
        T: Vencimiento
        zeta: Frecuencia(s) compleja(s) con Im(ζ) > −û

    Returns:
        Valor complejo (escalar o arreglo de la forma de zeta)
    """
    scalar = np.ndim(zeta) == 0
    zeta = np.asarray(zeta, dtype=complex)
    delta = _check_times(t, T)
    _check_zeta_domain(params, zeta)

    if delta == 0:
        values = np.zeros_like(zeta)
    elif params.variant is Variant.GAMMA_OU:
        values = _gamma_kappa_integral(params, delta, zeta)
    else:
        values = _ig_kappa_integral(params, delta, zeta)
    return values.item() if scalar else values


def _gamma_kappa_integral(params: ModelParams, delta: float, zeta: np.ndarray) -> np.ndarray:
    """
    Forma cerrada gamma-OU: a·i·sgn(Re ζ)·[arctan(·)] − (a/2)·log(cociente de módulos)

    Con ζ = p + iq:
        Im = a·sgn(p)·[arctan((|ζ|² + bq)/(b|p|)) − arctan((|ζ|²x₀ + bq)/(b|p|))]
        Re = −(a/2)·log((|ζ|² + 2bq + b²)/(|ζ|²x₀² + 2bqx₀ + b²))
    Para p = 0 el término arctan se anula (límite).
    """
    a, b = params.a, params.b
    x0 = np.exp(-params.lambda_ * delta)
    p, q = zeta.real, zeta.imag
    mod_sq = p * p + q * q

    log_ratio = np.log((mod_sq + 2.0 * b * q + b * b) / (mod_sq * x0 * x0 + 2.0 * b * q * x0 + b * b))

    nonzero = p != 0
    denom = np.where(nonzero, b * np.abs(p), 1.0)
    arctan_diff = np.arctan((mod_sq + b * q) / denom) - np.arctan((mod_sq * x0 + b * q) / denom)
    imag = np.where(nonzero, a * np.sign(p) * arctan_diff, 0.0)

    return -0.5 * a * log_ratio + 1j * imag


def _ig_kappa_integral(params: ModelParams, delta: float, zeta: np.ndarray) -> np.ndarray:
    """Cuadratura adaptativa Gauss–Kronrod de ∫_{x₀}^1 aiζ/√(b² − 2iζx) dx, por bloques de ζ"""
    x0 = float(np.exp(-params.lambda_ * delta))
    flat = zeta.ravel()
    values = np.empty_like(flat)
    for start in range(0, flat.size, IG_CHUNK_SIZE):
        chunk = flat[start:start + IG_CHUNK_SIZE]
        values[start:start + IG_CHUNK_SIZE] = _ig_chunk(params.a, params.b, x0, chunk)
    return values.reshape(zeta.shape)


def _ig_chunk(a: float, b: float, x0: float, zeta: np.ndarray) -> np.ndarray:
    def integrand(x: float) -> np.ndarray:
        values = a * 1j * zeta / np.sqrt(b * b - 2j * zeta * x)
        return np.concatenate([values.real, values.imag])

    result, error, info = integrate.quad_vec(
        integrand,
        x0,
        1.0,
        epsabs=IG_KAPPA_ABS_TOL,
        epsrel=1e-14,
        norm="max",
        full_output=True,
    )
    if not info.success and error > IG_KAPPA_ABS_TOL:
        logger.error("IG kappa integral did not converge", error=error, status=info.status)
        raise QuadratureError(
            f"∫κ IG-OU sin converger: error {error:.3e} > {IG_KAPPA_ABS_TOL:.0e}"
        )
    n = zeta.size
    return result[:n] + 1j * result[n:]


def phi_values(
    params: ModelParams, t: float, T: float, sigma_sq_t: float, zeta: ArrayLike
) -> ArrayLike:
    """Versión vectorizada de phi sobre un arreglo de ζ"""
    scalar = np.ndim(zeta) == 0
    zeta = np.asarray(zeta, dtype=complex)
    delta = _check_times(t, T)
    decay = np.exp(-params.lambda_ * delta)
    exponent = 1j * zeta * decay * sigma_sq_t + np.asarray(kappa_integral(params, t, T, zeta))
    values = np.exp(exponent)
    return values.item() if scalar else values


def phi(params: ModelParams, query: CharFnQuery) -> complex:
    """
    φ_{T|t}(ζ) para un punto de consulta

    Args:
        params: Parámetros del modelo
        query: Tiempos, σ²_t y ζ

    Returns:
        complex: Valor de la función característica condicional
    """
    return phi_values(params, query.t, query.T, query.sigma_sq_t, query.zeta)


def eps_factor(zeta: ArrayLike, eps: float, delta: float) -> ArrayLike:
    """exp{−ζ²ε²(T−t)/2}: función característica de ε(W_T − W_t)"""
    return np.exp(-0.5 * np.square(zeta) * eps * eps * delta)


def phi_eps_values(
    params: ModelParams, t: float, T: float, sigma_sq_t: float, zeta: ArrayLike, eps: float
) -> ArrayLike:
    if eps <= 0:
        raise DomainError("φ^(ε) requiere ε > 0")
    values = np.asarray(phi_values(params, t, T, sigma_sq_t, zeta)) * eps_factor(
        np.asarray(zeta, dtype=complex), eps, T - t
    )
    return values.item() if values.ndim == 0 else values


def phi_eps(params: ModelParams, query: CharFnQuery, eps: float) -> complex:
    """φ^(ε)_{T|t}(ζ) = φ_{T|t}(ζ)·exp{−ζ²ε²(T−t)/2}"""
    return phi_eps_values(params, query.t, query.T, query.sigma_sq_t, query.zeta, eps)


def phi_tail_magnitude_gamma(
    params: ModelParams, t: float, T: float, v: ArrayLike, alpha: float
) -> ArrayLike:
    """
    |exp{∫κ}| en ζ = v − iα para gamma-OU

    |(v² + (α − b)²)/(v²e^{−2λ(T−t)} + (αe^{−λ(T−t)} − b)²)|^{−a/2}, acotada en v.
    """
    if params.variant is not Variant.GAMMA_OU:
        raise DomainError("phi_tail_magnitude_gamma solo aplica a gamma-OU")
    if not 0 < alpha < u_hat(params):
        raise DomainError(f"α debe estar en (0, û = {u_hat(params):.6g})")
    delta = _check_times(t, T)
    if delta == 0:
        raise DomainError("phi_tail_magnitude_gamma requiere t < T")

    v = np.asarray(v, dtype=float)
    decay = np.exp(-params.lambda_ * delta)
    b = params.b
    ratio = (v * v + (alpha - b) ** 2) / (v * v * decay * decay + (alpha * decay - b) ** 2)
    values = np.abs(ratio) ** (-0.5 * params.a)
    return values.item() if values.ndim == 0 else values


def conditional_mean(params: ModelParams, t: float, T: float, sigma_sq_t: float) -> float:
    """E[σ²_T | σ²_t] = e^{−λ(T−t)}σ²_t + B(T−t)·∫xν(dx)"""
    delta = _check_times(t, T)
    return float(
        np.exp(-params.lambda_ * delta) * sigma_sq_t
        + b_function(params.lambda_, delta) * levy_mean(params)
    )


def conditional_variance(params: ModelParams, t: float, T: float) -> float:
    """Var[σ²_T | σ²_t] = κ″(0)·(1 − e^{−2λ(T−t)})/(2λ)"""
    delta = _check_times(t, T)
    return float(
        levy_second_moment(params) * -np.expm1(-2.0 * params.lambda_ * delta) / (2.0 * params.lambda_)
    )


def atom_probability(params: ModelParams, t: float, T: float) -> float:
    """
    Masa del átomo sin saltos en σ²_T = e^{−λ(T−t)}σ²_t

    gamma-OU: e^{−λa(T−t)} (la parte de |φ| que no decae); IG-OU: 0.
    """
    delta = _check_times(t, T)
    if params.variant is Variant.IG_OU:
        return 0.0
    return float(np.exp(-params.lambda_ * params.a * delta))
