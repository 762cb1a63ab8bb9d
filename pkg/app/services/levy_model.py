"""
Medidas de Lévy de las variantes BNS (gamma-OU, IG-OU), función cumulante κ,
reducción del VIX y las integrales estáticas en ν con forma cerrada.

Todas las funciones son puras y aceptan escalares o arreglos de numpy.
"""
from typing import Union

import numpy as np

from app.core.exceptions import DomainError
from app.models.params import ConditionReport, ModelParams, Variant, VixCoefficients

ArrayLike = Union[complex, float, np.ndarray]


def _unwrap(values: np.ndarray, scalar: bool):
    """Devolver un escalar de Python si la entrada era escalar"""
    return values.item() if scalar else values


def u_hat(params: ModelParams) -> float:
    """û = sup{u ∈ ℝ | κ(u) < ∞}: b²/2 para IG-OU, b para gamma-OU"""
    if params.variant is Variant.IG_OU:
        return params.b ** 2 / 2.0
    return params.b


def kappa(params: ModelParams, u: ArrayLike) -> ArrayLike:
    """
    Función cumulante κ(u) = ∫(e^{ux} − 1)ν(dx)

    Args:
        params: Parámetros del modelo
        u: Argumento complejo con Re(u) < û

    Returns:
        λau/(b − u) (gamma-OU) o λau(b² − 2u)^{−1/2} (IG-OU, raíz principal)
    """
    scalar = np.ndim(u) == 0
    u = np.asarray(u, dtype=complex)
    if np.any(u.real >= u_hat(params)):
        raise DomainError(f"κ(u) requiere Re(u) < û = {u_hat(params):.6g}")

    scale = params.lambda_ * params.a
    if params.variant is Variant.IG_OU:
        # b² − 2u tiene parte real positiva: lejos del corte de la raíz principal
        values = scale * u / np.sqrt(params.b ** 2 - 2.0 * u)
    else:
        values = scale * u / (params.b - u)
    return _unwrap(values, scalar)


def levy_mean(params: ModelParams) -> float:
    """∫₀^∞ x ν(dx) = κ′(0) = λa/b para ambas variantes"""
    return params.lambda_ * params.a / params.b


def levy_second_moment(params: ModelParams) -> float:
    """∫₀^∞ x² ν(dx) = κ″(0)"""
    if params.variant is Variant.IG_OU:
        return 2.0 * params.lambda_ * params.a / params.b ** 3
    return 2.0 * params.lambda_ * params.a / params.b ** 2


def levy_density(params: ModelParams, x: ArrayLike) -> ArrayLike:
    """Densidad de ν respecto a dx en (0, ∞); solo se usa en la capa de oráculos"""
    x = np.asarray(x, dtype=float)
    lam, a, b = params.lambda_, params.a, params.b
    with np.errstate(divide="ignore", invalid="ignore"):
        if params.variant is Variant.IG_OU:
            dens = (
                lam * a / (2.0 * np.sqrt(2.0 * np.pi))
                * x ** -1.5 * (1.0 + b ** 2 * x) * np.exp(-0.5 * b ** 2 * x)
            )
        else:
            dens = lam * a * b * np.exp(-b * x)
    dens = np.where(x > 0, dens, 0.0)
    return dens.item() if dens.ndim == 0 else dens


def b_function(lambda_: float, t: ArrayLike) -> ArrayLike:
    """B(t) = (1 − e^{−λt})/λ"""
    if np.any(np.asarray(t) < 0):
        raise DomainError("B(t) requiere t ≥ 0")
    values = -np.expm1(-lambda_ * np.asarray(t, dtype=float)) / lambda_
    return values.item() if values.ndim == 0 else values


def jump_correction(params: ModelParams) -> float:
    """J₀ = ∫(1 + ρx − e^{ρx})ν(dx) = ρ·∫xν(dx) − κ(ρ) ≤ 0"""
    return params.rho * levy_mean(params) - kappa(params, params.rho).real


def vix_coefficients(params: ModelParams) -> VixCoefficients:
    """
    Reducir el VIX a V_t = √(B_V σ²_t + C_V)

    B_V = B(τ)/τ y C_V = (1/λ)(1 − B_V)∫xν(dx) − 2J₀
    """
    b_v = b_function(params.lambda_, params.tau) / params.tau
    c_v = (1.0 - b_v) * levy_mean(params) / params.lambda_ - 2.0 * jump_correction(params)
    return VixCoefficients(b_v=b_v, c_v=c_v)


def vix_value(coeffs: VixCoefficients, sigma_sq: ArrayLike) -> ArrayLike:
    """V = √(B_V σ² + C_V)"""
    values = np.sqrt(coeffs.b_v * np.asarray(sigma_sq, dtype=float) + coeffs.c_v)
    return values.item() if values.ndim == 0 else values


def c_rho(params: ModelParams) -> float:
    """C_ρ = ∫(e^{ρx} − 1)²ν(dx) = κ(2ρ) − 2κ(ρ)"""
    if params.rho == 0:
        return 0.0
    value = kappa(params, 2.0 * params.rho) - 2.0 * kappa(params, params.rho)
    return max(value.real, 0.0)


def cross_integral(params: ModelParams, zeta: ArrayLike) -> ArrayLike:
    """
    ∫₀^∞(e^{ζx} − 1)(e^{ρx} − 1)ν(dx) = κ(ζ + ρ) − κ(ζ) − κ(ρ)

    La forma cerrada vale en todo Re(ζ) < û (ρ ≤ 0 mantiene ζ + ρ en el dominio).
    """
    scalar = np.ndim(zeta) == 0
    zeta = np.asarray(zeta, dtype=complex)
    if np.any(zeta.real >= u_hat(params)):
        raise DomainError(f"La integral cruzada requiere Re(ζ) < û = {u_hat(params):.6g}")
    if params.rho == 0:
        return _unwrap(np.zeros_like(zeta), scalar)

    if params.variant is Variant.GAMMA_OU:
        a, b, lam, rho = params.a, params.b, params.lambda_, params.rho
        values = a * b * lam * (
            1.0 / (b - zeta - rho) - 1.0 / (b - zeta) - 1.0 / (b - rho) + 1.0 / b
        )
    else:
        values = kappa(params, zeta + params.rho) - kappa(params, zeta) - kappa(params, params.rho)
    return _unwrap(np.asarray(values), scalar)


def check_conditions(params: ModelParams, maturity: float) -> ConditionReport:
    """
    Comprobar las condiciones de valoración y cobertura para el vencimiento T

    La condición de cobertura ∫₁^∞ exp{2B(T)x}ν(dx) < ∞ equivale a 2B(T) < û
    (b > 2B(T) en gamma-OU, b²/2 > 2B(T) en IG-OU).
    """
    if maturity <= 0:
        raise DomainError("El vencimiento T debe ser positivo")
    bound = u_hat(params)
    two_b_t = 2.0 * b_function(params.lambda_, maturity)
    is_ig = params.variant is Variant.IG_OU
    return ConditionReport(
        variant=params.variant,
        maturity=maturity,
        u_hat=bound,
        two_b_t=two_b_t,
        u_hat_positive=bound > 0,
        fourier_integrable=is_ig,
        bounded_cf=True,
        hedging_condition=two_b_t < bound,
        requires_eps=not is_ig,
    )
