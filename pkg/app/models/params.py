"""
Modelos de datos del modelo BNS: parámetros, estado de mercado y coeficientes del VIX
"""
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Variant(str, Enum):
    """Variante de la medida de Lévy del proceso OU"""

    GAMMA_OU = "gamma"
    IG_OU = "ig"

    @classmethod
    def parse(cls, value) -> "Variant":
        """Aceptar 'gamma', 'GammaOU', 'ig', 'IgOU', 'ig-ou'..."""
        if isinstance(value, Variant):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        if key in ("gamma", "gammaou"):
            return cls.GAMMA_OU
        if key in ("ig", "igou", "inversegaussian"):
            return cls.IG_OU
        raise ValueError(f"Variante desconocida: {value}")


class ModelParams(BaseModel):
    """
    Parámetros de Lévy/OU del modelo BNS

    lambda_ es la tasa de reversión λ (1/años); a, b la forma y escala de la
    ley invariante; rho ≤ 0 el parámetro de apalancamiento; r la tasa libre de
    riesgo; tau el periodo de observación del VIX (años).
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    variant: Variant = Variant.GAMMA_OU
    lambda_: float = Field(0.5783, alias="lambda", gt=0)
    a: float = Field(1.4338, gt=0)
    b: float = Field(11.6641, gt=0)
    rho: float = Field(-1.2606, le=0)
    r: float = Field(0.007, ge=0)
    tau: float = Field(0.0833, gt=0)

    @field_validator("variant", mode="before")
    @classmethod
    def _parse_variant(cls, value):
        return Variant.parse(value)

    @property
    def is_gamma(self) -> bool:
        return self.variant is Variant.GAMMA_OU

    @property
    def mu(self) -> float:
        """Drift de martingala μ = ∫(1−e^{ρx})ν(dx) = −κ(ρ)"""
        # Import diferido: levy_model depende de este módulo
        from app.services.levy_model import kappa

        return float(-kappa(self, self.rho).real)


class MarketState(BaseModel):
    """Estado de mercado en t: precio spot S_t y volatilidad al cuadrado σ²_t"""

    model_config = ConfigDict(frozen=True)

    t: float = Field(0.0, ge=0)
    spot: float = Field(1124.47, gt=0)
    sigma_sq: float = Field(0.0145, gt=0)


class VixCoefficients(BaseModel):
    """Constantes B_V, C_V con V_t = √(B_V σ²_t + C_V)"""

    model_config = ConfigDict(frozen=True)

    b_v: float = Field(gt=0)
    c_v: float = Field(gt=0)

    @property
    def sqrt_c_v(self) -> float:
        return self.c_v ** 0.5

    @property
    def shift(self) -> float:
        """C_V/B_V, el punto donde se evalúa f̂ en el truco FFT"""
        return self.c_v / self.b_v


class ConditionReport(BaseModel):
    """
    Reporte de condiciones de aplicabilidad para un vencimiento T
    """

    model_config = ConfigDict(frozen=True)

    variant: Variant
    maturity: float
    u_hat: float
    two_b_t: float
    u_hat_positive: bool
    fourier_integrable: bool  # condición de integrabilidad de |φ|, solo IG-OU
    bounded_cf: bool  # |φ(v−iα)| acotada, ambas variantes
    hedging_condition: bool  # 2B(T) < û
    requires_eps: bool  # gamma-OU: valorar por la vía ε

    @property
    def pricing_allowed(self) -> bool:
        return self.u_hat_positive and (self.fourier_integrable or self.bounded_cf)

    @property
    def hedging_allowed(self) -> bool:
        return self.pricing_allowed and self.hedging_condition

    @model_validator(mode="after")
    def _check_consistency(self):
        if self.fourier_integrable and self.requires_eps:
            raise ValueError("Un reporte integrable no puede requerir ε")
        return self
