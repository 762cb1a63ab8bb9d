"""
Modelos de entrada/salida de valoración y cobertura
"""
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.core.config import settings
from app.models.params import Variant


class PricingMethod(str, Enum):
    QUADRATURE = "quadrature"
    FFT = "fft"


class QuadratureSettings(BaseModel):
    """
    Ajustes numéricos de las integrales de Fourier

    v_max es la cota de truncamiento N en frecuencia; eps = 0 significa la
    fórmula sin regularizar (solo válida para IG-OU). eps = None toma el valor
    por defecto de la variante al entrar en los servicios (for_variant).
    """

    model_config = ConfigDict(frozen=True)

    v_max: float = Field(default_factory=lambda: settings.DEFAULT_V_MAX, gt=0)
    abs_tol: float = Field(default_factory=lambda: settings.DEFAULT_ABS_TOL, gt=0)
    max_nodes: int = Field(default_factory=lambda: settings.DEFAULT_MAX_NODES, ge=15)
    fft_size: int = Field(default_factory=lambda: settings.DEFAULT_FFT_SIZE)
    eps: Optional[float] = Field(None, ge=0)
    richardson: bool = False

    @field_validator("fft_size")
    @classmethod
    def _power_of_two(cls, value: int) -> int:
        if value < 256 or value & (value - 1):
            raise ValueError("fft_size debe ser potencia de dos >= 256")
        return value

    def with_eps(self, eps: float) -> "QuadratureSettings":
        return self.model_copy(update={"eps": eps})

    def for_variant(self, variant: Variant) -> "QuadratureSettings":
        """Fijar eps si falta: DEFAULT_EPS_GAMMA en gamma-OU, 0 en IG-OU"""
        if self.eps is not None:
            return self
        return self.with_eps(settings.DEFAULT_EPS_GAMMA if variant is Variant.GAMMA_OU else 0.0)

    @classmethod
    def resolve(cls, quad: Optional["QuadratureSettings"], variant: Variant) -> "QuadratureSettings":
        return (quad or cls()).for_variant(variant)


class PriceResult(BaseModel):
    """Precio de la call sobre el VIX con diagnósticos"""

    model_config = ConfigDict(frozen=True)

    price: float
    alpha_used: float
    truncation_estimate: float
    method: PricingMethod
    im_residual: float = 0.0
    eps_used: float = 0.0
    v_limit: float = 0.0
    nodes: int = 0
    residual_warning: bool = False
    strike: Optional[float] = None


class HedgeResult(BaseModel):
    """Estrategia LRM: ξ unidades del activo con riesgo y η del activo sin riesgo"""

    model_config = ConfigDict(frozen=True)

    xi: float
    eta: float
    price: float
    alpha_used: float
    eps_used: float
    xi_at_2eps: Optional[float] = None
    im_residual: float = 0.0
