"""
Configuración de una corrida: archivo plano key=value más banderas de la CLI

Los valores por defecto reproducen el experimento numérico de referencia
(gamma-OU, T = 1, α = 1.75, ε = 1e−4, call at-the-money).
"""
from typing import Any, Dict, List, Mapping, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.config import load_key_value_file, settings
from app.core.exceptions import DomainError
from app.models.oracle import McSettings
from app.models.params import MarketState, ModelParams, Variant
from app.models.pricing import PricingMethod, QuadratureSettings

# Decimales para redondear los puntos de una malla (evita 0.30000000000000004)
GRID_DECIMALS = 12


def _grid(start: float, stop: float, step: float) -> List[float]:
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, GRID_DECIMALS) for k in range(count)]


class RunConfig(BaseModel):
    """Entradas completas de un comando; las claves coinciden con las del archivo"""

    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    # Modelo
    variant: Variant = Variant.GAMMA_OU
    lambda_: float = Field(0.5783, alias="lambda", gt=0)
    a: float = Field(1.4338, gt=0)
    b: float = Field(11.6641, gt=0)
    rho: float = Field(-1.2606, le=0)
    r: float = Field(0.007, ge=0)
    tau: float = Field(0.0833, gt=0)

    # Estado y contrato
    t: float = Field(0.0, ge=0)
    spot: float = Field(1124.47, gt=0)
    sigma_sq: float = Field(0.0145, gt=0)
    T: float = Field(1.0, gt=0)
    K: Optional[float] = Field(None, ge=0)
    K_min: float = Field(0.12, ge=0)
    K_max: float = Field(0.30, ge=0)
    K_step: float = Field(0.02, gt=0)
    t_min: float = Field(0.0, ge=0)
    t_max: float = Field(0.98, ge=0)
    t_step: float = Field(0.02, gt=0)

    # Numérica
    alpha: float = Field(default_factory=lambda: settings.DEFAULT_ALPHA, gt=0)
    eps: Optional[float] = Field(None, ge=0)
    v_max: float = Field(default_factory=lambda: settings.DEFAULT_V_MAX, gt=0)
    abs_tol: float = Field(default_factory=lambda: settings.DEFAULT_ABS_TOL, gt=0)
    max_nodes: int = Field(default_factory=lambda: settings.DEFAULT_MAX_NODES, ge=15)
    fft_size: int = Field(default_factory=lambda: settings.DEFAULT_FFT_SIZE)
    method: PricingMethod = PricingMethod.QUADRATURE

    # Monte Carlo
    n_paths: int = Field(default_factory=lambda: settings.DEFAULT_N_PATHS, ge=1)
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED, ge=0)
    antithetic: bool = False

    # Salida
    out: Optional[str] = None
    format: str = "csv"

    @field_validator("variant", mode="before")
    @classmethod
    def _parse_variant(cls, value):
        return Variant.parse(value)

    @field_validator("format")
    @classmethod
    def _check_format(cls, value: str) -> str:
        if value.lower() != "csv":
            raise ValueError("Solo se admite format=csv")
        return value.lower()

    @field_validator("K", "eps", "out", mode="before")
    @classmethod
    def _blank_is_default(cls, value):
        return None if isinstance(value, str) and not value.strip() else value

    @model_validator(mode="after")
    def _check_ranges(self):
        if self.K_min > self.K_max:
            raise ValueError(f"Rango de strikes inválido: K_min = {self.K_min} > K_max = {self.K_max}")
        if self.t_min > self.t_max:
            raise ValueError(f"Rango de tiempos inválido: t_min = {self.t_min} > t_max = {self.t_max}")
        if self.t >= self.T:
            raise ValueError(f"Se requiere t < T (t = {self.t}, T = {self.T})")
        # Reutilizar las validaciones de los modelos de dominio
        self.model_params()
        self.quadrature()
        return self

    # ------------------------------------------------------------------ #
    # Construcción
    # ------------------------------------------------------------------ #

    @classmethod
    def load(cls, path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> "RunConfig":
        """
        Leer el archivo key=value y aplicar las banderas de la CLI encima

        Args:
            path: Archivo de configuración (opcional)
            overrides: Valores ya convertidos; None significa "no indicado"

        Returns:
            RunConfig: Configuración validada
        """
        values: Dict[str, Any] = dict(load_key_value_file(path))
        values.update({key: value for key, value in (overrides or {}).items() if value is not None})
        return cls.model_validate(values)

    # ------------------------------------------------------------------ #
    # Vistas de dominio
    # ------------------------------------------------------------------ #

    def model_params(self) -> ModelParams:
        return ModelParams(
            variant=self.variant, lambda_=self.lambda_, a=self.a, b=self.b,
            rho=self.rho, r=self.r, tau=self.tau,
        )

    def market_state(self, t: Optional[float] = None) -> MarketState:
        return MarketState(t=self.t if t is None else t, spot=self.spot, sigma_sq=self.sigma_sq)

    @property
    def eps_value(self) -> float:
        """ε por defecto: DEFAULT_EPS_GAMMA en gamma-OU, 0 en IG-OU"""
        return QuadratureSettings(eps=self.eps).for_variant(self.variant).eps

    def quadrature(self) -> QuadratureSettings:
        return QuadratureSettings(
            v_max=self.v_max, abs_tol=self.abs_tol, max_nodes=self.max_nodes,
            fft_size=self.fft_size, eps=self.eps_value,
        )

    def mc_settings(self) -> McSettings:
        return McSettings(n_paths=self.n_paths, seed=self.seed, antithetic=self.antithetic)

    def strike(self) -> float:
        """K indicado o, si falta, el VIX actual (at the money)"""
        if self.K is not None:
            return self.K
        # Import diferido: los servicios dependen de los modelos
        from app.services.levy_model import vix_coefficients, vix_value

        return round(float(vix_value(vix_coefficients(self.model_params()), self.sigma_sq)), GRID_DECIMALS)

    def strikes(self) -> List[float]:
        return _grid(self.K_min, self.K_max, self.K_step)

    def times(self) -> List[float]:
        if self.t_max >= self.T:
            raise DomainError(f"El barrido en t debe quedar antes del vencimiento: t_max = {self.t_max} ≥ T = {self.T}")
        return _grid(self.t_min, self.t_max, self.t_step)

    def resolved(self) -> Dict[str, Any]:
        """Todas las claves con sus valores efectivos (K y eps resueltos)"""
        values = self.model_dump(by_alias=True, mode="json")
        values["K"] = self.strike()
        values["eps"] = self.eps_value
        return values

    def to_text(self) -> str:
        """Volcado key=value, legible de nuevo con RunConfig.load"""
        lines = ["# Configuración resuelta"]
        for key, value in self.resolved().items():
            if value is None:
                continue
            if isinstance(value, bool):
                value = str(value).lower()
            lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"
