"""
Endpoints HTTP de valoración y cobertura
"""
from typing import Optional

import structlog
from fastapi import APIRouter, HTTPException, Query
from pydantic import BaseModel, Field

from app.core.exceptions import INPUT_ERRORS, NUMERICAL_ERRORS
from app.models.params import ConditionReport, MarketState, ModelParams, Variant
from app.models.pricing import HedgeResult, PriceResult, PricingMethod, QuadratureSettings
from app.services.hedging_service import hedging_service
from app.services.levy_model import check_conditions, vix_coefficients, vix_value
from app.services.pricing_service import default_alpha, pricing_service

logger = structlog.get_logger()
router = APIRouter()


class PricingRequest(BaseModel):
    """Consulta de valoración; los campos omitidos toman los valores de referencia"""

    params: ModelParams = Field(default_factory=ModelParams)
    state: MarketState = Field(default_factory=MarketState)
    T: float = Field(1.0, gt=0)
    K: Optional[float] = Field(None, ge=0)
    alpha: Optional[float] = Field(None, gt=0)
    quad: Optional[QuadratureSettings] = None
    method: PricingMethod = PricingMethod.QUADRATURE

    def strike(self) -> float:
        if self.K is not None:
            return self.K
        return float(vix_value(vix_coefficients(self.params), self.state.sigma_sq))

    def damping(self) -> float:
        return self.alpha if self.alpha is not None else default_alpha(self.params)

    def settings_for_variant(self) -> QuadratureSettings:
        """Sin ajustes explícitos, gamma-OU usa la vía ε"""
        return QuadratureSettings.resolve(self.quad, self.params.variant)


class FuturesResponse(BaseModel):
    futures: float
    T: float
    t: float


class VixResponse(BaseModel):
    vix: float
    b_v: float
    c_v: float


def _raise_http(e: Exception, endpoint: str):
    if isinstance(e, INPUT_ERRORS):
        logger.warning("Rejected pricing request", endpoint=endpoint, error=str(e))
        raise HTTPException(status_code=422, detail=str(e))
    if isinstance(e, NUMERICAL_ERRORS):
        logger.error("Numerical failure in pricing request", endpoint=endpoint, error=str(e))
        raise HTTPException(status_code=500, detail=f"{type(e).__name__}: {e}")
    raise e


@router.post("/price", response_model=PriceResult)
def price(request: PricingRequest):
    """Precio de la call sobre el VIX (cuadratura o FFT)"""
    try:
        quad = request.settings_for_variant()
        if request.method is PricingMethod.FFT:
            return pricing_service.price_via_fft(
                request.params, request.state, request.T, [request.strike()], request.damping(), quad
            )[0]
        return pricing_service.price(
            request.params, request.state, request.T, request.strike(), request.damping(), quad
        )
    except (*INPUT_ERRORS, *NUMERICAL_ERRORS) as e:
        _raise_http(e, "price")


@router.post("/hedge", response_model=HedgeResult)
def hedge(request: PricingRequest):
    """Estrategia LRM (ξ, η) junto con el precio"""
    try:
        return hedging_service.hedge(
            request.params, request.state, request.T, request.strike(), request.damping(),
            request.settings_for_variant(),
        )
    except (*INPUT_ERRORS, *NUMERICAL_ERRORS) as e:
        _raise_http(e, "hedge")


@router.post("/futures", response_model=FuturesResponse)
def futures(request: PricingRequest):
    """Futuro del VIX E[V_T | F_t]"""
    try:
        value = pricing_service.futures(
            request.params, request.state, request.T, request.settings_for_variant(), request.damping()
        )
        return FuturesResponse(futures=value, T=request.T, t=request.state.t)
    except (*INPUT_ERRORS, *NUMERICAL_ERRORS) as e:
        _raise_http(e, "futures")


@router.post("/check", response_model=ConditionReport)
def check(request: PricingRequest):
    """Condiciones de valoración y cobertura para el vencimiento pedido"""
    try:
        return check_conditions(request.params, request.T)
    except INPUT_ERRORS as e:
        _raise_http(e, "check")


@router.get("/vix", response_model=VixResponse)
def vix(
    variant: Variant = Query(Variant.GAMMA_OU),
    sigma_sq: float = Query(0.0145, gt=0),
):
    """VIX con los parámetros de referencia de la variante"""
    coeffs = vix_coefficients(ModelParams(variant=variant))
    return VixResponse(vix=vix_value(coeffs, sigma_sq), b_v=coeffs.b_v, c_v=coeffs.c_v)
