# Models package

from app.models.params import ConditionReport, MarketState, ModelParams, Variant, VixCoefficients
from app.models.pricing import HedgeResult, PriceResult, PricingMethod, QuadratureSettings
from app.models.oracle import McEstimate, McSettings
from app.models.validation import CheckOutcome, CheckStatus, ValidationReport

__all__ = [
    "ConditionReport",
    "MarketState",
    "ModelParams",
    "Variant",
    "VixCoefficients",
    "HedgeResult",
    "PriceResult",
    "PricingMethod",
    "QuadratureSettings",
    "McEstimate",
    "McSettings",
    "CheckOutcome",
    "CheckStatus",
    "ValidationReport",
]
