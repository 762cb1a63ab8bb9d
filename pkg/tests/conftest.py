import pytest

from app.models.oracle import McSettings
from app.models.params import MarketState, ModelParams, Variant
from app.models.pricing import QuadratureSettings
from app.services.levy_model import vix_coefficients, vix_value


@pytest.fixture
def gamma_params() -> ModelParams:
    """Juego de parámetros de referencia (gamma-OU)"""
    return ModelParams()


@pytest.fixture
def ig_params() -> ModelParams:
    return ModelParams(variant=Variant.IG_OU)


@pytest.fixture
def state() -> MarketState:
    return MarketState()


@pytest.fixture
def mid_state() -> MarketState:
    return MarketState(t=0.5)


@pytest.fixture
def coeffs(gamma_params):
    return vix_coefficients(gamma_params)


@pytest.fixture
def atm_strike(gamma_params, state) -> float:
    return float(vix_value(vix_coefficients(gamma_params), state.sigma_sq))


@pytest.fixture
def eps_quad() -> QuadratureSettings:
    return QuadratureSettings(eps=1e-4)


@pytest.fixture
def plain_quad() -> QuadratureSettings:
    return QuadratureSettings(eps=0.0)


@pytest.fixture
def small_mc() -> McSettings:
    return McSettings(n_paths=200_000, seed=42)
