import numpy as np
import pytest

from app.core.config import settings
from app.core.exceptions import ConditionViolationError, DomainError, IntegrabilityError
from app.models.oracle import McSettings
from app.models.params import MarketState
from app.models.pricing import QuadratureSettings
from app.services.hedging_service import hedging_service
from app.services.oracle_service import oracle_service
from app.services.pricing_service import pricing_service

STRIKE_GRID = [round(0.12 + 0.02 * k, 12) for k in range(10)]


def test_gamma_hedge_is_negative(gamma_params, mid_state, atm_strike, eps_quad):
    result = hedging_service.hedge(gamma_params, mid_state, 1.0, atm_strike, 1.75, eps_quad)
    assert result.xi < 0
    assert result.xi_at_2eps == pytest.approx(result.xi, abs=1e-8)
    assert result.eps_used == 1e-4
    price = pricing_service.price(gamma_params, mid_state, 1.0, atm_strike, 1.75, eps_quad).price
    assert result.price == pytest.approx(price, abs=1e-12)


def test_eta_is_the_riskless_leg(gamma_params, mid_state, atm_strike, eps_quad):
    result = hedging_service.hedge(gamma_params, mid_state, 1.0, atm_strike, 1.75, eps_quad)
    expected = np.exp(-gamma_params.r * 0.5) * (result.price - result.xi * mid_state.spot)
    assert result.eta == pytest.approx(expected, rel=1e-12)
    assert hedging_service.eta_units(1.0, 0.0, MarketState(t=0.0), gamma_params) == 1.0


def test_no_leverage_means_no_hedge(gamma_params, mid_state, atm_strike, eps_quad):
    flat = gamma_params.model_copy(update={"rho": 0.0})
    assert hedging_service.lrm_xi_eps(flat, mid_state, 1.0, atm_strike, 1.75, eps_quad) == 0.0


def test_unregularized_gamma_hedge_is_rejected(gamma_params, mid_state, atm_strike):
    with pytest.raises(IntegrabilityError):
        hedging_service.lrm_xi(gamma_params, mid_state, 1.0, atm_strike, 1.75)
    with pytest.raises(DomainError):
        hedging_service.lrm_xi_eps(
            gamma_params, mid_state, 1.0, atm_strike, 1.75, QuadratureSettings(eps=0.0)
        )


def test_hedge_without_settings_uses_variant_eps(gamma_params, mid_state, atm_strike, eps_quad):
    result = hedging_service.hedge(gamma_params, mid_state, 1.0, atm_strike, 1.75)
    assert result.eps_used == settings.DEFAULT_EPS_GAMMA
    explicit = hedging_service.lrm_xi_eps(gamma_params, mid_state, 1.0, atm_strike, 1.75, eps_quad)
    assert result.xi == pytest.approx(explicit, abs=1e-12)
    assert hedging_service.lrm_xi_eps(gamma_params, mid_state, 1.0, atm_strike, 1.75) == result.xi


def test_xi_is_stable_in_eps(gamma_params, mid_state, atm_strike, eps_quad):
    fine = hedging_service.lrm_xi_eps(gamma_params, mid_state, 1.0, atm_strike, 1.75, eps_quad)
    coarse = hedging_service.lrm_xi_eps(
        gamma_params, mid_state, 1.0, atm_strike, 1.75, eps_quad.with_eps(1e-3)
    )
    assert abs(coarse - fine) <= 1e-4


def test_xi_vanishes_deep_out_of_the_money(gamma_params, mid_state, atm_strike, eps_quad):
    atm = hedging_service.lrm_xi_eps(gamma_params, mid_state, 1.0, atm_strike, 1.75, eps_quad)
    far = hedging_service.lrm_xi_eps(gamma_params, mid_state, 1.0, 3.0, 1.75, eps_quad)
    assert abs(far) < 1e-3 * abs(atm)
    assert abs(far) < 1e-8


def test_hedging_condition_is_enforced(gamma_params, mid_state, eps_quad):
    small_b = gamma_params.model_copy(update={"b": 1.0})
    with pytest.raises(ConditionViolationError):
        hedging_service.lrm_xi_eps(small_b, mid_state, 1.0, 0.3, 0.5, eps_quad)


def test_ig_hedge_alpha_independence(ig_params, mid_state, plain_quad):
    values = [
        hedging_service.lrm_xi(ig_params, mid_state, 1.0, 0.2, alpha, plain_quad)
        for alpha in (0.75, 1.75, 3.0)
    ]
    assert all(value < 0 for value in values)
    assert max(values) - min(values) <= 1e-6


def test_gamma_hedge_alpha_independence(gamma_params, mid_state, atm_strike, eps_quad):
    values = [
        hedging_service.lrm_xi_eps(gamma_params, mid_state, 1.0, atm_strike, alpha, eps_quad)
        for alpha in (0.75, 1.75, 3.0)
    ]
    assert max(values) - min(values) <= 1e-5


def test_richardson_stays_close_to_plain_estimate(gamma_params, mid_state, atm_strike, eps_quad):
    plain, _ = hedging_service.lrm_xi_eps_detailed(gamma_params, mid_state, 1.0, atm_strike, 1.75, eps_quad)
    extrapolated, _ = hedging_service.lrm_xi_eps_detailed(
        gamma_params, mid_state, 1.0, atm_strike, 1.75, eps_quad.model_copy(update={"richardson": True})
    )
    assert extrapolated == pytest.approx(plain, abs=1e-8)


def test_strike_sweep_signs_and_floor(gamma_params, mid_state, eps_quad):
    results = hedging_service.sweep_strike(gamma_params, mid_state, 1.0, STRIKE_GRID, 1.75, eps_quad)
    assert len(results) == len(STRIKE_GRID)
    assert all(result.xi < 0 for result in results)
    # Bajo √C_V la call es el futuro menos una constante
    assert results[0].xi == pytest.approx(results[1].xi, rel=1e-12)
    prices = np.array([result.price for result in results])
    assert np.all(np.diff(prices) < 0)


def test_gamma_hedge_matches_monte_carlo(gamma_params, mid_state, atm_strike, eps_quad):
    mc = McSettings(n_paths=100_000, seed=11)
    estimate = oracle_service.mc_xi(gamma_params, mid_state, 1.0, atm_strike, mc, eps_quad)
    xi = hedging_service.lrm_xi_eps(gamma_params, mid_state, 1.0, atm_strike, 1.75, eps_quad)
    assert estimate.within(xi, slack=1e-8)


@pytest.mark.slow
@pytest.mark.parametrize("t, K", [(0.0, None), (0.3, None), (0.5, None), (0.9, None), (0.5, 0.16), (0.5, 0.26)])
def test_gamma_hedge_matches_monte_carlo_million_paths(gamma_params, atm_strike, eps_quad, t, K):
    strike = atm_strike if K is None else K
    state = MarketState(t=t)
    mc = McSettings(n_paths=1_000_000, seed=42)
    estimate = oracle_service.mc_xi(gamma_params, state, 1.0, strike, mc, eps_quad)
    xi = hedging_service.lrm_xi_eps(gamma_params, state, 1.0, strike, 1.75, eps_quad)
    assert estimate.within(xi, slack=1e-8)


@pytest.mark.slow
def test_time_sweep_hedges_are_negative(gamma_params, state, atm_strike, eps_quad):
    times = [round(0.02 * k, 12) for k in range(50)]
    results = hedging_service.sweep_time(gamma_params, state, 1.0, atm_strike, 1.75, times, eps_quad)
    assert len(results) == 50
    assert all(result.xi < 0 and result.price > 0 for result in results)
