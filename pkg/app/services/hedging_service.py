"""
Servicio de cobertura localmente minimizadora del riesgo (LRM)

ξ_t = e^{−r(T−t)}/(S_t(σ²_t + C_ρ)) · (1/2π)∫ ĝ(v, α; K)·φ_{T|t}(−v − iα)·I(ζ′(v)) dv

con I(ζ) = ∫(e^{ζx} − 1)(e^{ρx} − 1)ν(dx) en forma cerrada y
ζ′(v) = (α − iv)e^{−λ(T−t)}. La pata sin riesgo es η_t = e^{−rt}(P_t − ξ_t S_t).
"""
from typing import List, Optional, Sequence

import numpy as np
import structlog

from app.core.exceptions import ConditionViolationError, DomainError, IntegrabilityError
from app.models.params import MarketState, ModelParams
from app.models.pricing import HedgeResult, PriceResult, QuadratureSettings
from app.services.levy_model import c_rho, check_conditions, cross_integral
from app.services.pricing_service import PricingService, pricing_service, run_parallel
from app.services.quadrature import adaptive_gauss_kronrod, oscillatory_breakpoints, symmetric_integrand

logger = structlog.get_logger()


class HedgingService:
    def __init__(self, pricing: PricingService = pricing_service):
        self.pricing = pricing

    def _check_hedging_condition(self, params: ModelParams, T: float) -> None:
        report = check_conditions(params, T)
        if not report.hedging_condition:
            raise ConditionViolationError(
                f"No se cumple 2B(T) < û: 2B(T) = {report.two_b_t:.6g}, û = {report.u_hat:.6g}"
            )

    def _xi(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        K: float,
        alpha: float,
        quad: QuadratureSettings,
    ) -> float:
        coeffs = self.pricing.validate_query(params, state, T, K, alpha)
        if params.rho == 0:
            return 0.0

        delta = T - state.t
        decay = np.exp(-params.lambda_ * delta)
        price_integrand = self.pricing.integrand(params, coeffs, state, T, K, alpha, quad.eps)

        def h(v: np.ndarray) -> np.ndarray:
            v = np.asarray(v, dtype=float)
            zeta_prime = (alpha - 1j * v) * decay
            return price_integrand(v) * cross_integral(params, zeta_prime)

        folded = symmetric_integrand(h)
        limit = self.pricing.integration_limit(folded, alpha, delta, quad)
        breakpoints = oscillatory_breakpoints(
            limit, self.pricing.oscillation_period(params, coeffs, state, T, K),
            max_panels=max(1, quad.max_nodes // 60),
        )
        prefactor = np.exp(-params.r * delta) / (state.spot * (state.sigma_sq + c_rho(params)))
        outcome = adaptive_gauss_kronrod(
            folded,
            breakpoints,
            abs_tol=2.0 * np.pi * quad.abs_tol / max(prefactor, 1e-300),
            max_nodes=quad.max_nodes,
        )
        residual = prefactor * abs(outcome.value.imag) / (2.0 * np.pi)
        if residual > 100.0 * quad.abs_tol:
            logger.warning("Imaginary residual in hedge ratio", residual=residual, K=K)
        return float(prefactor * outcome.value.real / (2.0 * np.pi))

    def lrm_xi(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        K: float,
        alpha: float,
        quad: Optional[QuadratureSettings] = None,
    ) -> float:
        """
        Estrategia LRM ξ sin regularizar

        Requiere la condición de integrabilidad de |φ| (IG-OU) y 2B(T) < û.

        Returns:
            float: Unidades del activo con riesgo
        """
        quad = (quad or QuadratureSettings()).with_eps(0.0)
        try:
            if params.is_gamma:
                raise IntegrabilityError("gamma-OU requiere la vía regularizada (lrm_xi_eps)")
            self._check_hedging_condition(params, T)
            xi = self._xi(params, state, T, K, alpha, quad)
            logger.info("Hedge ratio computed", variant=params.variant.value, t=state.t, K=K, xi=xi)
            return xi
        except Exception as e:
            logger.error("Error computing hedge ratio", error=str(e), K=K)
            raise

    def lrm_xi_eps(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        K: float,
        alpha: float,
        quad: Optional[QuadratureSettings] = None,
    ) -> float:
        """ξ con φ^(ε) (requiere quad.eps > 0 y 2B(T) < û)"""
        return self.lrm_xi_eps_detailed(params, state, T, K, alpha, quad)[0]

    def lrm_xi_eps_detailed(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        K: float,
        alpha: float,
        quad: Optional[QuadratureSettings] = None,
    ):
        """
        ξ^(ε) junto con el diagnóstico en 2ε

        Con quad.richardson se devuelve la extrapolación (4ξ(ε) − ξ(2ε))/3,
        que elimina el término en ε².

        Returns:
            (xi, xi_at_2eps)
        """
        quad = QuadratureSettings.resolve(quad, params.variant)
        if quad.eps <= 0:
            raise DomainError("lrm_xi_eps requiere ε > 0")
        try:
            self._check_hedging_condition(params, T)
            xi = self._xi(params, state, T, K, alpha, quad)
            xi_2eps = self._xi(params, state, T, K, alpha, quad.with_eps(2.0 * quad.eps))
            if quad.richardson:
                xi = (4.0 * xi - xi_2eps) / 3.0
            logger.info(
                "Regularized hedge ratio computed", variant=params.variant.value, t=state.t,
                K=K, eps=quad.eps, xi=xi, xi_at_2eps=xi_2eps,
            )
            return xi, xi_2eps
        except Exception as e:
            logger.error("Error computing regularized hedge ratio", error=str(e), K=K, eps=quad.eps)
            raise

    def eta_units(self, price_t: float, xi: float, state: MarketState, params: ModelParams) -> float:
        """η_t = e^{−rt}(P_t − ξ_t S_t)"""
        return float(np.exp(-params.r * state.t) * (price_t - xi * state.spot))

    def hedge(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        K: float,
        alpha: float,
        quad: Optional[QuadratureSettings] = None,
    ) -> HedgeResult:
        """
        Precio, ξ y η en un solo resultado (vía ε si quad.eps > 0)
        """
        quad = QuadratureSettings.resolve(quad, params.variant)
        priced: PriceResult = self.pricing.price(params, state, T, K, alpha, quad)
        xi_2eps = None
        if quad.eps > 0:
            xi, xi_2eps = self.lrm_xi_eps_detailed(params, state, T, K, alpha, quad)
        else:
            xi = self.lrm_xi(params, state, T, K, alpha, quad)
        return HedgeResult(
            xi=xi,
            eta=self.eta_units(priced.price, xi, state, params),
            price=priced.price,
            alpha_used=alpha,
            eps_used=quad.eps,
            xi_at_2eps=xi_2eps,
            im_residual=priced.im_residual,
        )

    def sweep_time(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        K: float,
        alpha: float,
        times: Sequence[float],
        quad: Optional[QuadratureSettings] = None,
    ) -> List[HedgeResult]:
        """Coberturas en los tiempos dados, ordenadas por t"""
        ordered = sorted(float(t) for t in times)
        return run_parallel(
            lambda t: self.hedge(params, state.model_copy(update={"t": t}), T, K, alpha, quad),
            ordered,
        )

    def sweep_strike(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        strikes: Sequence[float],
        alpha: float,
        quad: Optional[QuadratureSettings] = None,
    ) -> List[HedgeResult]:
        """
        Coberturas para los strikes dados, ordenadas por K

        Bajo √C_V la call es el futuro menos una constante: ξ coincide con el de
        K = 0 y el precio se desplaza en e^{−rΔ}K.
        """
        ordered = sorted(float(k) for k in strikes)
        delta = T - state.t

        def one(K: float) -> HedgeResult:
            strike, fixed = self.pricing.split_strike(params, K)
            result = self.hedge(params, state, T, strike, alpha, quad)
            if fixed == 0:
                return result
            price = result.price - float(np.exp(-params.r * delta)) * fixed
            return result.model_copy(
                update={"price": price, "eta": self.eta_units(price, result.xi, state, params)}
            )

        return run_parallel(one, ordered)


# Instancia global del servicio
hedging_service = HedgingService()
