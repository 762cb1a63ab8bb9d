"""
Servicio de valoración de calls sobre el VIX y futuros del VIX

P_t = e^{−r(T−t)}/(2π) ∫ ĝ(v, α; K)·φ_{T|t}(−v − iα) dv

con el factor exp{−ε²(−v − iα)²(T−t)/2} en la vía regularizada. La integral
se evalúa por cuadratura adaptativa o con el truco FFT (f̂ en C_V/B_V).
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence, TypeVar

import numpy as np
import structlog
from scipy import fft, interpolate

from app.core.config import settings
from app.core.exceptions import DomainError, GridResolutionError, IntegrabilityError
from app.models.params import MarketState, ModelParams, VixCoefficients
from app.models.pricing import PriceResult, PricingMethod, QuadratureSettings
from app.services.charfn import eps_factor, phi_values
from app.services.levy_model import u_hat, vix_coefficients
from app.services.quadrature import (
    adaptive_gauss_kronrod,
    oscillatory_breakpoints,
    symmetric_integrand,
    tail_estimate,
)
from app.services.transform import g_hat_reduced, g_hat_values, validate_strike

logger = structlog.get_logger()

T_ = TypeVar("T_")
R_ = TypeVar("R_")

# Límite de extensión del truncamiento N (múltiplo de v_max) en la vía ε = 0
MAX_LIMIT_DOUBLINGS = 10
# Tamaño máximo de la malla FFT
MAX_FFT_SIZE = 2 ** 23
# Ventana de interpolación cúbica alrededor de C_V/B_V
SPLINE_HALF_WIDTH = 4


def run_parallel(func: Callable[[T_], R_], items: Sequence[T_], workers: Optional[int] = None) -> List[R_]:
    """
    Evaluar func sobre items con un pool de hilos, conservando el orden de entrada
    """
    workers = workers or settings.SWEEP_WORKERS
    if len(items) <= 1 or workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def default_alpha(params: ModelParams) -> float:
    """α por defecto: DEFAULT_ALPHA, recortado a û/2 si hace falta"""
    return min(settings.DEFAULT_ALPHA, 0.5 * u_hat(params))


class PricingService:
    def __init__(self):
        self.max_fft_size = MAX_FFT_SIZE

    # ------------------------------------------------------------------ #
    # Validaciones
    # ------------------------------------------------------------------ #

    def validate_query(
        self, params: ModelParams, state: MarketState, T: float, K: float, alpha: float
    ) -> VixCoefficients:
        """
        Comprobar 0 ≤ t < T, α ∈ (0, û) y K ≥ √C_V (o K = 0)

        Returns:
            VixCoefficients: Coeficientes del VIX de los parámetros
        """
        if not state.t < T:
            raise DomainError(f"Se requiere t < T (t = {state.t}, T = {T})")
        bound = u_hat(params)
        if not 0 < alpha < bound:
            raise DomainError(f"α debe estar en (0, û = {bound:.6g}), α = {alpha}")
        coeffs = vix_coefficients(params)
        validate_strike(K, coeffs)
        return coeffs

    def _check_integrable(self, params: ModelParams, eps: float) -> None:
        if params.is_gamma and eps <= 0:
            raise IntegrabilityError(
                "gamma-OU no cumple la condición de integrabilidad de |φ|: use ε > 0"
            )

    # ------------------------------------------------------------------ #
    # Integrando y truncamiento
    # ------------------------------------------------------------------ #

    def integrand(
        self,
        params: ModelParams,
        coeffs: VixCoefficients,
        state: MarketState,
        T: float,
        K: float,
        alpha: float,
        eps: float,
    ) -> Callable[[np.ndarray], np.ndarray]:
        """h(v) = ĝ(v, α; K)·φ_{T|t}(−v − iα)·[factor ε]"""
        delta = T - state.t

        def h(v: np.ndarray) -> np.ndarray:
            v = np.asarray(v, dtype=float)
            zeta = -v - 1j * alpha
            values = g_hat_values(v, alpha, K, coeffs) * phi_values(
                params, state.t, T, state.sigma_sq, zeta
            )
            if eps > 0:
                values = values * eps_factor(zeta, eps, delta)
            return values

        return h

    def eps_cutoff(self, alpha: float, eps: float, delta: float, abs_tol: float) -> float:
        """Frecuencia a partir de la cual |exp{−ε²ζ²Δ/2}| < abs_tol"""
        if eps <= 0:
            return 0.0
        return float(np.sqrt(alpha * alpha + 2.0 * np.log(1.0 / abs_tol) / (eps * eps * delta)))

    def integration_limit(
        self,
        folded: Callable[[np.ndarray], np.ndarray],
        alpha: float,
        delta: float,
        quad: QuadratureSettings,
    ) -> float:
        """
        Truncamiento N de la integral en v

        ε > 0: N = max(v_max, v_ε). ε = 0: se parte de v_max y se duplica
        mientras la cola estimada supere abs_tol.
        """
        if quad.eps > 0:
            return max(quad.v_max, self.eps_cutoff(alpha, quad.eps, delta, quad.abs_tol))

        limit = quad.v_max
        for _ in range(MAX_LIMIT_DOUBLINGS):
            if tail_estimate(folded, limit) / (2.0 * np.pi) <= quad.abs_tol:
                break
            limit *= 2.0
        return limit

    def oscillation_period(
        self, params: ModelParams, coeffs: VixCoefficients, state: MarketState, T: float, K: float
    ) -> float:
        """Periodo aproximado de la fase de ĝ·φ: |K² − C_V|/B_V + C_V/B_V + e^{−λΔ}σ²_t"""
        decay = np.exp(-params.lambda_ * (T - state.t))
        omega = abs(K * K - coeffs.c_v) / coeffs.b_v + coeffs.shift + decay * state.sigma_sq
        return float(2.0 * np.pi / omega)

    # ------------------------------------------------------------------ #
    # Vía de cuadratura
    # ------------------------------------------------------------------ #

    def _fourier_price(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        K: float,
        alpha: float,
        quad: QuadratureSettings,
        fixed_limit: bool = False,
    ) -> PriceResult:
        coeffs = self.validate_query(params, state, T, K, alpha)
        delta = T - state.t
        h = self.integrand(params, coeffs, state, T, K, alpha, quad.eps)
        folded = symmetric_integrand(h)

        limit = quad.v_max if fixed_limit else self.integration_limit(folded, alpha, delta, quad)
        breakpoints = oscillatory_breakpoints(
            limit, self.oscillation_period(params, coeffs, state, T, K),
            max_panels=max(1, quad.max_nodes // 60),
        )
        outcome = adaptive_gauss_kronrod(
            folded, breakpoints, abs_tol=2.0 * np.pi * quad.abs_tol, max_nodes=quad.max_nodes
        )

        scale = np.exp(-params.r * delta) / (2.0 * np.pi)
        price = scale * outcome.value.real
        residual = scale * abs(outcome.value.imag)
        truncation = scale * tail_estimate(folded, limit)
        warning = residual > 100.0 * quad.abs_tol
        if warning:
            logger.warning(
                "Imaginary residual above tolerance", residual=residual, abs_tol=quad.abs_tol, K=K
            )

        return PriceResult(
            price=float(price),
            alpha_used=alpha,
            truncation_estimate=float(truncation),
            method=PricingMethod.QUADRATURE,
            im_residual=float(residual),
            eps_used=quad.eps,
            v_limit=float(limit),
            nodes=outcome.nodes,
            residual_warning=bool(warning),
            strike=K,
        )

    def price(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        K: float,
        alpha: float,
        quad: Optional[QuadratureSettings] = None,
    ) -> PriceResult:
        """
        Precio de la call sobre el VIX por la integral de Fourier

        Args:
            params: Parámetros del modelo
            state: Estado de mercado (t, S_t, σ²_t)
            T: Vencimiento
            K: Strike en unidades de volatilidad
            alpha: Amortiguamiento α ∈ (0, û)
            quad: Ajustes numéricos; eps > 0 delega en price_eps y, sin eps,
                se usa el de la variante

        Returns:
            PriceResult: Precio y diagnósticos
        """
        quad = QuadratureSettings.resolve(quad, params.variant)
        if quad.eps > 0:
            return self.price_eps(params, state, T, K, alpha, quad)
        try:
            self._check_integrable(params, quad.eps)
            result = self._fourier_price(params, state, T, K, alpha, quad)
            logger.info(
                "Price computed", variant=params.variant.value, t=state.t, T=T, K=K,
                alpha=alpha, price=result.price, nodes=result.nodes,
            )
            return result
        except Exception as e:
            logger.error("Error computing price", error=str(e), variant=params.variant.value, K=K)
            raise

    def price_eps(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        K: float,
        alpha: float,
        quad: Optional[QuadratureSettings] = None,
    ) -> PriceResult:
        """Precio regularizado P^(ε)_t (requiere quad.eps > 0)"""
        quad = QuadratureSettings.resolve(quad, params.variant)
        if quad.eps <= 0:
            raise DomainError("price_eps requiere ε > 0")
        try:
            result = self._fourier_price(params, state, T, K, alpha, quad)
            logger.info(
                "Regularized price computed", variant=params.variant.value, t=state.t, T=T, K=K,
                alpha=alpha, eps=quad.eps, price=result.price, v_limit=result.v_limit,
                nodes=result.nodes,
            )
            return result
        except Exception as e:
            logger.error("Error computing regularized price", error=str(e), K=K, eps=quad.eps)
            raise

    def truncated_price(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        K: float,
        alpha: float,
        quad: QuadratureSettings,
    ) -> PriceResult:
        """
        P^⟨N⟩ con N = v_max exacto y sin ε, para cualquier variante

        Solo sirve como testigo de divergencia en gamma-OU; nunca es un precio.
        """
        raw = quad.with_eps(0.0)
        return self._fourier_price(params, state, T, K, alpha, raw, fixed_limit=True)

    def futures(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        quad: Optional[QuadratureSettings] = None,
        alpha: Optional[float] = None,
    ) -> float:
        """
        Futuro del VIX F_t = E[V_T | F_t] (sin descontar), vía K = 0 y r = 0
        """
        quad = QuadratureSettings.resolve(quad, params.variant)
        alpha = alpha if alpha is not None else default_alpha(params)
        undiscounted = params.model_copy(update={"r": 0.0})
        result = self.price(undiscounted, state, T, 0.0, alpha, quad)
        return result.price

    # ------------------------------------------------------------------ #
    # Vía FFT
    # ------------------------------------------------------------------ #

    def fft_grid(self, limit: float, shift: float, alpha: float, bound: float, quad: QuadratureSettings):
        """
        Malla uniforme v_j = jη alineada para que C_V/B_V sea el nodo k₀ de la salida

        η ≤ 2π·min(α, û − α)/ln(100/abs_tol) mantiene el error de la regla del
        trapecio por debajo de la tolerancia; N crece desde fft_size hasta cumplirlo.

        Returns:
            (n, eta, k0)
        """
        strip = min(alpha, bound - alpha)
        eta_max = 2.0 * np.pi * strip / np.log(100.0 / quad.abs_tol)
        k0 = max(SPLINE_HALF_WIDTH + 1, int(np.ceil(limit * shift / (2.0 * np.pi))))
        span = 2.0 * np.pi * k0 / shift  # n·η ≥ limit

        n = quad.fft_size
        while span / n > eta_max and n < self.max_fft_size:
            n *= 2
        eta = span / n
        if eta > eta_max:
            raise GridResolutionError(
                f"La malla FFT no resuelve la franja de analiticidad con n ≤ {self.max_fft_size}"
            )
        if k0 + SPLINE_HALF_WIDTH >= n // 2:
            raise GridResolutionError("C_V/B_V queda fuera del rango de salida de la FFT")
        return n, eta, k0

    def price_via_fft(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        strikes: Iterable[float],
        alpha: float,
        quad: Optional[QuadratureSettings] = None,
    ) -> List[PriceResult]:
        """
        Precios para varios strikes con el truco FFT

        f(v) = ĝ reducida·φ(−v − iα)·[factor ε] se muestrea en la malla, la FFT
        da f̂ en x_k = kΔx y P = e^{−rΔ}/(2π)·e^{αC_V/B_V}·f̂(C_V/B_V), con
        interpolación cúbica en C_V/B_V.
        """
        quad = QuadratureSettings.resolve(quad, params.variant)
        strikes = [float(k) for k in strikes]
        if not strikes:
            return []
        try:
            self._check_integrable(params, quad.eps)
            for K in strikes:
                coeffs = self.validate_query(params, state, T, K, alpha)
            delta = T - state.t
            shift = coeffs.shift

            # El truncamiento se fija con el menor strike (cola de ĝ más pesada)
            reference = self.integrand(params, coeffs, state, T, min(strikes), alpha, quad.eps)
            limit = self.integration_limit(symmetric_integrand(reference), alpha, delta, quad)
            n, eta, k0 = self.fft_grid(limit, shift, alpha, u_hat(params), quad)

            v = eta * np.arange(n)
            zeta = -v - 1j * alpha
            weights = np.full(n, eta)
            weights[0] = 0.5 * eta
            common = phi_values(params, state.t, T, state.sigma_sq, zeta)
            if quad.eps > 0:
                common = common * eps_factor(zeta, quad.eps, delta)
            common = common * weights

            dx = shift / k0
            window = np.arange(k0 - SPLINE_HALF_WIDTH, k0 + SPLINE_HALF_WIDTH + 1)
            prefactor = np.exp(-params.r * delta) / (2.0 * np.pi) * np.exp(alpha * shift)

            results = []
            for K in strikes:
                samples = g_hat_reduced(v, alpha, K, coeffs) * common
                transformed = fft.fft(samples)
                # Simetría hermítica: ∫_ℝ e^{−ivx}F(v)dv = 2·Re ∫_0^∞ e^{−ivx}F(v)dv
                full_line = 2.0 * transformed[window].real
                spline = interpolate.CubicSpline(window * dx, full_line)
                value = float(prefactor * spline(shift))
                tail = float(prefactor * np.max(np.abs(samples[-32:])) / eta * v[-1])
                results.append(
                    PriceResult(
                        price=value,
                        alpha_used=alpha,
                        truncation_estimate=tail,
                        method=PricingMethod.FFT,
                        im_residual=0.0,
                        eps_used=quad.eps,
                        v_limit=float(v[-1]),
                        nodes=n,
                        residual_warning=False,
                        strike=K,
                    )
                )

            logger.info(
                "FFT prices computed", variant=params.variant.value, t=state.t, T=T,
                strikes=len(strikes), fft_size=n, eta=eta, k0=k0,
            )
            return results
        except Exception as e:
            logger.error("Error computing FFT prices", error=str(e), strikes=len(strikes))
            raise

    # ------------------------------------------------------------------ #
    # Barridos
    # ------------------------------------------------------------------ #

    def sweep_time(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        K: float,
        alpha: float,
        times: Sequence[float],
        quad: Optional[QuadratureSettings] = None,
        method: PricingMethod = PricingMethod.QUADRATURE,
    ) -> List[PriceResult]:
        """Precios en los tiempos dados con S_t y σ²_t fijos, ordenados por t"""
        quad = QuadratureSettings.resolve(quad, params.variant)
        ordered = sorted(float(t) for t in times)

        def one(t: float) -> PriceResult:
            moved = state.model_copy(update={"t": t})
            if method is PricingMethod.FFT:
                return self.price_via_fft(params, moved, T, [K], alpha, quad)[0]
            return self.price(params, moved, T, K, alpha, quad)

        logger.info("Time sweep started", points=len(ordered), method=method.value)
        return run_parallel(one, ordered)

    def split_strike(self, params: ModelParams, K: float):
        """
        Separar un strike bajo el mínimo del VIX

        V_T ≥ √C_V casi seguro, así que para 0 < K < √C_V la call vale
        e^{−rΔ}(F − K): se valora el transformado con K = 0 y se resta la parte fija.

        Returns:
            (strike del transformado, parte fija)
        """
        coeffs = vix_coefficients(params)
        if 0 < K < coeffs.sqrt_c_v * (1.0 - 1e-12):
            return 0.0, K
        return K, 0.0

    def _shifted(self, result: PriceResult, params: ModelParams, delta: float, K: float, fixed: float):
        if fixed == 0:
            return result
        return result.model_copy(
            update={"price": result.price - np.exp(-params.r * delta) * fixed, "strike": K}
        )

    def sweep_strike(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        strikes: Sequence[float],
        alpha: float,
        quad: Optional[QuadratureSettings] = None,
        method: PricingMethod = PricingMethod.QUADRATURE,
    ) -> List[PriceResult]:
        """Precios para los strikes dados, ordenados por K (se admite 0 < K < √C_V)"""
        quad = QuadratureSettings.resolve(quad, params.variant)
        ordered = sorted(float(k) for k in strikes)
        split = [self.split_strike(params, K) for K in ordered]
        delta = T - state.t
        logger.info("Strike sweep started", points=len(ordered), method=method.value)
        if method is PricingMethod.FFT:
            raw = self.price_via_fft(params, state, T, [k for k, _ in split], alpha, quad)
        else:
            raw = run_parallel(lambda k: self.price(params, state, T, k[0], alpha, quad), split)
        return [
            self._shifted(result, params, delta, K, fixed)
            for result, K, (_, fixed) in zip(raw, ordered, split)
        ]


# Instancia global del servicio
pricing_service = PricingService()
