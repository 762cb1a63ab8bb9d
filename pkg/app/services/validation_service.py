"""
Batería de validación contra oráculos independientes

Cada chequeo compara una fórmula cerrada o una integral de Fourier con un
método que no comparte su derivación: cuadratura directa de la integral en ν,
cuadratura oscilatoria del pago, Monte Carlo exacto (gamma-OU) o inversión de
la densidad (IG-OU).
"""
from typing import Callable, List, Optional

import numpy as np
import structlog
from scipy import integrate

from app.models.oracle import McEstimate, McSettings
from app.models.params import MarketState, ModelParams, Variant, VixCoefficients
from app.models.pricing import QuadratureSettings
from app.models.validation import CheckOutcome, CheckStatus, ValidationReport
from app.services.charfn import conditional_mean, phi_values
from app.services.hedging_service import HedgingService, hedging_service
from app.services.levy_model import (
    check_conditions,
    kappa,
    levy_density,
    u_hat,
    vix_coefficients,
    vix_value,
)
from app.services.oracle_service import DENSITY_MASS_TOL, OracleService, oracle_service
from app.services.pricing_service import PricingService, pricing_service
from app.services.transform import g_hat_values

logger = structlog.get_logger()

# Valor del VIX con el juego de parámetros de referencia (σ² = 0.0145)
REFERENCE_VIX = 0.18588
REFERENCE_VIX_TOL = 5e-4

KAPPA_REL_TOL = 1e-8
G_HAT_REL_TOL = 1e-8
ALPHA_GRID = (0.75, 1.75, 3.0)
ALPHA_TOL_GAMMA = 1e-5
ALPHA_TOL_IG = 1e-6
INVERSION_PRICE_TOL = 1e-5
CF_FREQUENCIES = (5.0, 25.0, 100.0, 400.0)

# Un chequeo MC no concluye si su banda de 3 errores estándar supera el 10% del valor
MC_BAND_RATIO = 0.1
MC_MIN_PATHS = 1000


def kappa_by_quadrature(params: ModelParams, u: float) -> float:
    """
    κ(u) = ∫(e^{ux} − 1)ν(dx) por cuadratura directa (u real, u < û)

    IG-OU: en [0, 1] se integra (e^{ux} − 1)/x·(resto) con peso x^{−1/2}.
    """
    tail_end = np.inf
    if params.variant is Variant.IG_OU:
        lam, a, b = params.lambda_, params.a, params.b
        scale = lam * a / (2.0 * np.sqrt(2.0 * np.pi))

        def smooth(x: float) -> float:
            ratio = np.expm1(u * x) / x if x > 0 else u
            return scale * ratio * (1.0 + b * b * x) * np.exp(-0.5 * b * b * x)

        head, _ = integrate.quad(
            smooth, 0.0, 1.0, weight="alg", wvar=(-0.5, 0.0), epsabs=0.0, epsrel=1e-13, limit=500
        )
        tail, _ = integrate.quad(
            lambda x: np.expm1(u * x) * levy_density(params, x),
            1.0, tail_end, epsabs=0.0, epsrel=1e-13, limit=500,
        )
        return float(head + tail)

    value, _ = integrate.quad(
        lambda x: np.expm1(u * x) * levy_density(params, x),
        0.0, tail_end, epsabs=0.0, epsrel=1e-13, limit=500,
    )
    return float(value)


def cross_integral_by_quadrature(params: ModelParams, zeta: complex) -> complex:
    """∫(e^{ζx} − 1)(e^{ρx} − 1)ν(dx) por cuadratura adaptativa en (0, X], Re ζ ≤ 0"""
    zeta = complex(zeta)
    upper = 80.0 / u_hat(params)

    def leverage(x: float) -> float:
        return np.expm1(params.rho * x) * levy_density(params, x)

    def real_part(x: float) -> float:
        return (np.exp(zeta.real * x) * np.cos(zeta.imag * x) - 1.0) * leverage(x)

    def imag_part(x: float) -> float:
        return np.exp(zeta.real * x) * np.sin(zeta.imag * x) * leverage(x)

    options = dict(epsabs=0.0, epsrel=1e-12, limit=2000)
    re, _ = integrate.quad(real_part, 0.0, upper, **options)
    im, _ = integrate.quad(imag_part, 0.0, upper, **options)
    return complex(re, im)


def g_hat_by_quadrature(v: float, alpha: float, K: float, coeffs: VixCoefficients) -> complex:
    """
    ∫(√(B_V x + C_V) − K)⁺e^{(iv−α)x}dx con la regla oscilatoria de QUADPACK

    El pago es suave a partir de su quiebre x_K; la cola se corta donde
    e^{−αx} es despreciable.
    """
    start = max(0.0, (K * K - coeffs.c_v) / coeffs.b_v)
    upper = start + 45.0 / alpha

    def damped(x: float) -> float:
        return (np.sqrt(coeffs.b_v * x + coeffs.c_v) - K) * np.exp(-alpha * x)

    options = dict(epsabs=0.0, epsrel=1e-13, limit=2000)
    if v == 0:
        value, _ = integrate.quad(damped, start, upper, **options)
        return complex(value, 0.0)
    omega = abs(v)
    re, _ = integrate.quad(damped, start, upper, weight="cos", wvar=omega, maxp1=200, **options)
    im, _ = integrate.quad(damped, start, upper, weight="sin", wvar=omega, maxp1=200, **options)
    return complex(re, np.sign(v) * im)


def _relative_error(value: complex, reference: complex) -> float:
    return abs(value - reference) / max(abs(reference), 1e-300)


class ValidationService:
    def __init__(
        self,
        pricing: PricingService = pricing_service,
        hedging: HedgingService = hedging_service,
        oracle: OracleService = oracle_service,
    ):
        self.pricing = pricing
        self.hedging = hedging
        self.oracle = oracle

    # ------------------------------------------------------------------ #
    # Chequeos deterministas
    # ------------------------------------------------------------------ #

    def check_reference_vix(self) -> CheckOutcome:
        value = vix_value(vix_coefficients(ModelParams()), 0.0145)
        ok = abs(value - REFERENCE_VIX) <= REFERENCE_VIX_TOL
        return _outcome("reference_vix", ok, f"VIX = {value:.6f}, esperado {REFERENCE_VIX} ± {REFERENCE_VIX_TOL}")

    def check_kappa(self, params: ModelParams) -> CheckOutcome:
        bound = u_hat(params)
        grid = sorted({-50.0, -10.0, -1.0, -0.1, 0.1, 1.0, 0.5 * bound})
        worst = max(
            _relative_error(kappa(params, u).real, kappa_by_quadrature(params, u)) for u in grid
        )
        return _outcome("kappa_quadrature", worst <= KAPPA_REL_TOL, f"error relativo máximo {worst:.3e}")

    def check_g_hat(self, params: ModelParams, K: float) -> CheckOutcome:
        coeffs = vix_coefficients(params)
        strikes = sorted({coeffs.sqrt_c_v, max(K, coeffs.sqrt_c_v), coeffs.sqrt_c_v + 0.15})
        alphas = [alpha for alpha in ALPHA_GRID if alpha < u_hat(params)]
        worst = 0.0
        for strike in strikes:
            for alpha in alphas:
                for v in (0.0, 0.5, -0.5, 2.0, -2.0, 10.0, -10.0, 50.0, -50.0):
                    closed = g_hat_values(v, alpha, strike, coeffs)
                    worst = max(worst, _relative_error(closed, g_hat_by_quadrature(v, alpha, strike, coeffs)))
        return _outcome("g_hat_quadrature", worst <= G_HAT_REL_TOL, f"error relativo máximo {worst:.3e}")

    def check_alpha_independence(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        K: float,
        quad: QuadratureSettings,
    ) -> CheckOutcome:
        alphas = [alpha for alpha in ALPHA_GRID if alpha < u_hat(params)]
        tol = ALPHA_TOL_GAMMA if params.is_gamma else ALPHA_TOL_IG
        prices = [self.pricing.price(params, state, T, K, alpha, quad).price for alpha in alphas]
        spread = max(prices) - min(prices)
        detail = f"dispersión de precios {spread:.3e}"
        ok = spread <= tol
        if check_conditions(params, T).hedging_condition:
            xis = [self.hedging.hedge(params, state, T, K, alpha, quad).xi for alpha in alphas]
            xi_spread = max(xis) - min(xis)
            detail += f", dispersión de ξ {xi_spread:.3e}"
            ok = ok and xi_spread <= tol
        return _outcome("alpha_independence", ok, f"{detail} (tolerancia {tol:.0e})")

    def check_density_inversion(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        K: float,
        alpha: float,
        quad: QuadratureSettings,
    ) -> List[CheckOutcome]:
        inversion = self.oracle.invert_density(params, state, T)
        expected_mean = conditional_mean(params, state.t, T, state.sigma_sq)
        mass_ok = abs(inversion.mass - 1.0) <= DENSITY_MASS_TOL
        mass = _outcome(
            "density_normalization", mass_ok,
            f"masa {inversion.mass:.9f}, media {inversion.mean:.6g} frente a {expected_mean:.6g}",
        )
        fourier = self.pricing.price(params, state, T, K, alpha, quad).price
        inverted = self.oracle.invert_density_price(params, state, T, K, quad)
        gap = abs(fourier - inverted)
        price = _outcome(
            "price_density_inversion", gap <= INVERSION_PRICE_TOL,
            f"Fourier {fourier:.9f}, inversión {inverted:.9f}, diferencia {gap:.3e}",
        )
        return [mass, price]

    def check_xi_sign(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        K: float,
        alpha: float,
        quad: QuadratureSettings,
    ) -> CheckOutcome:
        if not check_conditions(params, T).hedging_condition:
            return CheckOutcome(
                name="xi_sign", status=CheckStatus.INCONCLUSIVE, detail="no se cumple 2B(T) < û"
            )
        xi = self.hedging.hedge(params, state, T, K, alpha, quad).xi
        ok = xi == 0.0 if params.rho == 0 else xi < 0.0
        return _outcome("xi_sign", ok, f"ξ = {xi:.6e}")

    # ------------------------------------------------------------------ #
    # Chequeos Monte Carlo (gamma-OU)
    # ------------------------------------------------------------------ #

    def check_monte_carlo(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        K: float,
        alpha: float,
        quad: QuadratureSettings,
        mc: McSettings,
    ) -> List[CheckOutcome]:
        samples = self.oracle.simulate_gamma_ou_terminal(params, state.t, T, state.sigma_sq, mc)
        coeffs = vix_coefficients(params)
        outcomes = []

        cf_failures, cf_band, cf_scale = [], 0.0, np.inf
        for frequency in CF_FREQUENCIES:
            exact = phi_values(params, state.t, T, state.sigma_sq, frequency)
            re, im = self.oracle.mc_characteristic_function(
                samples, frequency, seed=mc.seed, antithetic=mc.antithetic
            )
            cf_band = max(cf_band, 3.0 * re.std_error, 3.0 * im.std_error)
            cf_scale = min(cf_scale, abs(complex(re.mean, im.mean)))
            if not (re.within(exact.real, slack=1e-12) and im.within(exact.imag, slack=1e-12)):
                cf_failures.append(frequency)
        outcomes.append(
            self._mc_outcome(
                "phi_monte_carlo", not cf_failures, cf_band, cf_scale, mc,
                f"frecuencias fuera de 3 errores estándar: {cf_failures or 'ninguna'}",
            )
        )

        priced = self.pricing.price(params, state, T, K, alpha, quad).price
        estimate = self.oracle.mc_price(
            samples, coeffs, K, params.r, T - state.t, seed=mc.seed, antithetic=mc.antithetic
        )
        outcomes.append(self._compare("price_monte_carlo", priced, estimate, quad, mc))

        if not check_conditions(params, T).hedging_condition:
            outcomes.append(
                CheckOutcome(
                    name="xi_monte_carlo", status=CheckStatus.INCONCLUSIVE,
                    detail="no se cumple 2B(T) < û",
                )
            )
            return outcomes
        xi = self.hedging.hedge(params, state, T, K, alpha, quad).xi
        xi_estimate = self.oracle.mc_xi(params, state, T, K, mc, quad, samples=samples)
        outcomes.append(self._compare("xi_monte_carlo", xi, xi_estimate, quad, mc))
        return outcomes

    def _compare(
        self, name: str, value: float, estimate: McEstimate, quad: QuadratureSettings, mc: McSettings
    ) -> CheckOutcome:
        ok = estimate.within(value, slack=10.0 * quad.abs_tol)
        detail = f"Fourier {value:.9g}, MC {estimate.mean:.9g} ± {estimate.std_error:.3g}"
        return self._mc_outcome(name, ok, 3.0 * estimate.std_error, abs(estimate.mean), mc, detail)

    def _mc_outcome(
        self, name: str, ok: bool, band: float, scale: float, mc: McSettings, detail: str
    ) -> CheckOutcome:
        if mc.n_paths < MC_MIN_PATHS or not np.isfinite(band) or band > MC_BAND_RATIO * scale:
            logger.warning("Inconclusive Monte Carlo check", check=name, band=band, n_paths=mc.n_paths)
            return CheckOutcome(
                name=name, status=CheckStatus.INCONCLUSIVE, detail=f"{detail}; banda 3σ = {band:.3g}"
            )
        return _outcome(name, ok, detail)

    # ------------------------------------------------------------------ #
    # Batería completa
    # ------------------------------------------------------------------ #

    def run(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        K: float,
        alpha: float,
        quad: QuadratureSettings,
        mc: Optional[McSettings] = None,
    ) -> ValidationReport:
        """
        Ejecutar la batería completa para una consulta

        gamma-OU se contrasta con Monte Carlo exacto; IG-OU con la inversión
        de la densidad.

        Returns:
            ValidationReport: Un CheckOutcome por chequeo
        """
        mc = mc or McSettings()
        steps: List[Callable[[], object]] = [
            self.check_reference_vix,
            lambda: self.check_kappa(params),
            lambda: self.check_g_hat(params, K),
        ]
        if params.variant is Variant.GAMMA_OU:
            steps.append(lambda: self.check_monte_carlo(params, state, T, K, alpha, quad, mc))
        else:
            steps.append(lambda: self.check_density_inversion(params, state, T, K, alpha, quad))
            steps.append(lambda: self.check_xi_sign(params, state, T, K, alpha, quad))
        steps.append(lambda: self.check_alpha_independence(params, state, T, K, quad))

        checks: List[CheckOutcome] = []
        try:
            for step in steps:
                produced = step()
                for check in produced if isinstance(produced, list) else [produced]:
                    logger.info("Validation check", check=check.name, status=check.status.value)
                    checks.append(check)
        except Exception as e:
            logger.error("Error running validation suite", error=str(e), completed=len(checks))
            raise
        report = ValidationReport(checks=checks)
        logger.info("Validation finished", **report.summary())
        return report


def _outcome(name: str, ok: bool, detail: str) -> CheckOutcome:
    return CheckOutcome(name=name, status=CheckStatus.PASS if ok else CheckStatus.FAIL, detail=detail)


# Instancia global del servicio
validation_service = ValidationService()
