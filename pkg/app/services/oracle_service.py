"""
Oráculos independientes de validación

- Simulación exacta de σ²_T en gamma-OU: el BDLP sobre [t, T] es Poisson
  compuesto de intensidad λa con saltos Exp(b), de modo que
  σ²_T = e^{−λ(T−t)}σ²_t + Σᵢ e^{−λ(T−sᵢ)}xᵢ.
- Estimadores Monte Carlo de precio, función característica y ξ.
- Precio IG-OU por inversión de Fourier de la densidad de σ²_T.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import structlog
from scipy import integrate, stats

from app.core.config import settings
from app.core.exceptions import DomainError, InversionAccuracyError, QuadratureError, VariantError
from app.models.oracle import McEstimate, McSettings
from app.models.params import MarketState, ModelParams, Variant, VixCoefficients
from app.models.pricing import QuadratureSettings
from app.services.charfn import conditional_mean, conditional_variance, phi_values
from app.services.levy_model import c_rho, vix_coefficients
from app.services.quadrature import gauss_legendre_panels
from app.services.transform import validate_strike

logger = structlog.get_logger()

# Uniformes lejos de 0 y 1 para las inversas de CDF
_UNIFORM_CLIP = 1e-16

# Inversión de densidad
DENSITY_GRID_POINTS = 4097
DENSITY_STD_SPAN = 20.0
DENSITY_PHI_CUTOFF = 1e-12
DENSITY_MAX_FREQUENCY = 2.0 ** 22
DENSITY_MASS_TOL = 1e-6

# Integral exterior de mc_xi en u = e^{−bx}
MC_XI_GL_ORDER = 8
MC_XI_MAX_PANELS = 512
MC_XI_GEOMETRIC_LEVELS = 48
# Celdas del temporal caminos × nodos por bloque
MC_XI_CHUNK_CELLS = 2 ** 22


@dataclass(frozen=True)
class DensityInversion:
    """Densidad de σ²_T invertida sobre una malla y sus momentos"""

    y: np.ndarray
    density: np.ndarray
    mass: float
    mean: float
    variance: float
    frequency_limit: float


class OracleService:
    def __init__(self):
        self.block_size = settings.MC_BLOCK_SIZE
        self.workers = settings.MC_WORKERS

    # ------------------------------------------------------------------ #
    # Simulación exacta gamma-OU
    # ------------------------------------------------------------------ #

    def simulate_gamma_ou_terminal(
        self, params: ModelParams, t: float, T: float, sigma_sq_t: float, mc: McSettings
    ) -> np.ndarray:
        """
        Muestras exactas de σ²_T dado σ²_t (gamma-OU)

        Los caminos se generan en bloques de tamaño fijo; el bloque k usa el
        generador PCG64 sembrado con SeedSequence([seed, k]), así que el resultado
        no depende del número de hilos.

        Args:
            params: Parámetros (variante gamma-OU)
            t: Tiempo inicial
            T: Vencimiento (T > t)
            sigma_sq_t: σ²_t
            mc: Número de caminos, semilla y antitéticas

        Returns:
            np.ndarray: n_paths muestras de σ²_T
        """
        if params.variant is not Variant.GAMMA_OU:
            raise VariantError("La simulación exacta solo está disponible para gamma-OU")
        if not T > t:
            raise DomainError("La simulación requiere T > t")

        delta = T - t
        # Bloques pares con antitéticos: los pares no cruzan bloques
        block_size = self.block_size + (self.block_size % 2 if mc.antithetic else 0)
        n_blocks = -(-mc.n_paths // block_size)
        sizes = [min(block_size, mc.n_paths - k * block_size) for k in range(n_blocks)]

        def run_block(index: int) -> np.ndarray:
            rng = np.random.default_rng(np.random.SeedSequence([mc.seed, index]))
            return self._simulate_block(params, delta, sigma_sq_t, sizes[index], rng, mc.antithetic)

        try:
            if n_blocks == 1 or self.workers <= 1:
                blocks = [run_block(k) for k in range(n_blocks)]
            else:
                with ThreadPoolExecutor(max_workers=self.workers) as pool:
                    blocks = list(pool.map(run_block, range(n_blocks)))
            samples = np.concatenate(blocks)
            logger.info(
                "Gamma-OU paths simulated", n_paths=mc.n_paths, blocks=n_blocks, seed=mc.seed,
                antithetic=mc.antithetic, t=t, T=T,
            )
            return samples
        except Exception as e:
            logger.error("Error simulating gamma-OU paths", error=str(e), seed=mc.seed)
            raise

    def _simulate_block(
        self,
        params: ModelParams,
        delta: float,
        sigma_sq_t: float,
        size: int,
        rng: np.random.Generator,
        antithetic: bool,
    ) -> np.ndarray:
        lam, b = params.lambda_, params.b
        intensity = lam * params.a * delta
        base = np.exp(-lam * delta) * sigma_sq_t

        if not antithetic:
            counts = rng.poisson(intensity, size)
            total = int(counts.sum())
            owner = np.repeat(np.arange(size), counts)
            time_to_maturity = rng.uniform(0.0, delta, total)
            jumps = rng.exponential(1.0 / b, total)
            contributions = np.exp(-lam * time_to_maturity) * jumps
            return base + np.bincount(owner, weights=contributions, minlength=size)

        # Pares antitéticos: conteos por inversa de la CDF de Poisson con u y 1 − u,
        # marcas (tiempos y tamaños) con U y 1 − U
        half = -(-size // 2)
        u = np.clip(rng.uniform(size=half), _UNIFORM_CLIP, 1.0 - _UNIFORM_CLIP)
        counts_a = stats.poisson.ppf(u, intensity).astype(np.int64)
        counts_b = stats.poisson.ppf(1.0 - u, intensity).astype(np.int64)
        slots = np.maximum(counts_a, counts_b)
        total = int(slots.sum())
        owner = np.repeat(np.arange(half), slots)
        starts = np.repeat(np.cumsum(slots) - slots, slots)
        position = np.arange(total) - starts

        u_time = np.clip(rng.uniform(size=total), _UNIFORM_CLIP, 1.0 - _UNIFORM_CLIP)
        u_size = np.clip(rng.uniform(size=total), _UNIFORM_CLIP, 1.0 - _UNIFORM_CLIP)

        def leg(counts: np.ndarray, times: np.ndarray, marks: np.ndarray) -> np.ndarray:
            used = position < counts[owner]
            contributions = np.exp(-lam * delta * times) * (-np.log(marks) / b)
            return base + np.bincount(owner[used], weights=contributions[used], minlength=half)

        first = leg(counts_a, u_time, u_size)
        second = leg(counts_b, 1.0 - u_time, 1.0 - u_size)
        # Cada par queda en posiciones contiguas (2i, 2i + 1)
        return np.column_stack([first, second]).ravel()[:size]

    # ------------------------------------------------------------------ #
    # Estimadores Monte Carlo
    # ------------------------------------------------------------------ #

    def mc_price(
        self,
        samples: np.ndarray,
        coeffs: VixCoefficients,
        K: float,
        r: float,
        delta_t: float,
        seed: int = 0,
        antithetic: bool = False,
    ) -> McEstimate:
        """e^{−rΔ}·media de (√(B_V σ²_T + C_V) − K)⁺ con su error estándar"""
        payoff = np.maximum(np.sqrt(coeffs.b_v * samples + coeffs.c_v) - K, 0.0)
        discount = np.exp(-r * delta_t)
        return _estimate(discount * payoff, seed, antithetic)

    def mc_characteristic_function(
        self, samples: np.ndarray, zeta: complex, seed: int = 0, antithetic: bool = False
    ) -> Tuple[McEstimate, McEstimate]:
        """
        Función característica empírica E[e^{iζσ²_T}]

        Returns:
            (parte real, parte imaginaria), cada una con su error estándar
        """
        values = np.exp(1j * zeta * samples)
        return _estimate(values.real, seed, antithetic), _estimate(values.imag, seed, antithetic)

    def mc_xi(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        K: float,
        mc: McSettings,
        quad: Optional[QuadratureSettings] = None,
        samples: Optional[np.ndarray] = None,
    ) -> McEstimate:
        """
        Estimador Monte Carlo de ξ con números aleatorios comunes

        ξ = e^{−rΔ}/(S_t(σ²_t + C_ρ))·∫(E[g(σ²_T + xe^{−λΔ})] − E[g(σ²_T)])(e^{ρx} − 1)ν(dx)

        En gamma-OU, u = e^{−bx} da ν(dx) = λa du sobre (0, 1]. La integral en u
        usa Gauss–Legendre compuesta (paneles geométricos hacia 0 y un borde en
        el quiebre del pago para el átomo sin saltos) duplicando paneles hasta
        que la media se mueve menos que max(abs_tol, 0.1·error estándar). Las
        mismas muestras de σ²_T sirven para todos los nodos.
        """
        quad = QuadratureSettings.resolve(quad, params.variant)
        if params.variant is not Variant.GAMMA_OU:
            raise VariantError("mc_xi requiere el simulador gamma-OU")
        coeffs = vix_coefficients(params)
        validate_strike(K, coeffs)
        if params.rho == 0:
            return McEstimate(mean=0.0, std_error=0.0, n_paths=mc.n_paths, seed=mc.seed)

        try:
            if samples is None:
                samples = self.simulate_gamma_ou_terminal(params, state.t, T, state.sigma_sq, mc)
            delta = T - state.t
            decay = np.exp(-params.lambda_ * delta)
            prefactor = np.exp(-params.r * delta) / (state.spot * (state.sigma_sq + c_rho(params)))

            # Quiebre del pago para los caminos sin saltos
            atom = decay * state.sigma_sq
            strike_level = (K * K - coeffs.c_v) / coeffs.b_v
            kink_u = None
            if strike_level > atom:
                kink_u = float(np.exp(-params.b * (strike_level - atom) / decay))

            floor = quad.abs_tol / prefactor
            previous = None
            panels = 4
            while panels <= MC_XI_MAX_PANELS:
                nodes, weights = gauss_legendre_panels(self._u_edges(panels, kink_u), MC_XI_GL_ORDER)
                per_path = self._xi_path_integrals(params, coeffs, samples, decay, K, nodes, weights)
                current = float(per_path.mean())
                spread = float(per_path.std() / np.sqrt(per_path.size))
                if previous is not None and abs(current - previous) < max(floor, 0.1 * spread):
                    estimate = _estimate(prefactor * per_path, mc.seed, mc.antithetic)
                    logger.info(
                        "MC hedge ratio estimated", xi=estimate.mean, std_error=estimate.std_error,
                        panels=panels, n_paths=samples.size,
                    )
                    return McEstimate(
                        mean=estimate.mean, std_error=estimate.std_error,
                        n_paths=samples.size, seed=mc.seed,
                    )
                previous = current
                panels *= 2
            raise QuadratureError("mc_xi: la integral exterior no convergió")
        except Exception as e:
            logger.error("Error estimating MC hedge ratio", error=str(e), K=K)
            raise

    def _u_edges(self, panels: int, kink_u: Optional[float]) -> np.ndarray:
        uniform = np.linspace(0.0, 1.0, panels + 1)
        graded = 2.0 ** -np.arange(1, MC_XI_GEOMETRIC_LEVELS + 1)
        edges = [uniform, graded[graded < 1.0 / panels]]
        if kink_u is not None and 0.0 < kink_u < 1.0:
            edges.append([kink_u])
        return np.unique(np.concatenate(edges))

    def _xi_path_integrals(
        self,
        params: ModelParams,
        coeffs: VixCoefficients,
        samples: np.ndarray,
        decay: float,
        K: float,
        nodes: np.ndarray,
        weights: np.ndarray,
    ) -> np.ndarray:
        """Y_i = λa·Σ_j w_j (g(σ²_i + x_j e^{−λΔ}) − g(σ²_i))(e^{ρx_j} − 1)"""
        x = -np.log(nodes) / params.b
        leverage = params.lambda_ * params.a * weights * np.expm1(params.rho * x)
        shift = x * decay

        def payoff(y: np.ndarray) -> np.ndarray:
            return np.maximum(np.sqrt(coeffs.b_v * y + coeffs.c_v) - K, 0.0)

        out = np.empty(samples.size)
        step = max(1, MC_XI_CHUNK_CELLS // nodes.size)
        for start in range(0, samples.size, step):
            chunk = samples[start:start + step]
            bumped = payoff(chunk[:, None] + shift[None, :]) - payoff(chunk)[:, None]
            out[start:start + step] = bumped @ leverage
        return out

    # ------------------------------------------------------------------ #
    # Inversión de densidad (IG-OU)
    # ------------------------------------------------------------------ #

    def invert_density(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        y: Optional[np.ndarray] = None,
    ) -> DensityInversion:
        """
        Densidad de σ²_T por inversión de Fourier

        p(y) = (1/π)∫₀^∞ Re[e^{−ivy}φ_{T|t}(v)]dv, Gauss–Legendre compuesta en v
        truncada donde |φ| < 1e−12, sobre una malla en y que va del átomo
        e^{−λΔ}σ²_t a la media más 20 desviaciones típicas.
        """
        if params.variant is not Variant.IG_OU:
            raise VariantError("La inversión de densidad requiere la condición de integrabilidad (IG-OU)")
        if not T > state.t:
            raise DomainError("La inversión de densidad requiere T > t")

        t = state.t
        delta = T - t
        mean = conditional_mean(params, t, T, state.sigma_sq)
        std = np.sqrt(conditional_variance(params, t, T))
        floor = np.exp(-params.lambda_ * delta) * state.sigma_sq
        if y is None:
            y = np.linspace(floor, mean + DENSITY_STD_SPAN * std, DENSITY_GRID_POINTS)

        limit = self._frequency_limit(params, t, T, state.sigma_sq)
        density = self._density_on(params, t, T, state.sigma_sq, y, limit, span=float(y[-1]))

        mass = float(integrate.simpson(density, x=y))
        first = float(integrate.simpson(y * density, x=y))
        second = float(integrate.simpson((y - first) ** 2 * density, x=y))
        logger.info(
            "Density inverted", mass=mass, mean=first, closed_form_mean=mean,
            frequency_limit=limit, grid=y.size,
        )
        return DensityInversion(
            y=y, density=density, mass=mass, mean=first, variance=second, frequency_limit=limit
        )

    def _frequency_limit(self, params: ModelParams, t: float, T: float, sigma_sq: float) -> float:
        limit = 64.0
        while limit < DENSITY_MAX_FREQUENCY:
            window = np.linspace(0.5 * limit, limit, 16)
            if np.max(np.abs(phi_values(params, t, T, sigma_sq, window))) < DENSITY_PHI_CUTOFF:
                return limit
            limit *= 2.0
        raise InversionAccuracyError(
            f"|φ| no cae por debajo de {DENSITY_PHI_CUTOFF:.0e} antes de v = {DENSITY_MAX_FREQUENCY:.3g}"
        )

    def _density_on(
        self,
        params: ModelParams,
        t: float,
        T: float,
        sigma_sq: float,
        y: np.ndarray,
        limit: float,
        span: float,
    ) -> np.ndarray:
        # Paneles de medio periodo de e^{−ivy} como mucho
        width = min(8.0, np.pi / max(span, 1e-12))
        edges = np.linspace(0.0, limit, int(np.ceil(limit / width)) + 1)
        v, w = gauss_legendre_panels(edges, 16)
        values = phi_values(params, t, T, sigma_sq, v) * w
        density = np.empty(y.size)
        chunk = max(1, 2 ** 24 // v.size)
        for start in range(0, y.size, chunk):
            block = y[start:start + chunk, None] * v[None, :]
            density[start:start + chunk] = np.cos(block) @ values.real + np.sin(block) @ values.imag
        return density / np.pi

    def invert_density_price(
        self,
        params: ModelParams,
        state: MarketState,
        T: float,
        K: float,
        quad: Optional[QuadratureSettings] = None,
    ) -> float:
        """
        Precio IG-OU integrando el pago contra la densidad invertida

        Returns:
            float: e^{−rΔ}∫(√(B_V y + C_V) − K)⁺p(y)dy
        """
        coeffs = vix_coefficients(params)
        validate_strike(K, coeffs)
        try:
            inversion = self.invert_density(params, state, T)
            if inversion.mass < 1.0 - DENSITY_MASS_TOL:
                raise InversionAccuracyError(
                    f"La densidad invertida integra {inversion.mass:.9f} < 1 − {DENSITY_MASS_TOL:.0e}"
                )

            # Malla alineada con el quiebre del pago
            y_strike = max((K * K - coeffs.c_v) / coeffs.b_v, inversion.y[0])
            y = np.linspace(y_strike, inversion.y[-1], DENSITY_GRID_POINTS)
            density = self._density_on(
                params, state.t, T, state.sigma_sq, y, inversion.frequency_limit, span=float(y[-1])
            )
            payoff = np.maximum(np.sqrt(coeffs.b_v * y + coeffs.c_v) - K, 0.0)
            value = np.exp(-params.r * (T - state.t)) * integrate.simpson(payoff * density, x=y)
            logger.info("Density-inversion price computed", K=K, price=float(value))
            return float(value)
        except Exception as e:
            logger.error("Error in density-inversion price", error=str(e), K=K)
            raise


def _estimate(values: np.ndarray, seed: int = 0, antithetic: bool = False) -> McEstimate:
    """
    Media y error estándar de una muestra

    Con antitéticos las muestras (2i, 2i + 1) forman un par: el error estándar
    sale de las medias de cada par, que sí son independientes.
    """
    n = values.size
    spread = values[: n - n % 2].reshape(-1, 2).mean(axis=1) if antithetic else values
    m = spread.size
    std_error = float(spread.std(ddof=1) / np.sqrt(m)) if m > 1 else float("inf")
    return McEstimate(mean=float(values.mean()), std_error=std_error, n_paths=n, seed=seed)


# Instancia global del servicio
oracle_service = OracleService()
